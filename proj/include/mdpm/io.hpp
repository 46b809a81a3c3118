#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace mdpm {

/// Writes through a temporary sibling file and renames it into place, so a
/// reader never observes a partially written output.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer,
                      bool binary = true);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_real(double value);

}  // namespace mdpm
