#include "mdpm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "mdpm/error.hpp"

namespace mdpm {

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer,
                      bool binary) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc
                                  : std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing", 0);
    writer(out);
    out.flush();
    if (!out) {
      throw IoError("write failed for " + tmp.string(),
                    static_cast<std::uint64_t>(out.tellp()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string(), 0);
  }
}

std::string format_real(double value) {
  if (!std::isfinite(value)) throw ValidationError("non-finite value in text output");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace mdpm
