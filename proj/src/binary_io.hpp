#pragma once

// Little-endian packing helpers shared by the binary formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace mdpm::detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
            std::conditional_t<sizeof(T) == 4, std::uint32_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
  U bits = std::bit_cast<U>(value);
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  }
  out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
            std::conditional_t<sizeof(T) == 4, std::uint32_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(p[i]) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

/// Reads exactly n bytes; returns the count actually read.
inline std::size_t read_some(std::istream& in, unsigned char* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount());
}

}  // namespace mdpm::detail
