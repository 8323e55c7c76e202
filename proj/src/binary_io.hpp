#pragma once

// Little-endian primitive IO shared by the dataset cache and checkpoints.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "dcpcc/errors.hpp"

namespace dcpcc::io {

template <typename T>
  requires std::is_integral_v<T>
void put(std::ostream& os, T v) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(v);
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>(u & 0xFF);
    u = static_cast<U>(u >> 8);
  }
  os.write(buf.data(), buf.size());
}

inline void put_f64(std::ostream& os, double v) { put(os, std::bit_cast<std::uint64_t>(v)); }

template <typename T>
  requires std::is_integral_v<T>
T get(std::istream& is, const char* what) {
  std::array<unsigned char, sizeof(T)> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (is.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw DataError(std::string("truncated file while reading ") + what);
  }
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) {
    u = static_cast<std::make_unsigned_t<T>>((u << 8) | buf[i]);
  }
  return static_cast<T>(u);
}

inline double get_f64(std::istream& is, const char* what) {
  return std::bit_cast<double>(get<std::uint64_t>(is, what));
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& file) {
  char buf[4] = {};
  is.read(buf, 4);
  if (is.gcount() != 4 || std::memcmp(buf, magic, 4) != 0) {
    throw DataError(file + ": bad magic, expected '" + magic + "'");
  }
}

}  // namespace dcpcc::io
