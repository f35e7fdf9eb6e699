#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>

#include "radet/error.hpp"

namespace radet::binio {

// Little-endian scalar encoding shared by the dataset and model files.

template <class T>
void put(std::ostream& os, T value) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& what) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    fail(ErrorKind::io, "truncated file while reading " + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void put_magic(std::ostream& os, const char (&magic)[9]) { os.write(magic, 8); }

inline void expect_magic(std::istream& is, const char (&magic)[9], const std::string& path) {
  char got[8];
  if (!is.read(got, 8) || std::memcmp(got, magic, 8) != 0) {
    fail(ErrorKind::io, path + ": not a " + std::string(magic, 8) + " file");
  }
}

}  // namespace radet::binio
