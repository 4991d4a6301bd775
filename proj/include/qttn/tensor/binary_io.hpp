#pragma once

// Little-endian primitives for the binary tensor and checkpoint formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "qttn/tensor/errors.hpp"
#include "qttn/tensor/precision.hpp"

namespace qttn::io {

class FormatError : public Error {
 public:
  using Error::Error;
};

template <typename U>
void write_le(std::ostream& os, U value) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFFu);
  os.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U read_le(std::istream& is) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char bytes[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw FormatError("unexpected end of stream");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(static_cast<U>(bytes[i]) << (8 * i));
  return value;
}

inline void write_f64(std::ostream& os, double x) { write_le(os, std::bit_cast<std::uint64_t>(x)); }
inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_le<std::uint64_t>(is)); }

inline void write_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
  char got[4];
  if (!is.read(got, 4) || std::string(got, 4) != std::string(magic, 4))
    throw FormatError(std::string("bad magic, expected ") + magic);
}

template <Scalar T>
void write_scalars(std::ostream& os, std::span<const T> values) {
  for (const auto& x : values) {
    if constexpr (std::is_same_v<T, float>) {
      write_le(os, std::bit_cast<std::uint32_t>(x));
    } else if constexpr (std::is_same_v<T, double>) {
      write_le(os, std::bit_cast<std::uint64_t>(x));
    } else if constexpr (std::is_same_v<T, cfloat>) {
      write_le(os, std::bit_cast<std::uint32_t>(x.real()));
      write_le(os, std::bit_cast<std::uint32_t>(x.imag()));
    } else {
      write_le(os, std::bit_cast<std::uint64_t>(x.real()));
      write_le(os, std::bit_cast<std::uint64_t>(x.imag()));
    }
  }
}

template <Scalar T>
void read_scalars(std::istream& is, std::span<T> values) {
  for (auto& x : values) {
    if constexpr (std::is_same_v<T, float>) {
      x = std::bit_cast<float>(read_le<std::uint32_t>(is));
    } else if constexpr (std::is_same_v<T, double>) {
      x = std::bit_cast<double>(read_le<std::uint64_t>(is));
    } else if constexpr (std::is_same_v<T, cfloat>) {
      const float re = std::bit_cast<float>(read_le<std::uint32_t>(is));
      const float im = std::bit_cast<float>(read_le<std::uint32_t>(is));
      x = {re, im};
    } else {
      const double re = std::bit_cast<double>(read_le<std::uint64_t>(is));
      const double im = std::bit_cast<double>(read_le<std::uint64_t>(is));
      x = {re, im};
    }
  }
}

}  // namespace qttn::io
