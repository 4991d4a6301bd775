#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <type_traits>

namespace qttn {

/// Scalar kinds: single-real, single-complex, double-real, double-complex.
enum class Precision : std::uint8_t { S, C, D, Z };

using cfloat = std::complex<float>;
using cdouble = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename R>
struct is_complex<std::complex<R>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename T>
struct real_of {
  using type = T;
};
template <typename R>
struct real_of<std::complex<R>> {
  using type = R;
};
template <typename T>
using real_t = typename real_of<T>::type;

template <typename T>
concept Scalar = std::is_same_v<T, float> || std::is_same_v<T, double> ||
                 std::is_same_v<T, cfloat> || std::is_same_v<T, cdouble>;

template <Scalar T>
constexpr Precision precision_of() {
  if constexpr (std::is_same_v<T, float>) return Precision::S;
  else if constexpr (std::is_same_v<T, cfloat>) return Precision::C;
  else if constexpr (std::is_same_v<T, double>) return Precision::D;
  else return Precision::Z;
}

constexpr std::size_t bytes_per_scalar(Precision p) {
  switch (p) {
    case Precision::S: return 4;
    case Precision::C: return 8;
    case Precision::D: return 8;
    case Precision::Z: return 16;
  }
  return 0;
}

constexpr bool is_complex_precision(Precision p) { return p == Precision::C || p == Precision::Z; }
constexpr bool is_double_precision(Precision p) { return p == Precision::D || p == Precision::Z; }

/// True when converting `from` to `to` can never lose information
/// (S < D < Z and S < C < Z).
constexpr bool is_upcast(Precision from, Precision to) {
  if (from == to) return true;
  switch (from) {
    case Precision::S: return true;
    case Precision::C: return to == Precision::Z;
    case Precision::D: return to == Precision::Z;
    case Precision::Z: return false;
  }
  return false;
}

constexpr char to_char(Precision p) {
  switch (p) {
    case Precision::S: return 'S';
    case Precision::C: return 'C';
    case Precision::D: return 'D';
    case Precision::Z: return 'Z';
  }
  return '?';
}

/// Parses 'S', 'C', 'D' or 'Z'; throws ArgumentError otherwise.
Precision precision_from_char(char c);

/// Isometry tolerance per precision class: 1e-5 single, 1e-12 double.
constexpr double isometry_tolerance(Precision p) { return is_double_precision(p) ? 1e-12 : 1e-5; }

template <Scalar T>
constexpr double isometry_tolerance() {
  return isometry_tolerance(precision_of<T>());
}

template <Scalar T>
constexpr double machine_epsilon() {
  return static_cast<double>(std::numeric_limits<real_t<T>>::epsilon());
}

template <typename T>
inline T conj_value(T x) {
  if constexpr (is_complex_v<T>) return std::conj(x);
  else return x;
}

template <typename T>
inline real_t<T> abs2(T x) {
  if constexpr (is_complex_v<T>) return x.real() * x.real() + x.imag() * x.imag();
  else return x * x;
}

/// c + a * b without the NaN-recovery path of std::complex multiplication.
template <typename T>
inline T mul_add(T c, T a, T b) {
  if constexpr (is_complex_v<T>) {
    return {c.real() + a.real() * b.real() - a.imag() * b.imag(),
            c.imag() + a.real() * b.imag() + a.imag() * b.real()};
  } else {
    return c + a * b;
  }
}

template <typename T>
inline T mul(T a, T b) {
  return mul_add(T{}, a, b);
}

}  // namespace qttn
