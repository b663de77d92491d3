#pragma once

#include <array>
#include <cstddef>

namespace seiqr {

/// Forward-mode dual number carrying N directional derivatives.
///
/// Only the arithmetic needed by the ODE right-hand side and the delay
/// convolution is provided. Derivative propagation follows the usual rules
/// (a + a'e)(b + b'e) = ab + (a'b + ab')e with e^2 = 0.
template <std::size_t N>
struct Dual {
  double val = 0.0;
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v) {}  // NOLINT(google-explicit-constructor)

  /// A variable seeded along direction `k`.
  static constexpr Dual variable(double v, std::size_t k) {
    Dual r(v);
    r.d[k] = 1.0;
    return r;
  }

  constexpr Dual& operator+=(const Dual& o) {
    val += o.val;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    val -= o.val;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  constexpr Dual& operator*=(double s) {
    val *= s;
    for (std::size_t i = 0; i < N; ++i) d[i] *= s;
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.val + val * o.d[i];
    val *= o.val;
    return *this;
  }
  constexpr Dual& operator/=(double s) { return *this *= (1.0 / s); }
  constexpr Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.val;
    const double q = val * inv;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    val = q;
    return *this;
  }

  constexpr Dual operator-() const {
    Dual r;
    r.val = -val;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }
};

template <std::size_t N>
constexpr Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
constexpr Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
constexpr Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
constexpr Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }

template <std::size_t N>
constexpr Dual<N> operator+(Dual<N> a, double b) { a.val += b; return a; }
template <std::size_t N>
constexpr Dual<N> operator+(double a, Dual<N> b) { b.val += a; return b; }
template <std::size_t N>
constexpr Dual<N> operator-(Dual<N> a, double b) { a.val -= b; return a; }
template <std::size_t N>
constexpr Dual<N> operator-(double a, const Dual<N>& b) { Dual<N> r = -b; r.val += a; return r; }
template <std::size_t N>
constexpr Dual<N> operator*(Dual<N> a, double b) { return a *= b; }
template <std::size_t N>
constexpr Dual<N> operator*(double a, Dual<N> b) { return b *= a; }
template <std::size_t N>
constexpr Dual<N> operator/(Dual<N> a, double b) { return a /= b; }

inline constexpr double value_of(double x) { return x; }
template <std::size_t N>
constexpr double value_of(const Dual<N>& x) { return x.val; }

}  // namespace seiqr
