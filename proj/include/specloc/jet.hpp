#pragma once

/// \file jet.hpp
/// Truncated Taylor-series (jet) arithmetic. Carries a function value together
/// with its first `Order-1` derivatives through +, -, *, /, exp, so profile
/// derivatives come out exact to roundoff instead of via finite differences.

#include <array>
#include <cmath>
#include <stdexcept>

namespace specloc {

/// Jet of a scalar function at a point: coefficients c[k] = f^{(k)}(x0)/k!.
template <int Order>
struct Jet {
  static_assert(Order >= 1);
  std::array<double, Order> c{};

  static Jet constant(double v) {
    Jet j;
    j.c[0] = v;
    return j;
  }
  /// The identity function x at x0: value x0, slope 1.
  static Jet variable(double x0) {
    Jet j;
    j.c[0] = x0;
    if constexpr (Order > 1) j.c[1] = 1.0;
    return j;
  }

  double value() const { return c[0]; }
  /// k-th derivative (undoes the factorial scaling).
  double deriv(int k) const {
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return c[k] * fact;
  }
};

template <int N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (int k = 0; k < N; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (int k = 0; k < N; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a) {
  Jet<N> r;
  for (int k = 0; k < N; ++k) r.c[k] = -a.c[k];
  return r;
}

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;  // Cauchy product, truncated.
  for (int k = 0; k < N; ++k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
    r.c[k] = s;
  }
  return r;
}

template <int N>
Jet<N> operator*(double s, const Jet<N>& a) {
  Jet<N> r;
  for (int k = 0; k < N; ++k) r.c[k] = s * a.c[k];
  return r;
}

template <int N>
Jet<N> operator+(const Jet<N>& a, double s) {
  Jet<N> r = a;
  r.c[0] += s;
  return r;
}

template <int N>
Jet<N> operator-(double s, const Jet<N>& a) {
  Jet<N> r = -a;
  r.c[0] += s;
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a, double s) {
  Jet<N> r = a;
  r.c[0] -= s;
  return r;
}

/// Division via the recurrence q_k = (a_k - sum_{i<k} q_i b_{k-i}) / b_0.
template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  if (b.c[0] == 0.0) throw std::domain_error("jet division by zero value");
  Jet<N> q;
  for (int k = 0; k < N; ++k) {
    double s = a.c[k];
    for (int i = 0; i < k; ++i) s -= q.c[i] * b.c[k - i];
    q.c[k] = s / b.c[0];
  }
  return q;
}

/// exp of a jet: e' = e * a' gives k e_k = sum_{i=1..k} i a_i e_{k-i}.
template <int N>
Jet<N> exp(const Jet<N>& a) {
  Jet<N> e;
  e.c[0] = std::exp(a.c[0]);
  for (int k = 1; k < N; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += i * a.c[i] * e.c[k - i];
    e.c[k] = s / k;
  }
  return e;
}

/// Real power of a jet with positive value, via b w' = p b' w:
/// k b_0 w_k = p sum_{i=1..k} i b_i w_{k-i} - sum_{j=1..k-1} j w_j b_{k-j}.
template <int N>
Jet<N> pow(const Jet<N>& b, double p) {
  if (!(b.c[0] > 0.0)) throw std::domain_error("jet power needs a positive value");
  Jet<N> w;
  w.c[0] = std::pow(b.c[0], p);
  for (int k = 1; k < N; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += p * i * b.c[i] * w.c[k - i];
    for (int j = 1; j < k; ++j) s -= j * w.c[j] * b.c[k - j];
    w.c[k] = s / (k * b.c[0]);
  }
  return w;
}

}  // namespace specloc
