#pragma once

/// \file operator_spec.hpp
/// Declarative operator compositions: a finite product of frequency
/// multipliers and position-space weights, applied right-to-left. The same
/// description drives fast spectral application on large grids and dense
/// matrix materialization on small ones.

#include <complex>
#include <variant>
#include <vector>

#include "specloc/spectral.hpp"

namespace specloc {

/// Pointwise position-space factor w(x): product of cutoff evaluations on
/// x - center, a Japanese-bracket power <x-center>^p, a plain power
/// |x-center|^p, an optional sharp indicator 1_{|x-center| < R}, and a
/// constant gain. Weights are evaluated on the box coordinate as-is (no
/// periodization: their meaning is tied to the origin, not the torus).
struct PositionWeight {
  std::vector<CutoffFactor> cutoffs;
  double center = 0.0;
  double bracket_power = 0.0;    // <x - center>^p
  double abs_power = 0.0;        // |x - center|^p
  double indicator_radius = -1.0;  // 1_{|x - center| < R} when R >= 0
  std::complex<double> gain = 1.0;

  std::complex<double> eval(double x) const;

  static PositionWeight cutoff(CutoffFactor f, double center = 0.0) {
    PositionWeight w;
    w.cutoffs.push_back(f);
    w.center = center;
    return w;
  }
  static PositionWeight bracket(double p) {
    PositionWeight w;
    w.bracket_power = p;
    return w;
  }
  static PositionWeight indicator(double radius, double center = 0.0) {
    PositionWeight w;
    w.indicator_radius = radius;
    w.center = center;
    return w;
  }
};

using OperatorFactor = std::variant<MultiplierSpec, PositionWeight>;

/// Ordered operator product: factors[0] is applied last (leftmost factor),
/// factors.back() first, matching how a product A_1 A_2 ... A_k reads.
struct OperatorSpec {
  std::vector<OperatorFactor> factors;

  OperatorSpec() = default;
  OperatorSpec(MultiplierSpec m) : factors{std::move(m)} {}
  OperatorSpec(PositionWeight w) : factors{std::move(w)} {}

  static OperatorSpec identity() { return OperatorSpec(MultiplierSpec::identity()); }
};

/// Composition: (a * b) f = a (b f).
OperatorSpec operator*(OperatorSpec a, const OperatorSpec& b);

/// Applies the composition to a field; output in the input's representation.
/// Throws std::domain_error on an empty factor list and std::runtime_error
/// when a weight evaluates to a non-finite value.
Field apply_operator(const OperatorSpec& spec, const Field& f);

}  // namespace specloc
