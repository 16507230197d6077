#include "specloc/cutoffs.hpp"

#include <cmath>
#include <string>

#include "specloc/jet.hpp"

namespace specloc::cutoffs {
namespace {

constexpr int kOrder = kMaxDeriv + 1;
using J = Jet<kOrder>;

// Glue h(t) = exp(-1/t) for t > 0, extended by 0. Below t_min the value and
// every derivative underflow to exact zero in double precision; shortcutting
// there also avoids 1/t overflow for denormal t.
constexpr double kGlueCut = 1e-3;

J glue_jet(const J& t) {
  if (t.value() <= kGlueCut) return J{};
  return exp(-(J::constant(1.0) / t));
}

// Full jet of the transition profile at x (constant outside the glue region).
J transition_jet(double x) {
  if (x <= 1.0) return J::constant(1.0);
  if (x >= 2.0) return J::constant(0.0);
  const J xx = J::variable(x);
  const J a = glue_jet(2.0 - xx);   // 1-side glue
  const J b = glue_jet(xx - 1.0);   // 0-side glue
  return a / (a + b);
}

double check_deriv(int deriv) {
  if (deriv < 0 || deriv > kMaxDeriv)
    throw std::domain_error("cutoff derivative order out of range (max " +
                            std::to_string(kMaxDeriv) + ")");
  return 0.0;
}

}  // namespace

double transition(double x, int deriv) {
  check_deriv(deriv);
  if (deriv == 0) {
    // Fast scalar path: the hot loops only ever need the value.
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    const double a = std::exp(-1.0 / (2.0 - x));
    const double b = std::exp(-1.0 / (x - 1.0));
    return a / (a + b);
  }
  if (x <= 1.0 || x >= 2.0) return 0.0;  // all derivatives vanish at the seams
  return transition_jet(x).deriv(deriv);
}

double bump(double x, int deriv) {
  // bump^{(a)}(x) = transition^{(a)}(x) - 2^a transition^{(a)}(2x)
  return transition(x, deriv) - std::ldexp(transition(2.0 * x, deriv), deriv);
}

double highpass(double x, int deriv) {
  if (deriv == 0) return 1.0 - transition(2.0 * x);
  return -std::ldexp(transition(2.0 * x, deriv), deriv);
}

double effective_scale(Variant kind, double scale) {
  switch (kind) {
    case Variant::at:
    case Variant::le:
    case Variant::ge:
      return scale;
    case Variant::lt:
      return scale / 2.0;
    case Variant::gt:
      return 2.0 * scale;
    case Variant::lesssim:
      return scale * 1024.0;  // <~C == <= C*2^10
    case Variant::ll:
    case Variant::gtrsim:
      return scale / 1024.0;  // <<C == <= C*2^-10, >~C == >= C*2^-10
    case Variant::gg:
      return scale * 2048.0;  // >>C == >= C*2^11
    case Variant::sim:
      throw std::domain_error("Variant::sim is composite; it has no single scale");
  }
  throw std::logic_error("unreachable");
}

double eval(Variant kind, double scale, double x, int deriv) {
  check_deriv(deriv);
  if (!(scale > 0.0)) throw std::domain_error("cutoff scale must be positive");
  switch (kind) {
    case Variant::at:
      return bump(x / scale, deriv);
    case Variant::le:
    case Variant::lt:
    case Variant::lesssim:
    case Variant::ll:
      return transition(x / effective_scale(kind, scale), deriv);
    case Variant::ge:
    case Variant::gt:
    case Variant::gtrsim:
    case Variant::gg:
      return highpass(x / effective_scale(kind, scale), deriv);
    case Variant::sim:
      // Exact complement of the <<C and >>C pieces: <~C minus <<C, evaluated
      // per constituent so ll + sim + gg telescopes to 1 exactly.
      return eval(Variant::lesssim, scale, x, deriv) -
             eval(Variant::ll, scale, x, deriv);
  }
  throw std::logic_error("unreachable");
}

double eval_chain(Variant kind, double scale, double x, int deriv) {
  if (kind == Variant::sim) {
    return eval_chain(Variant::lesssim, scale, x, deriv) -
           eval_chain(Variant::ll, scale, x, deriv);
  }
  return eval(kind, scale, x, deriv) *
         std::pow(effective_scale(kind, scale), -deriv);
}

}  // namespace specloc::cutoffs
