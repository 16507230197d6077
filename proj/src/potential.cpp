#include "specloc/potential.hpp"

#include <cmath>
#include <sstream>

#include "specloc/jet.hpp"

namespace specloc {
namespace {

using J = Jet<kMaxPotentialDeriv + 1>;

// sech^2(y) = 4 q / (1+q)^2 with q = e^{-2|y|}; branching on the sign of the
// value keeps the exponential argument non-positive, so large |y| underflows
// to 0 instead of overflowing.
J sech2_jet(const J& y) {
  const J q = y.c[0] >= 0.0 ? exp(-2.0 * y) : exp(2.0 * y);
  const J d = q + 1.0;
  return 4.0 * q / (d * d);
}

double sech2(double y) {
  const double q = std::exp(-2.0 * std::abs(y));
  return 4.0 * q / ((1.0 + q) * (1.0 + q));
}

double time_factor(const PotentialSpec& s, double t) {
  return 1.0 + s.modulation * std::cos(s.frequency * t + s.phase);
}

double moving_center(const PotentialSpec& s, double t) {
  return s.modulation * s.width * std::sin(s.frequency * t + s.phase);
}

J potential_jet(const PotentialSpec& s, double x, double t) {
  const double iw = 1.0 / s.width;
  switch (s.family) {
    case PotentialFamily::zero:
      return J::constant(0.0);
    case PotentialFamily::static_sech2:
      return -s.amplitude * sech2_jet(iw * J::variable(x));
    case PotentialFamily::breathing_sech2:
      return (-s.amplitude * time_factor(s, t)) * sech2_jet(iw * J::variable(x));
    case PotentialFamily::moving_gaussian_envelope: {
      const J z = iw * (J::variable(x) - moving_center(s, t));
      return -s.amplitude * exp(-(z * z));
    }
    case PotentialFamily::coulomb_like: {
      const J z = iw * J::variable(x);
      return -s.amplitude * pow(z * z + 1.0, -0.5);
    }
  }
  throw std::logic_error("unknown potential family");
}

double potential_value(const PotentialSpec& s, double x, double t) {
  const double iw = 1.0 / s.width;
  switch (s.family) {
    case PotentialFamily::zero:
      return 0.0;
    case PotentialFamily::static_sech2:
      return -s.amplitude * sech2(x * iw);
    case PotentialFamily::breathing_sech2:
      return -s.amplitude * time_factor(s, t) * sech2(x * iw);
    case PotentialFamily::moving_gaussian_envelope: {
      const double z = (x - moving_center(s, t)) * iw;
      return -s.amplitude * std::exp(-z * z);
    }
    case PotentialFamily::coulomb_like: {
      const double z = x * iw;
      return -s.amplitude / std::sqrt(1.0 + z * z);
    }
  }
  throw std::logic_error("unknown potential family");
}

}  // namespace

std::string to_string(PotentialFamily family) {
  switch (family) {
    case PotentialFamily::zero: return "zero";
    case PotentialFamily::static_sech2: return "static_sech2";
    case PotentialFamily::breathing_sech2: return "breathing_sech2";
    case PotentialFamily::moving_gaussian_envelope: return "moving_gaussian_envelope";
    case PotentialFamily::coulomb_like: return "coulomb_like";
  }
  throw std::logic_error("unknown potential family");
}

PotentialFamily family_from_string(const std::string& name) {
  for (PotentialFamily f :
       {PotentialFamily::zero, PotentialFamily::static_sech2,
        PotentialFamily::breathing_sech2, PotentialFamily::moving_gaussian_envelope,
        PotentialFamily::coulomb_like})
    if (to_string(f) == name) return f;
  throw std::domain_error("unknown potential family '" + name + "'");
}

void check_spec(const PotentialSpec& spec) {
  if (!(spec.width > 0.0)) throw std::domain_error("potential width must be positive");
  if (spec.modulation < 0.0 || spec.modulation >= 1.0)
    throw std::domain_error("modulation depth must lie in [0, 1)");
  if (!(spec.sigma > 2.0)) throw std::domain_error("decay exponent sigma must exceed 2");
  if (spec.symbol_order < 0 || spec.symbol_order > kMaxPotentialDeriv)
    throw std::domain_error("symbol order must lie in [0, " +
                            std::to_string(kMaxPotentialDeriv) + "]");
}

double eval_potential(const PotentialSpec& spec, double x, double t, int x_deriv) {
  if (x_deriv < 0 || x_deriv > kMaxPotentialDeriv) {
    std::ostringstream os;
    os << "x derivative order " << x_deriv << " unsupported (max "
       << kMaxPotentialDeriv << ")";
    throw std::domain_error(os.str());
  }
  if (!(spec.width > 0.0)) throw std::domain_error("potential width must be positive");
  if (x_deriv == 0) return potential_value(spec, x, t);
  return potential_jet(spec, x, t).deriv(x_deriv);
}

Eigen::VectorXd potential_profile(const PotentialSpec& spec, const Grid& g, double t) {
  if (!(spec.width > 0.0)) throw std::domain_error("potential width must be positive");
  Eigen::VectorXd v(g.n);
  for (int i = 0; i < g.n; ++i) v[i] = potential_value(spec, g.x(i), t);
  return v;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " (sigma=" << sigma << ", n=" << symbol_order
     << ", bound=" << bound;
  for (std::size_t k = 0; k < sup_weighted.size(); ++k)
    os << ", sup[" << k << "]=" << sup_weighted[k];
  if (has_nan) os << ", NaN";
  if (growing) os << ", growing toward the box edge";
  os << ")";
  return os.str();
}

ValidationReport validate_hypotheses(const PotentialSpec& spec, const Grid& g,
                                     const std::vector<double>& t_samples,
                                     double bound) {
  check_spec(spec);
  if (t_samples.empty()) throw std::invalid_argument("t_samples must be nonempty");
  const int kmax = std::max(spec.symbol_order, 1);
  ValidationReport rep;
  rep.sigma = spec.sigma;
  rep.symbol_order = spec.symbol_order;
  rep.bound = bound;
  rep.sup_weighted.assign(kmax + 1, 0.0);
  std::vector<double> sup_inner(kmax + 1, 0.0);
  for (double t : t_samples) {
    for (int i = 0; i < g.n; ++i) {
      const double x = g.x(i);
      const J v = potential_jet(spec, x, t);
      for (int k = 0; k <= kmax; ++k) {
        const double w =
            std::pow(1.0 + x * x, 0.5 * (spec.sigma + k)) * std::abs(v.deriv(k));
        if (std::isnan(w)) {
          rep.has_nan = true;
          continue;
        }
        rep.sup_weighted[k] = std::max(rep.sup_weighted[k], w);
        if (std::abs(x) <= 0.5 * g.half_width)
          sup_inner[k] = std::max(sup_inner[k], w);
      }
    }
  }
  bool ok = !rep.has_nan;
  for (int k = 0; k <= kmax; ++k) {
    if (!(rep.sup_weighted[k] <= bound)) ok = false;
    if (rep.sup_weighted[k] > 1.5 * sup_inner[k]) rep.growing = true;
  }
  rep.pass = ok;
  return rep;
}

}  // namespace specloc
