/// \file lemma_lab.cpp
/// Dense verification bench: materialization, norms, decay fits, and the
/// standard battery behind the JSON report.

#include "specloc/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

#include "specloc/cutoffs.hpp"

namespace specloc {
namespace {

using cutoffs::Variant;
using cd = std::complex<double>;
using nlohmann::json;

CutoffFactor factor(Variant kind, double scale,
                    CutoffFactor::Axis axis = CutoffFactor::Axis::abs) {
  CutoffFactor f;
  f.kind = kind;
  f.scale = scale;
  f.axis = axis;
  return f;
}

// The dispersive sandwiches are measured in parabolically rescaled form:
// x -> sqrt(t) x maps  F_{<= t^a}(|x|) F_{>= t^-d}(|D|) e^{+it Lap} (...)
// unitarily onto the same sandwich with window scale t^{a-1/2}, floor
// t^{1/2-d}, and unit flow time. The literal form needs a periodic box
// growing linearly in t before the passed waves lap it; the rescaled form
// measures the identical continuum norm on one fixed lattice, so the fit
// can actually reach the asymptotic regime.
//
// The frequency factor also rolls off smoothly below the lattice's top
// frequency (plateau at ximax/4, gone by ximax/2): a symbol alive near the
// Nyquist wrap would measure lattice recurrence, and the discarded band's
// continuum counterpart only separates faster.
OperatorSpec sandwich_left(double window_scale, double floor_scale, double flow_time,
                           const Grid& grid) {
  MultiplierSpec floor_band = MultiplierSpec::cutoff(factor(Variant::ge, floor_scale));
  floor_band.cutoffs.push_back(factor(Variant::le, 0.25 * M_PI / grid.dx()));
  floor_band.quad_phase = -flow_time;  // e^{+i flow Lap}
  return OperatorSpec(PositionWeight::cutoff(factor(Variant::le, window_scale))) *
         floor_band;
}

void require_decay_wedge(double alpha, double beta, double delta) {
  if (!(delta > 0.0) || !(delta < std::min({0.5, 1.0 - alpha, 1.0 - beta})))
    throw std::domain_error("decay check: need 0 < delta < min(1/2, 1-alpha, 1-beta)");
}

// Rescaled-floor headroom: the grid must keep the floor on the roll-off
// plateau, else the sandwich degenerates to transition shoulders.
void require_floor_headroom(double floor_scale, const Grid& grid, const char* who) {
  if (!(floor_scale <= 0.25 * M_PI / grid.dx()))
    throw std::domain_error(std::string(who) +
                            ": rescaled frequency floor above the lattice cap; "
                            "refine the grid or reduce t");
}

// On the torus a frequency xi travels 2 t xi within the horizon; once the
// fastest passed wave covers the period minus the window supports it
// re-enters from the far side and the decay under test is void.
void require_no_wrap(double t, double xi_top, double support_margin, const Grid& grid) {
  if (!(2.0 * t * xi_top + support_margin <= 2.0 * grid.half_width))
    throw std::domain_error(
        "decay check: horizon wraps the periodic box; use a wider grid or smaller t");
}

double norm_of(const OperatorSpec& spec, const Grid& grid) {
  return operator_norm(materialize(spec, grid));
}

Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a * b - b * a;
}

json fit_to_json(const DecayFit& fit) {
  return json{{"abscissae", fit.abscissae}, {"norms", fit.norms},
              {"slope", fit.slope},         {"intercept", fit.intercept},
              {"slope_stderr", fit.slope_stderr}, {"r2", fit.r2},
              {"threshold", fit.threshold}, {"pass", fit.pass}};
}

}  // namespace

const Grid& lab_grid() {
  static const Grid g(256, 64.0);
  return g;
}

DenseOperator materialize(const std::function<Field(const Field&)>& op, const Grid& grid) {
  if (grid.n > 512)
    throw std::length_error("materialize: dense build capped at 512 points");
  DenseOperator out{grid, OperatorSpec{}, Eigen::MatrixXcd(grid.n, grid.n)};
  for (int col = 0; col < grid.n; ++col) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(grid.n);
    e[col] = 1.0;
    out.matrix.col(col) =
        in_rep(op(Field(grid, Rep::position, std::move(e))), Rep::position).data;
  }
  return out;
}

DenseOperator materialize(const OperatorSpec& spec, const Grid& grid) {
  DenseOperator out =
      materialize([&](const Field& f) { return apply_operator(spec, f); }, grid);
  out.provenance = spec;
  return out;
}

double operator_norm(const DenseOperator& op) {
  const Eigen::MatrixXcd& a = op.matrix;
  if (a.norm() == 0.0) return 0.0;
  std::mt19937_64 rng(0x5eedba11ULL);
  std::normal_distribution<double> nd;
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = cd(nd(rng), nd(rng));
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXcd w = a.adjoint() * (a * v);
    const double nw = w.norm();
    if (nw == 0.0) {  // started in the kernel; redraw
      for (int i = 0; i < n; ++i) v[i] = cd(nd(rng), nd(rng));
      v.normalize();
      estimate = 0.0;
      continue;
    }
    const double next = std::sqrt(nw);
    if (next <= 1e-13) return next;  // numerical floor; no direction to refine
    if (std::abs(next - estimate) <= 1e-8 * next + 1e-12) return next;
    estimate = next;
    v = w / nw;
  }
  throw std::runtime_error("operator_norm: power iteration did not converge");
}

DecayFit fit_decay(const std::vector<double>& abscissae, const std::vector<double>& norms) {
  const std::size_t n = abscissae.size();
  if (n != norms.size() || n < 2)
    throw std::domain_error("fit_decay: need >= 2 matched samples");
  DecayFit fit;
  fit.abscissae = abscissae;
  fit.norms = norms;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(abscissae[i] > 0.0) || !(norms[i] > 0.0))
      throw std::domain_error("fit_decay: samples must be strictly positive");
    lx[i] = std::log(abscissae[i]);
    ly[i] = std::log(norms[i]);
  }
  const double xbar = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double ybar = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - xbar) * (lx[i] - xbar);
    sxy += (lx[i] - xbar) * (ly[i] - ybar);
    syy += (ly[i] - ybar) * (ly[i] - ybar);
  }
  if (sxx == 0.0) throw std::domain_error("fit_decay: abscissae must be distinct");
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
  }
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
  fit.slope_stderr = n > 2 ? std::sqrt(sse / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
  return fit;
}

DecayFit check_space_freq_decay(double alpha, double beta, double delta, double M,
                                const std::vector<double>& t_samples, const Grid& grid) {
  require_decay_wedge(alpha, beta, delta);
  if (t_samples.size() < 4)
    throw std::domain_error("check_space_freq_decay: need >= 4 time samples");
  std::vector<double> norms;
  for (double t : t_samples) {
    if (!(t >= 1.0)) throw std::domain_error("check_space_freq_decay: need t >= 1");
    const double floor_scale = std::pow(t, 0.5 - delta);
    require_floor_headroom(floor_scale, grid, "check_space_freq_decay");
    require_no_wrap(1.0, 0.5 * M_PI / grid.dx(),
                    4.0 * (std::pow(t, alpha - 0.5) + std::pow(t, beta - 0.5)), grid);
    norms.push_back(norm_of(
        sandwich_left(std::pow(t, alpha - 0.5), floor_scale, 1.0, grid) *
            OperatorSpec(PositionWeight::cutoff(
                factor(Variant::le, std::pow(t, beta - 0.5)))),
        grid));
  }
  DecayFit fit = fit_decay(t_samples, norms);
  fit.threshold = -M;
  fit.pass = fit.slope <= fit.threshold;
  return fit;
}

DecayFit check_weighted_decay(double alpha, double beta, double delta, double sigma,
                              const std::vector<double>& t_samples, const Grid& grid) {
  require_decay_wedge(alpha, beta, delta);
  if (!(sigma > 0.0)) throw std::domain_error("check_weighted_decay: need sigma > 0");
  if (t_samples.size() < 4)
    throw std::domain_error("check_weighted_decay: need >= 4 time samples");
  std::vector<double> norms;
  for (double t : t_samples) {
    if (!(t >= 1.0)) throw std::domain_error("check_weighted_decay: need t >= 1");
    const double floor_scale = std::pow(t, 0.5 - delta);
    require_floor_headroom(floor_scale, grid, "check_weighted_decay");
    require_no_wrap(1.0, 0.5 * M_PI / grid.dx(), 4.0 * std::pow(t, alpha - 0.5), grid);
    const OperatorSpec left =
        sandwich_left(std::pow(t, alpha - 0.5), floor_scale, 1.0, grid);
    // the weight does not rescale onto a PositionWeight: apply <sqrt(t) x>^-sigma
    // pointwise and materialize the composite action directly
    DenseOperator op = materialize(
        [&](const Field& fin) {
          Field f = in_rep(fin, Rep::position);
          for (int i = 0; i < grid.n; ++i) {
            const double x = grid.x(i);
            f.data[i] *= std::pow(1.0 + t * x * x, -0.5 * sigma);
          }
          return apply_operator(left, f);
        },
        grid);
    norms.push_back(operator_norm(op));
  }
  DecayFit fit = fit_decay(t_samples, norms);
  fit.threshold = -beta * sigma + 0.2;  // saturation by the weight's strength
  fit.pass = fit.slope <= fit.threshold;
  return fit;
}

DecayFit check_kernel_decay(int j, int k, int m, const std::vector<double>& t_samples,
                            const Grid& grid) {
  if (j < 0 || k <= -j - 10)
    throw std::domain_error("check_kernel_decay: need j >= 0 and k > -j-10");
  if (m < 0) throw std::domain_error("check_kernel_decay: need m >= 0");
  if (t_samples.size() < 3)
    throw std::domain_error("check_kernel_decay: need >= 3 time samples");
  std::vector<double> norms, bounds;
  for (double t : t_samples) {
    if (!(t > std::ldexp(1.0, j - k)))
      throw std::domain_error("check_kernel_decay: need t > 2^{j-k}");
    require_no_wrap(t, std::ldexp(1.0, k + 1), std::ldexp(1.0, j + 1) + 1.0, grid);
    if (!(std::ldexp(1.0, k + 1) <= M_PI / grid.dx()))
      throw std::domain_error("check_kernel_decay: band beyond the lattice frequencies");
    MultiplierSpec band = MultiplierSpec::derivative(m);
    band.cutoffs.push_back(factor(Variant::at, std::ldexp(1.0, k)));
    band.quad_phase = t;  // e^{-it Lap}
    const OperatorSpec op =
        OperatorSpec(PositionWeight::indicator(t * std::ldexp(1.0, k - 20))) *
        band * OperatorSpec(PositionWeight::cutoff(factor(Variant::le, std::ldexp(1.0, j))));
    norms.push_back(norm_of(op, grid));
    // min(2^{mk}, 2^{j/2} 2^{(m+3/2-2N)k} / t^{N-1/2}) at N = 2
    bounds.push_back(std::min(std::ldexp(1.0, m * k),
                              std::pow(2.0, 0.5 * j) *
                                  std::pow(2.0, (m + 1.5 - 4.0) * k) / std::pow(t, 1.5)));
  }
  DecayFit fit = fit_decay(t_samples, norms);
  fit.threshold = -1.5;  // -(N - 1/2) with N = 2
  bool within_constant = true;
  for (std::size_t i = 0; i < norms.size(); ++i)
    within_constant = within_constant && norms[i] <= 10.0 * bounds[i];
  fit.pass = fit.slope <= fit.threshold && within_constant;
  return fit;
}

double check_support_separation(int j, int k, int n_ibp, const Grid& grid,
                                bool* applicable) {
  (void)n_ibp;  // parametrizes the caller's ratio thresholds, not the norm
  const double gap = std::ldexp(1.0, j);
  const double center = 2.0 + 0.5 * gap;  // unit windows, supports 2^j apart
  if (center + 2.0 > grid.half_width)
    throw std::domain_error("check_support_separation: windows exceed the box");
  const double rolloff = 0.5 * M_PI / grid.dx();
  if (!(std::ldexp(1.0, k) <= rolloff))
    throw std::domain_error("check_support_separation: band above the Nyquist roll-off");
  if (applicable != nullptr) *applicable = gap >= 4.0 * grid.dx();
  MultiplierSpec half_axis =
      MultiplierSpec::cutoff(factor(Variant::ge, std::ldexp(1.0, k),
                                    CutoffFactor::Axis::plus));
  // smooth down before the Nyquist wrap: a symbol jumping 1 -> 0 across the
  // wrap has a 1/distance kernel tail that buries the separation gain
  half_axis.cutoffs.push_back(factor(Variant::le, rolloff));
  const OperatorSpec op =
      OperatorSpec(PositionWeight::cutoff(factor(Variant::le, 1.0), center)) *
      half_axis *
      OperatorSpec(PositionWeight::cutoff(factor(Variant::le, 1.0), -center));
  return norm_of(op, grid);
}

double check_symmetrization(int dim, int trials, std::uint64_t seed) {
  if (dim < 1 || dim > 64) throw std::domain_error("check_symmetrization: dim in [1,64]");
  if (trials < 1) throw std::domain_error("check_symmetrization: need trials >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto random_matrix = [&] {
    Eigen::MatrixXcd M(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) M(r, c) = cd(nd(rng), nd(rng));
    M /= M.norm();
    return M;
  };
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const Eigen::MatrixXcd A = random_matrix();
    const Eigen::MatrixXcd B = random_matrix();
    // C commutes with A by construction: a quadratic polynomial in A
    Eigen::MatrixXcd C = cd(nd(rng), nd(rng)) *
                             Eigen::MatrixXcd::Identity(dim, dim) +
                         cd(nd(rng), nd(rng)) * A + cd(nd(rng), nd(rng)) * A * A;
    C /= C.norm();
    const Eigen::MatrixXcd AC = A * C;
    const Eigen::MatrixXcd lhs = A * A * B * C * C + C * C * B * A * A;
    const Eigen::MatrixXcd R = A * commutator(commutator(A, B), C) * C +
                               C * commutator(commutator(C, B), A) * A +
                               A * commutator(C, commutator(C, B)) * A +
                               C * commutator(A, commutator(A, B)) * C;
    worst = std::max(worst, (lhs - (2.0 * AC * B * AC + R)).norm());
  }
  return worst;
}

double check_weight_inequalities(double alpha, double rho, int samples,
                                 std::uint64_t seed) {
  if (!(alpha > 0.0) || rho < 0.0 || rho > std::min(alpha, 1.0))
    throw std::domain_error("check_weight_inequalities: need 0 <= rho <= min(alpha, 1)");
  if (samples < 1) throw std::domain_error("check_weight_inequalities: need samples >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(-3.0, 3.0), sign(-1.0, 1.0);
  const auto bracket = [](double x) { return std::sqrt(1.0 + x * x); };
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double x = std::copysign(std::pow(10.0, mag(rng)), sign(rng));
    // half the pairs are near-collisions to probe the |x-y|^rho factor
    const double y = (s % 2 == 0) ? std::copysign(std::pow(10.0, mag(rng)), sign(rng))
                                  : x * (1.0 + 1e-4 * sign(rng));
    if (x == y) continue;
    const double dr = std::pow(std::abs(x - y), rho);
    const double plain = std::abs(std::pow(std::abs(x), alpha) - std::pow(std::abs(y), alpha)) /
                         (std::pow(std::abs(x) + std::abs(y), alpha - rho) * dr);
    const double japanese =
        std::abs(std::pow(bracket(x), alpha) - std::pow(bracket(y), alpha)) /
        (std::pow(bracket(x) + bracket(y), alpha - rho) * dr);
    worst = std::max({worst, plain, japanese});
  }
  return worst;
}

CommutatorScaling check_commutator_scaling(double alpha, double rho,
                                           const std::vector<int>& j_range,
                                           const std::vector<int>& k_range,
                                           const Grid& grid) {
  if (alpha < 0.0 || rho < 0.0 || rho > std::min(alpha, 1.0))
    if (!(alpha == 0.0 && rho == 0.0))
      throw std::domain_error("check_commutator_scaling: need 0 <= rho <= min(alpha, 1)");
  if (j_range.empty() || k_range.empty())
    throw std::domain_error("check_commutator_scaling: empty sweep range");

  PositionWeight weight;
  weight.abs_power = alpha;
  const double xi_max = M_PI / grid.dx();
  CommutatorScaling out;

  std::map<std::pair<int, int>, double> norms;
  std::vector<int> js, ks;
  for (int j : j_range) {
    if (std::ldexp(1.0, j + 1) > grid.half_width) { ++out.excluded; continue; }
    js.push_back(j);
  }
  for (int k : k_range) {
    if (std::ldexp(1.0, k + 1) > xi_max) { ++out.excluded; continue; }
    ks.push_back(k);
  }
  if (static_cast<int>(js.size()) < 2 || static_cast<int>(ks.size()) < 2)
    throw std::domain_error("check_commutator_scaling: sweep unresolvable on this grid");
  std::sort(js.begin(), js.end());
  std::sort(ks.begin(), ks.end());

  for (int j : js) {
    const OperatorSpec left(
        PositionWeight::cutoff(factor(Variant::lesssim, std::ldexp(1.0, j))));
    const OperatorSpec right(PositionWeight::cutoff(
        factor(Variant::at, std::ldexp(1.0, j), CutoffFactor::Axis::plus)));
    for (int k : ks) {
      const OperatorSpec pk(MultiplierSpec::cutoff(factor(Variant::at, std::ldexp(1.0, k))));
      const Eigen::MatrixXcd wm =
          materialize(left * OperatorSpec(weight) * pk * right, grid).matrix;
      const Eigen::MatrixXcd mw =
          materialize(left * pk * OperatorSpec(weight) * right, grid).matrix;
      norms[{j, k}] = operator_norm(DenseOperator{grid, OperatorSpec{}, wm - mw});
    }
  }

  double peak = 0.0;
  for (const auto& [jk, v] : norms) peak = std::max(peak, v);
  if (peak <= 1e-12) {  // constant weight: the commutator vanishes identically
    out.max_constant = 0.0;
    out.pass = true;
    return out;
  }

  // the measured family collapses onto norm = 2^{-rho k} f(j+k) with f
  // saturating slowly (rescaling x -> 2^j x trades j for k), so full-range
  // least-squares marginals sit in the preasymptotic growth of f. The
  // asymptotic exponent is read off the far corner instead: the last
  // dyadic step at the largest kept value of the other index.
  const int j_hi = js.back(), k_hi = ks.back();
  std::vector<double> ja, jn, ka, kn;
  for (int j : js) { ja.push_back(std::ldexp(1.0, j)); jn.push_back(norms[{j, k_hi}]); }
  for (int k : ks) { ka.push_back(std::ldexp(1.0, k)); kn.push_back(norms[{j_hi, k}]); }
  out.j_fit = fit_decay(ja, jn);
  out.j_fit.threshold = alpha - rho;
  out.k_fit = fit_decay(ka, kn);
  out.k_fit.threshold = -rho;
  const int nj = static_cast<int>(js.size()), nk = static_cast<int>(ks.size());
  out.j_step = std::log2(jn[nj - 1] / jn[nj - 2]) / (js[nj - 1] - js[nj - 2]);
  out.k_step = std::log2(kn[nk - 1] / kn[nk - 2]) / (ks[nk - 1] - ks[nk - 2]);
  out.j_fit.pass = out.j_step <= (alpha - rho) + 0.2;
  out.k_fit.pass = out.k_step <= -rho + 0.2;

  const auto model = [&](int j, int k) {
    return std::pow(2.0, (alpha - rho) * j) * std::pow(2.0, -rho * k);
  };
  const double anchor = norms[{j_hi, k_hi}] / model(j_hi, k_hi);
  for (const auto& [jk, v] : norms)
    out.max_constant = std::max(out.max_constant, v / (model(jk.first, jk.second) * anchor));
  out.pass = out.j_fit.pass && out.k_fit.pass && out.max_constant <= 10.0;
  return out;
}

SummabilityReport check_inout_gain(int j_max, const MicrolocParams& params,
                                   const Field& source, double sigma, double t, int n,
                                   const Grid& grid) {
  check_params(params);
  if (j_max < 2) throw std::domain_error("check_inout_gain: need j_max >= 2");
  if (!(t > 0.0)) throw std::domain_error("check_inout_gain: need t > 0");
  if (n < 1) throw std::domain_error("check_inout_gain: need n >= 1");
  if (source.grid.n != grid.n || source.grid.half_width != grid.half_width)
    throw std::invalid_argument("check_inout_gain: source must live on the bench grid");

  SummabilityReport rep;
  MultiplierSpec duh;
  duh.duhamel = t;  // exact integral_0^t of the free flow against a fixed source
  const Field integral = apply_multiplier(duh, in_rep(source, Rep::position));
  for (int j = 0; j <= j_max; ++j) {
    rep.shells.push_back(j);
    const double term =
        weighted_norm(proj(ProjKind::in, j, params, integral), n * params.theta, n, 0.0);
    rep.terms.push_back(term);
    rep.partial_full += term;
    if (j <= j_max / 2) rep.partial_half += term;
  }
  for (int m = 0; m <= n; ++m)
    rep.rhs += weighted_norm(source, sigma + m * params.theta, m, 0.0);

  for (int J = 1; J <= 6; ++J) {
    DenseOperator fam = materialize(
        [&](const Field& f) {
          Field x = in_rep(apply_multiplier(MultiplierSpec::bessel_power(-1.0), f),
                           Rep::position);
          Field acc(grid, Rep::position);
          for (int j = 0; j < J; ++j) acc = acc + proj(ProjKind::in, j, params, x);
          acc = acc + proj_tail(ProjKind::in, J, params, x);
          return apply_multiplier(MultiplierSpec::bessel_power(1.0), acc);
        },
        grid);
    rep.family_h1.push_back(operator_norm(fam));
  }
  const double flo = *std::min_element(rep.family_h1.begin(), rep.family_h1.end());
  const double fhi = *std::max_element(rep.family_h1.begin(), rep.family_h1.end());
  const bool family_ok = fhi / flo < 1.2;
  const bool tail_ok = rep.partial_full == 0.0
                           ? true
                           : (rep.partial_full - rep.partial_half) <= 0.1 * rep.partial_full;
  rep.pass = family_ok && tail_ok;
  return rep;
}

nlohmann::json run_lemma_suite(const Grid& grid, std::uint64_t seed) {
  // seed 0 keeps the built-in benchmark draws; otherwise split one stream
  // into independent per-check seeds (splitmix64 finalizer)
  const auto derive = [seed](std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * salt;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t sym_seed = seed == 0 ? 20260825u : derive(1);
  const std::uint64_t weight_seed = seed == 0 ? 314159u : derive(2);

  json out;
  out["grid"] = {{"points", grid.n}, {"half_width", grid.half_width}};
  out["seed"] = seed;
  bool all = true;
  // the kernel horizon needs room: no passed frequency may lap the box
  const Grid wide(512, 256.0);
  // the dispersive checks run in rescaled variables (unit flow time), so what
  // they need instead is frequency headroom for the floor t^{1/2-delta}
  const Grid rescale(512, 25.6);
  const std::vector<double> t_disp{16.0, 32.0, 64.0, 128.0, 256.0, 512.0};

  {
    // the asymptotic rate here is faster than any power, but the high
    // integration-by-parts orders that carry it dominate only at enormous
    // times; on the reachable horizon the verdict combines four signals:
    // the fitted slope clears the first-order rate, the final dyadic step
    // is at least second-order, the windowed slopes steepen monotonically
    // (no fixed power law fits), and every sample obeys the explicit
    // second-order budget t^{(a+b)/2 - 2(1-2d)} with constant one.
    DecayFit fit = check_space_freq_decay(0.4, 0.4, 0.2, 1.4, t_disp, rescale);
    const double last_step =
        std::log(fit.norms.back() / fit.norms[fit.norms.size() - 2]) /
        std::log(t_disp.back() / t_disp[t_disp.size() - 2]);
    bool budget_ok = true;
    for (size_t i = 0; i < t_disp.size(); ++i)
      budget_ok = budget_ok && fit.norms[i] <= std::pow(t_disp[i], 0.4 - 2.0 * 0.6);
    bool steepening = true;
    for (size_t i = 0; i + 3 < t_disp.size(); ++i) {
      const double s0 = std::log(fit.norms[i + 2] / fit.norms[i]) /
                        std::log(t_disp[i + 2] / t_disp[i]);
      const double s1 = std::log(fit.norms[i + 3] / fit.norms[i + 1]) /
                        std::log(t_disp[i + 3] / t_disp[i + 1]);
      steepening = steepening && s1 < s0;
    }
    const double unit = norm_of(sandwich_left(1.0, 1.0, 1.0, rescale) *
                                    OperatorSpec(PositionWeight::cutoff(
                                        factor(Variant::le, 1.0))),
                                rescale);
    json entry = fit_to_json(fit);
    entry["id"] = "space_freq_decay";
    entry["params"] = {{"alpha", 0.4}, {"beta", 0.4}, {"delta", 0.2}, {"M", 1.4}};
    entry["last_step"] = last_step;
    entry["budget_exponent"] = 0.4 - 2.0 * 0.6;
    entry["budget_ok"] = budget_ok;
    entry["steepening"] = steepening;
    entry["norm_at_t1"] = unit;
    entry["pass"] = fit.pass && last_step <= -2.0 && budget_ok && steepening &&
                    unit <= 1.0 + 1e-9;
    all = all && entry["pass"].get<bool>();
    out["checks"].push_back(entry);
  }
  {
    DecayFit fit = check_weighted_decay(0.4, 0.4, 0.2, 3.0, t_disp, rescale);
    json entry = fit_to_json(fit);
    entry["id"] = "weighted_decay";
    entry["params"] = {{"alpha", 0.4}, {"beta", 0.4}, {"delta", 0.2}, {"sigma", 3.0}};
    all = all && fit.pass;
    out["checks"].push_back(entry);
  }
  {
    DecayFit fit = check_kernel_decay(3, 0, 0, {16.0, 32.0, 64.0}, wide);
    json entry = fit_to_json(fit);
    entry["id"] = "kernel_decay";
    entry["params"] = {{"j", 3}, {"k", 0}, {"m", 0}};
    double hard = 0.0;  // the multiplier branch: norms against 2^{mk} = 1
    for (double v : fit.norms) hard = std::max(hard, v);
    entry["hard_branch_max"] = hard;
    entry["pass"] = fit.pass && hard <= 1.0 + 1e-6;
    all = all && entry["pass"].get<bool>();
    out["checks"].push_back(entry);
  }
  {
    json entry;
    entry["id"] = "support_separation";
    const double base = check_support_separation(4, 0, 1, grid);
    const double step_j = check_support_separation(5, 0, 1, grid);
    const double step_k = check_support_separation(4, 1, 1, grid);
    entry["norm_j4_k0"] = base;
    entry["norm_j5_k0"] = step_j;
    entry["norm_j4_k1"] = step_k;
    entry["ratio_j"] = step_j / base;
    entry["ratio_k"] = step_k / base;
    entry["threshold"] = 0.5;  // one integration-by-parts order per step
    entry["pass"] = step_j <= 0.5 * base && step_k <= 0.5 * base;
    all = all && entry["pass"].get<bool>();
    out["checks"].push_back(entry);
  }
  {
    json entry;
    entry["id"] = "symmetrization";
    const double resid = check_symmetrization(16, 100, sym_seed);
    entry["params"] = {{"dim", 16}, {"trials", 100}, {"seed", sym_seed}};
    entry["max_residual"] = resid;
    entry["threshold"] = 1e-12;
    entry["pass"] = resid <= 1e-12;
    all = all && entry["pass"].get<bool>();
    out["checks"].push_back(entry);
  }
  {
    json entry;
    entry["id"] = "weight_inequality";
    entry["threshold"] = 4.0;
    entry["params"] = {{"samples", 10000}, {"seed", weight_seed}};
    bool ok = true;
    for (auto [a, r] : std::vector<std::pair<double, double>>{
             {0.5, 0.5}, {1.0, 1.0}, {1.5, 1.0}, {0.8, 0.45}}) {
      const double ratio = check_weight_inequalities(a, r, 10000, weight_seed);
      entry["ratios"].push_back({{"alpha", a}, {"rho", r}, {"max_ratio", ratio}});
      ok = ok && ratio <= 4.0;
    }
    entry["pass"] = ok;
    all = all && ok;
    out["checks"].push_back(entry);
  }
  {
    // finer box: the k sweep needs frequencies through 2^4
    Grid fine(512, 32.0);
    CommutatorScaling cs =
        check_commutator_scaling(1.0, 1.0, {0, 1, 2, 3, 4}, {0, 1, 2, 3}, fine);
    json entry;
    entry["id"] = "commutator_scaling";
    entry["params"] = {{"alpha", 1.0}, {"rho", 1.0}};
    entry["j_fit"] = fit_to_json(cs.j_fit);
    entry["k_fit"] = fit_to_json(cs.k_fit);
    entry["j_step"] = cs.j_step;
    entry["k_step"] = cs.k_step;
    entry["max_constant"] = cs.max_constant;
    entry["excluded"] = cs.excluded;
    entry["pass"] = cs.pass;
    all = all && cs.pass;
    out["checks"].push_back(entry);
  }
  {
    // band-limited on the half-unit lattice: the sigma-weighted rhs would
    // otherwise read Nyquist ringing of the sampled profile, not decay
    Field source = sample_position(grid, [](double x) {
      return std::exp(cd(-x * x / 8.0, 0.6 * x));
    });
    SummabilityReport sr = check_inout_gain(10, MicrolocParams{}, source, 3.0, 8.0, 1, grid);
    json entry;
    entry["id"] = "inout_gain";
    entry["params"] = {{"j_max", 10}, {"sigma", 3.0}, {"t", 8.0}, {"n", 1}};
    entry["terms"] = sr.terms;
    entry["partial_half"] = sr.partial_half;
    entry["partial_full"] = sr.partial_full;
    entry["rhs"] = sr.rhs;
    entry["family_h1"] = sr.family_h1;
    entry["pass"] = sr.pass;
    all = all && sr.pass;
    out["checks"].push_back(entry);
  }
  out["pass"] = all;
  return out;
}

void write_lemma_report(const nlohmann::json& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_lemma_report: cannot open " + path);
  out << report.dump(2) << "\n";
  if (!out) throw std::runtime_error("write_lemma_report: write failed for " + path);
}

}  // namespace specloc
