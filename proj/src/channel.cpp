/// \file channel.cpp
/// Free-channel projection, Cook checkpoint series, and the weakly-bound /
/// low-frequency / outgoing split. All flat-frame windows are assembled from
/// one shared frequency-space snapshot per time to keep transform counts low.

#include "specloc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "specloc/cutoffs.hpp"

namespace specloc {
namespace {

using cutoffs::Variant;

// S(t) at a point: 1 - F_{>= t^alpha}(|x|), the exact complement of the
// outer-region cutoff (equals the <=-profile at half the scale).
double spatial_window(double t_alpha, double x) {
  return 1.0 - cutoffs::eval(Variant::ge, t_alpha, std::abs(x), 0);
}

// F_{>= t^{-delta}}(|xi|), the frequency floor G(t).
MultiplierSpec freq_floor(double t, double delta) {
  CutoffFactor f;
  f.kind = Variant::ge;
  f.scale = std::pow(t, -delta);
  return MultiplierSpec::cutoff(f);
}

// d_s G(s) as a multiplier: F'_{>= s^{-delta}}(|xi|) |xi| delta s^{delta-1}.
MultiplierSpec freq_floor_ds(double s, double delta) {
  CutoffFactor f;
  f.kind = Variant::ge;
  f.scale = std::pow(s, -delta);
  f.deriv = 1;
  MultiplierSpec m = MultiplierSpec::cutoff(f);
  m.abs_power = 1.0;
  m.gain = delta * std::pow(s, delta - 1.0);
  return m;
}

double h1_norm(const Field& f) { return weighted_norm(f, 0.0, 0, 1.0); }

// Flat-frame snapshot in frequency representation: e^{-i t xi^2} FFT u(t).
Field flat_frequency(const Trajectory& traj, int idx) {
  Field uf = to_frequency(traj.at(idx));
  return apply_multiplier(MultiplierSpec::free_flow(-traj.times[idx]), uf);
}

// Omega(t) = S(t) G(t) psi(t) in position representation, from the
// frequency-side flat frame.
Field omega_field(const ChannelParams& p, double t, const Field& psif) {
  Field g = to_position(apply_multiplier(freq_floor(t, p.delta), psif));
  const double ta = std::pow(t, p.alpha);
  scale_position(g, [ta](double x) { return spatial_window(ta, x); });
  return g;
}

}  // namespace

void check_params(const ChannelParams& p) {
  if (!(p.alpha > 0.0 && p.alpha < 1.0))
    throw std::domain_error("channel: alpha must lie in (0,1)");
  const double cap = std::min(0.5, 1.0 - p.alpha);
  if (!(p.delta > 0.0 && p.delta < cap))
    throw std::domain_error("channel: delta must lie in (0, min(1/2, 1-alpha))");
}

Field apply_Jfree(const ChannelParams& p, double t, const Field& f) {
  check_params(p);
  if (!(t > 0.0)) throw std::domain_error("apply_Jfree: need t > 0");
  // Right-to-left: frequency floor, pull to the flat frame, spatial window,
  // push back. Two contractions between unitaries, hence norm <= 1.
  Field g = apply_multiplier(freq_floor(t, p.delta), f);
  g = in_rep(free_propagate(g, -t), Rep::position);
  const double ta = std::pow(t, p.alpha);
  scale_position(g, [ta](double x) { return spatial_window(ta, x); });
  g = free_propagate(g, t);
  return in_rep(g, f.rep);
}

CookSeries cook_wave_operator(const ChannelParams& p, const Trajectory& traj) {
  check_params(p);
  if (traj.count() == 0) throw std::runtime_error("cook_wave_operator: empty trajectory");
  const double horizon = traj.last_time();

  std::vector<double> cps;
  for (double t = 1.0; t <= horizon * (1.0 + 1e-12); t *= 2.0) cps.push_back(t);
  if (static_cast<int>(cps.size()) < 4)
    throw std::runtime_error(
        "cook_wave_operator: horizon too short for a checkpoint series (need >= 8)");
  if (horizon - cps.back() > 1e-9 * horizon) cps.push_back(horizon);

  CookSeries series(traj.grid);
  series.params = p;
  for (double t : cps) {
    const int idx = traj.index_of(t);
    Field psif = flat_frequency(traj, idx);
    series.checkpoint_times.push_back(traj.times[idx]);
    series.omega.push_back(omega_field(p, traj.times[idx], psif).data);
  }
  for (std::size_t k = 1; k < series.omega.size(); ++k) {
    Field d(traj.grid, Rep::position, series.omega[k] - series.omega[k - 1]);
    series.increment_h1.push_back(h1_norm(d));
  }
  series.u_plus = series.omega.back();

  // Cook integrand norms over the snapshot times where the scales are
  // nondegenerate.
  for (int i = 0; i < traj.count(); ++i) {
    const double s = traj.times[i];
    if (s < 1.0 - 1e-9) continue;
    const double sa = std::pow(s, p.alpha);
    Field psif = flat_frequency(traj, i);

    // || S G e^{+is Lap} (V u)(s) ||_{H^1}
    Field vu = traj.at(i);
    const Eigen::VectorXd prof = potential_profile(traj.potential, traj.grid, s);
    vu.data.array() *= prof.array();
    Field vuf = apply_multiplier(MultiplierSpec::free_flow(-s), to_frequency(vu));
    series.potential_term.push_back(h1_norm(omega_field(p, s, vuf)));

    // || (d_s S) G psi + S (d_s G) psi ||_{H^1} with the scale derivatives
    //   d_s S = + alpha |x| s^{-1-alpha} F'_{>= s^alpha}(|x|)
    //   d_s G =   delta |xi| s^{delta-1} F'_{>= s^{-delta}}(|xi|)
    Field ga = to_position(apply_multiplier(freq_floor(s, p.delta), psif));
    const double c_s = p.alpha * std::pow(s, -1.0 - p.alpha);
    scale_position(ga, [sa, c_s](double x) {
      return c_s * std::abs(x) * cutoffs::eval(Variant::ge, sa, std::abs(x), 1);
    });
    Field gb = to_position(apply_multiplier(freq_floor_ds(s, p.delta), psif));
    scale_position(gb, [sa](double x) { return spatial_window(sa, x); });
    series.restriction_term.push_back(h1_norm(ga + gb));
    series.integrand_times.push_back(s);
  }
  return series;
}

void write_cook_csv(const CookSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_cook_csv: cannot open " + path);
  out << "t,increment_H1,potential_term_norm,restriction_term_norm\n";
  char buf[512];
  for (std::size_t i = 0; i < series.integrand_times.size(); ++i) {
    const double t = series.integrand_times[i];
    std::string inc;
    for (std::size_t k = 1; k < series.checkpoint_times.size(); ++k) {
      if (std::abs(series.checkpoint_times[k] - t) <= 1e-9 * std::max(1.0, t)) {
        std::snprintf(buf, sizeof buf, "%.17g", series.increment_h1[k - 1]);
        inc = buf;
        break;
      }
    }
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g\n", t, inc.c_str(),
                  series.potential_term[i], series.restriction_term[i]);
    out << buf;
  }
  if (!out) throw std::runtime_error("write_cook_csv: write failed for " + path);
}

WeaklyBoundSplit split_weakly_bound(const ChannelParams& p, const Trajectory& traj,
                                    double t) {
  check_params(p);
  if (!(t > 1.0)) throw std::domain_error("split_weakly_bound: need t > 1");
  const int idx = traj.index_of(t);
  const double tt = traj.times[idx];
  Field u = traj.at(idx);

  Field psif = flat_frequency(traj, idx);
  Field psi = to_position(psif);
  const double ta = std::pow(tt, p.alpha);

  // v: the outer spatial piece of the flat frame, pushed back down.
  Field vflat = psi;
  scale_position(vflat, [ta](double x) {
    return cutoffs::eval(Variant::ge, ta, std::abs(x), 0);
  });

  // u_low: frequency complement first (psi - G psi), then the spatial window,
  // mirroring the factor order inside J_free so the three pieces cancel
  // exactly: (psi - S G psi) = S (psi - G psi) + (1 - S) psi pointwise.
  Field lowflat = psi - to_position(apply_multiplier(freq_floor(tt, p.delta), psif));
  scale_position(lowflat, [ta](double x) { return spatial_window(ta, x); });

  WeaklyBoundSplit out{
      u - apply_Jfree(p, tt, u),
      in_rep(free_propagate(lowflat, tt), Rep::position),
      in_rep(free_propagate(vflat, tt), Rep::position),
  };
  return out;
}

}  // namespace specloc
