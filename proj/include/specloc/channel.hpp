#pragma once

/// \file channel.hpp
/// Free-channel projection J_free(t), the free-channel wave operator computed
/// by checkpointed strong limits (Cook's method), and the split
/// u = J_free u + u_wb with u_wb = u_low + v.
///
/// Cutoff conventions that make the algebra exact on the grid: the spatial
/// factor is S(t) = 1 - F_{>= t^alpha}(|x|) (the exact complement, which is
/// the <=-profile at half the scale) and the low-frequency factor is
/// 1 - F_{>= t^{-delta}}(|D|); in u_low the frequency complement acts before
/// the spatial factor, mirroring the factor order inside J_free. With these
/// choices u_wb = u_low + v holds to roundoff, not merely asymptotically.

#include <string>
#include <vector>

#include "specloc/propagator.hpp"
#include "specloc/spectral.hpp"

namespace specloc {

struct ChannelParams {
  double alpha = 0.4;  // spatial window |x| <~ t^alpha
  double delta = 0.2;  // frequency floor |xi| >~ t^{-delta}
};

/// Enforces 0 < alpha < 1 and 0 < delta < min(1/2, 1 - alpha).
void check_params(const ChannelParams& p);

/// J_free(t) f = e^{-it Lap} S(t) e^{+it Lap} F_{>= t^{-delta}}(|D|) f,
/// applied right-to-left. A composition of contractions and unitaries, so
/// norm <= 1. Domain error for t <= 0.
Field apply_Jfree(const ChannelParams& p, double t, const Field& f);

struct CookSeries {
  Grid grid;
  ChannelParams params;
  /// Dyadic checkpoints 2^k plus the horizon; omega[k] is the flat-frame
  /// approximant Omega(t_k) = S G (e^{+it Lap} u(t)) in position data.
  std::vector<double> checkpoint_times;
  std::vector<Eigen::VectorXcd> omega;
  /// increment_h1[k] = || Omega(t_{k+1}) - Omega(t_k) ||_{H^1}.
  std::vector<double> increment_h1;
  Eigen::VectorXcd u_plus;  // Omega at the horizon; the scattering datum
  /// Cook integrand norms at the snapshot times >= 1 (scales degenerate
  /// below): the potential term ||S G e^{+is Lap}(V u)(s)||_{H^1} and the
  /// channel-restriction term ||(d_s S) G psi + S (d_s G) psi||_{H^1}.
  std::vector<double> integrand_times;
  std::vector<double> potential_term;
  std::vector<double> restriction_term;

  explicit CookSeries(const Grid& g) : grid(g) {}
  Field omega_at(int k) const { return Field(grid, Rep::position, omega.at(k)); }
};

/// Runs the checkpoint series and integrand norms over a stored trajectory.
/// Insufficient-data error unless the horizon covers >= 4 dyadic checkpoints.
CookSeries cook_wave_operator(const ChannelParams& p, const Trajectory& traj);

/// CSV export: t, increment_H1, potential_term_norm, restriction_term_norm;
/// one row per integrand time, increment filled on checkpoint rows.
void write_cook_csv(const CookSeries& series, const std::string& path);

struct WeaklyBoundSplit {
  Field u_wb;   // u(t) - J_free(t) u(t)
  Field u_low;  // e^{-it Lap} S(t) (1 - F_{>= t^{-delta}}(|D|)) psi(t)
  Field v;      // e^{-it Lap} F_{>= t^alpha}(|x|) psi(t)
};

/// The split at one time; u_wb = u_low + v to roundoff. Domain error for
/// t <= 1 where the scale separation degenerates.
WeaklyBoundSplit split_weakly_bound(const ChannelParams& p, const Trajectory& traj,
                                    double t);

}  // namespace specloc
