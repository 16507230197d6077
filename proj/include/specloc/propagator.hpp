#pragma once

/// \file propagator.hpp
/// Strang-split time evolution of i d_t u = (-Laplacian + V) u on the periodic
/// grid, free propagation, snapshot storage with boundary-mass monitoring,
/// running Duhamel accumulators, and observable expectations.
///
/// Flow conventions, fixed once: the free flow is e^{-it Laplacian} with
/// spectral factor e^{+i t xi^2}; the interacting flow solves
/// d_t u = i(-Laplacian + V)u, so a static well -sech^2 well known to have
/// eigenvalue -1 evolves its bound state as e^{-it}.

#include <string>
#include <vector>

#include "specloc/operator_spec.hpp"
#include "specloc/potential.hpp"
#include "specloc/spectral.hpp"

namespace specloc {

struct EvolutionConfig {
  double dt = 0.01;
  double t_final = 200.0;
  int snapshot_stride = 10;       // store every m-th step
  bool accumulate_duhamel = true; // cache the forward Duhamel accumulator
  double boundary_warn = 1e-6;    // relative boundary-mass warning threshold
  bool skip_hypothesis_check = false;
};

/// Time-ordered snapshots of one evolution. Immutable once built; all fields
/// are stored in position representation.
struct Trajectory {
  Grid grid;
  PotentialSpec potential;
  EvolutionConfig config;
  Eigen::VectorXcd initial;
  std::vector<double> times;               // strictly increasing, starts at 0
  std::vector<Eigen::VectorXcd> snaps;     // u(times[i])
  std::vector<Eigen::VectorXcd> duhamel;   // flat-frame accumulator, frequency rep
  std::vector<double> boundary;            // relative boundary mass per snapshot
  std::vector<std::string> warnings;

  explicit Trajectory(const Grid& g) : grid(g) {}

  int count() const { return static_cast<int>(times.size()); }
  double last_time() const { return times.back(); }
  /// Snapshot index of time t (tolerant nearest match); range error otherwise.
  int index_of(double t) const;
  Field at(int i) const { return Field(grid, Rep::position, snaps.at(i)); }
  Field at_time(double t) const { return at(index_of(t)); }
};

/// e^{-i tau Laplacian} f: exact spectral application of e^{+i tau xi^2}.
Field free_propagate(const Field& f, double tau);

/// Flat-frame snapshot e^{+i t_i Laplacian} u(t_i) in position representation.
Field flat_frame(const Trajectory& traj, int snap_index);

/// Strang evolution: u <- e^{i(dt/2)V(t+dt/2)} e^{-i dt Laplacian}-conjugate
/// e^{i(dt/2)V(t+dt/2)} u per step. Every factor is unitary, so the L2 norm
/// is conserved to roundoff. Unless skipped, the potential's decay/symbol
/// hypotheses are spot-validated first. Throws on non-finite data (with the
/// step index); boundary-mass excursions are recorded as warnings.
Trajectory evolve(const Field& u0, const PotentialSpec& V, const EvolutionConfig& cfg);

/// integral_0^t e^{-i(t-s) Laplacian} (V u)(s) ds at a snapshot time, read
/// from the cached running accumulator (trapezoidal in dt). Range error off
/// the snapshot set; logic error when accumulation was disabled.
Field duhamel_forward(const Trajectory& traj, double t);

/// The two backward-in-time integrals over [t, T_hor] behind the outgoing
/// representation, both in the flat frame e^{+i s Laplacian}:
///   potential_part = integral F_{>= s^alpha}(|x|) e^{i s Laplacian}(Vu)(s) ds
///   boundary_part  = integral (alpha |x| / s^{1+alpha}) F'_{>= s^alpha}(|x|) psi(s) ds
/// with psi(s) the flat-frame snapshot; trapezoidal over stored snapshots.
/// tail_bound estimates the neglected (T_hor, infinity) piece of the
/// potential part from the validated decay sigma.
struct BackwardDuhamel {
  Field potential_part;
  Field boundary_part;
  double tail_bound = 0.0;
};
BackwardDuhamel duhamel_backward(const Trajectory& traj, double t, double alpha);

/// Re <B u(t), u(t)> at a snapshot time.
double observable_expectation(const OperatorSpec& B, const Trajectory& traj, double t);

/// Binary trajectory file: text header (grid, potential, config, times,
/// warnings), then initial datum and snapshots as raw little-endian
/// complex64 (pairs of float32). Reload is therefore float32-accurate.
void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

}  // namespace specloc
