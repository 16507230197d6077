/// \file decomposition.cpp
/// Shell projectors and the layered assembly of the outgoing piece. The
/// engine below rebuilds v from snapshot data in exact forward/backward
/// telescopes, walks the trajectory once per layer (backward, with running
/// drift/sweep accumulators), and runs one forward quadrature pass between
/// layers for the projected Duhamel content of the next iterate.

#include "specloc/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "specloc/cutoffs.hpp"

namespace specloc {
namespace {

using cutoffs::Variant;
using cd = std::complex<double>;

double dyadic(int j) { return std::ldexp(1.0, j); }

// F_{>= scale}(|x|) sampled on the grid.
Eigen::VectorXd outer_weight(const Grid& g, double scale) {
  Eigen::VectorXd w(g.n);
  for (int i = 0; i < g.n; ++i)
    w[i] = cutoffs::eval(Variant::ge, scale, std::abs(g.x(i)), 0);
  return w;
}

Field make_field(const Grid& g, const Eigen::VectorXcd& data) {
  return Field(g, Rep::position, data);
}

Field transport(const Grid& g, const Eigen::VectorXcd& flat, double t) {
  return in_rep(free_propagate(make_field(g, flat), t), Rep::position);
}

// Geometry of one projector level: spatial kind/scale, frequency floor.
struct Level {
  Variant space_kind;
  double space_scale;
  double freq_scale;
  bool axis_split;  // false only for the innermost level (|D| axis, no out)
};

Level shell_level(int j, const MicrolocParams& p) {
  if (j == 0) return {Variant::le, 1.0, 1.0, false};
  return {Variant::at, dyadic(j), std::pow(2.0, -p.theta * j), true};
}

Level tail_level(int J, const MicrolocParams& p) {
  return {Variant::ge, dyadic(J), std::pow(2.0, -p.theta * J), true};
}

// All three projections of one level, sharing the sign-projected frequency
// products so that in + out + low recombines to (spatial weight) * f
// pointwise, with the low kind carrying the exact complement (and with it
// the Nyquist mode, which the sign-projected factors drop).
struct ProjTriple {
  Field in_part, out_part, low_part;
};

ProjTriple apply_level(const Level& lv, const Field& f) {
  const Grid& g = f.grid;
  const Field fpos = in_rep(f, Rep::position);
  ProjTriple t{Field(g, Rep::position), Field(g, Rep::position), Field(g, Rep::position)};

  if (!lv.axis_split) {
    CutoffFactor gc;
    gc.kind = Variant::ge;
    gc.scale = lv.freq_scale;  // |D| axis
    const Field gf = in_rep(apply_multiplier(MultiplierSpec::cutoff(gc), fpos),
                            Rep::position);
    for (int i = 0; i < g.n; ++i) {
      const double w = cutoffs::eval(lv.space_kind, lv.space_scale, std::abs(g.x(i)), 0);
      t.in_part.data[i] = w * gf.data[i];
      t.low_part.data[i] = w * (fpos.data[i] - gf.data[i]);
    }
    return t;  // out stays zero
  }

  CutoffFactor gp;
  gp.kind = Variant::ge;
  gp.scale = lv.freq_scale;
  gp.axis = CutoffFactor::Axis::plus;
  CutoffFactor gm = gp;
  gm.axis = CutoffFactor::Axis::minus;
  const Field gpf = in_rep(apply_multiplier(MultiplierSpec::cutoff(gp), fpos),
                           Rep::position);
  const Field gmf = in_rep(apply_multiplier(MultiplierSpec::cutoff(gm), fpos),
                           Rep::position);
  for (int i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    const double wp = cutoffs::eval(lv.space_kind, lv.space_scale, x, 0);
    const double wm = cutoffs::eval(lv.space_kind, lv.space_scale, -x, 0);
    t.in_part.data[i] = wp * gpf.data[i] + wm * gmf.data[i];
    t.out_part.data[i] = wp * gmf.data[i] + wm * gpf.data[i];
    t.low_part.data[i] = (wp + wm) * (fpos.data[i] - gpf.data[i] - gmf.data[i]);
  }
  return t;
}

Field pick(ProjTriple&& t, ProjKind kind) {
  switch (kind) {
    case ProjKind::in: return std::move(t.in_part);
    case ProjKind::out: return std::move(t.out_part);
    default: return std::move(t.low_part);
  }
}

// ---------------------------------------------------------------------------
// Assembly engine.
// ---------------------------------------------------------------------------

// Flat-frame data captured at one backward-sweep target.
struct TargetData {
  int idx = -1;
  double t = 0.0;
  Eigen::VectorXcd psi;   // e^{+it Lap} u(t)
  Eigen::VectorXcd wsum;  // sum of window-complement * flat increments
  Eigen::VectorXcd rsum;  // sum of window-sweep * flat snapshots
};

// The exact forward/backward closed forms of v at one time.
struct Pieces {
  Field v;      // e^{-it Lap} F_{>=t^a}(|x|) psi(t)
  Field n1;     // forward endpoint: free flow of the outer initial datum
  Field idf;    // u(t) - free flow of the datum (the interaction content)
  Field iwf;    // forward window drift
  Field binit;  // backward endpoint: free flow of the outer horizon datum
  Field idb;    // horizon-minus-now flat difference, transported
  Field r;      // backward window sweep
  Field iwb;    // backward window drift
};

struct Engine {
  const Trajectory& traj;
  MicrolocParams p;
  Grid g;
  int last;  // index of the horizon snapshot
  Eigen::VectorXcd u0;
  Eigen::VectorXcd psi_hor;  // flat frame at the horizon
  Eigen::VectorXd h_hor;     // outer window at the horizon

  std::vector<int> store_idx;                // decimated snapshot indices
  std::vector<double> store_times;
  std::vector<Eigen::VectorXcd> store_prev;  // u_loc of the previous layer

  std::map<int, Eigen::VectorXcd> q_acc;  // snapshot idx -> flat integral
  Eigen::VectorXcd q_total;
  bool have_q = false;

  Engine(const Trajectory& tr, const MicrolocParams& params)
      : traj(tr), p(params), g(tr.grid), last(tr.count() - 1) {
    check_params(p);
    if (tr.count() < 2) throw std::runtime_error("decomposition: trajectory has no span");
    u0 = tr.initial;
    psi_hor = flat_frame(tr, last).data;
    h_hor = outer_weight(g, std::pow(tr.times[last], p.channel.alpha));
  }

  // Decimated store grid: every ~unit of time from the first snapshot >= 1,
  // always including the horizon so interpolation covers the whole span.
  void build_store_grid() {
    store_idx.clear();
    store_times.clear();
    int i0 = -1;
    for (int i = 0; i < traj.count(); ++i)
      if (traj.times[i] >= 1.0 - 1e-9) { i0 = i; break; }
    if (i0 < 0 || i0 == last)
      throw std::runtime_error("decomposition: snapshots do not cover [1, horizon]");
    const double spacing = traj.times[i0 + 1] - traj.times[i0];
    const int step = std::max(1, static_cast<int>(std::llround(1.0 / spacing)));
    for (int i = i0; i <= last; i += step) store_idx.push_back(i);
    if (store_idx.back() != last) store_idx.push_back(last);
    for (int i : store_idx) store_times.push_back(traj.times[i]);
  }

  Eigen::VectorXcd interp_store(double s) const {
    const auto hi = std::upper_bound(store_times.begin(), store_times.end(), s);
    if (hi == store_times.begin()) return store_prev.front();
    if (hi == store_times.end()) return store_prev.back();
    const std::size_t b = static_cast<std::size_t>(hi - store_times.begin());
    const std::size_t a = b - 1;
    const double w = (s - store_times[a]) / (store_times[b] - store_times[a]);
    return store_prev[a] + w * (store_prev[b] - store_prev[a]);
  }

  // Backward sweep over [min(targets), horizon] with running accumulators;
  // calls sink(target) at every requested index, in decreasing time order.
  template <class Sink>
  void sweep(const std::vector<int>& targets, Sink&& sink) const {
    const int lo = *std::min_element(targets.begin(), targets.end());
    std::vector<char> wanted(static_cast<std::size_t>(last) + 1, 0);
    for (int i : targets) wanted.at(static_cast<std::size_t>(i)) = 1;

    TargetData td;
    td.wsum = Eigen::VectorXcd::Zero(g.n);
    td.rsum = Eigen::VectorXcd::Zero(g.n);
    Eigen::VectorXcd psi_next = psi_hor;
    Eigen::VectorXd h_next = h_hor;
    if (wanted[static_cast<std::size_t>(last)]) {
      td.idx = last;
      td.t = traj.times[last];
      td.psi = psi_next;
      sink(td);
    }
    for (int m = last - 1; m >= lo; --m) {
      const Eigen::VectorXcd psi_m = flat_frame(traj, m).data;
      const Eigen::VectorXd h_m = outer_weight(g, std::pow(traj.times[m], p.channel.alpha));
      for (int i = 0; i < g.n; ++i) {
        td.wsum[i] += (1.0 - h_m[i]) * (psi_next[i] - psi_m[i]);
        td.rsum[i] += (h_m[i] - h_next[i]) * psi_next[i];
      }
      psi_next = psi_m;
      h_next = h_m;
      if (wanted[static_cast<std::size_t>(m)]) {
        td.idx = m;
        td.t = traj.times[m];
        td.psi = psi_m;
        sink(td);
      }
    }
  }

  // The subset of closed forms needed while building layer stores.
  void pieces_light(const TargetData& td, Field& v, Field& idf, Field& idb) const {
    const Eigen::VectorXd h = outer_weight(g, std::pow(td.t, p.channel.alpha));
    v = transport(g, h.cast<cd>().cwiseProduct(td.psi), td.t);
    idf = traj.at(td.idx) - transport(g, u0, td.t);
    idb = transport(g, psi_hor - td.psi, td.t);
  }

  Pieces pieces_full(const TargetData& td) const {
    const Eigen::VectorXd h = outer_weight(g, std::pow(td.t, p.channel.alpha));
    Eigen::VectorXcd outer_psi(g.n), outer_u0(g.n), drift(g.n), outer_hor(g.n);
    for (int i = 0; i < g.n; ++i) {
      outer_psi[i] = h[i] * td.psi[i];
      outer_u0[i] = h[i] * u0[i];
      drift[i] = (1.0 - h[i]) * (td.psi[i] - u0[i]);
      outer_hor[i] = h_hor[i] * psi_hor[i];
    }
    return Pieces{
        transport(g, outer_psi, td.t),
        transport(g, outer_u0, td.t),
        traj.at(td.idx) - transport(g, u0, td.t),
        transport(g, drift, td.t),
        transport(g, outer_hor, td.t),
        transport(g, psi_hor - td.psi, td.t),
        transport(g, td.rsum, td.t),
        transport(g, td.wsum, td.t),
    };
  }

  // Projected Duhamel pair of the current layer at one target, from the
  // forward-pass checkpoints: fwd = +i P_in free(acc), bwd = -i P_out
  // free(total - acc).
  std::pair<Field, Field> layer_duhamel(const TargetData& td) const {
    const Eigen::VectorXcd& acc = q_acc.at(td.idx);
    Field qf = transport(g, acc, td.t);
    Field qb = transport(g, q_total - acc, td.t);
    qf.data *= cd(0.0, 1.0);
    qb.data *= cd(0.0, -1.0);
    return {std::move(qf), std::move(qb)};
  }

  // u_loc of the layer under construction at one target (stores pass).
  Eigen::VectorXcd layer_loc(const TargetData& td, int layer) const {
    Field v(g, Rep::position), idf(g, Rep::position), idb(g, Rep::position);
    pieces_light(td, v, idf, idb);
    Field qf(g, Rep::position), qb(g, Rep::position);
    if (layer >= 2) std::tie(qf, qb) = layer_duhamel(td);
    Eigen::VectorXcd loc = Eigen::VectorXcd::Zero(g.n);
    const int J = compute_J(td.t, p);
    for (int j = 0; j <= J; ++j) {
      const Level lv = shell_level(j, p);
      loc += apply_level(lv, v).low_part.data;
      if (layer == 1) {
        loc += apply_level(lv, idf).in_part.data;
        loc -= apply_level(lv, idb).out_part.data;
      } else {
        loc += apply_level(lv, qf).in_part.data;
        loc += apply_level(lv, qb).out_part.data;
      }
    }
    return loc;
  }

  // Forward quadrature pass feeding the next layer: the flat-frame integral
  // of V times the stored previous layer, trapezoidal on the snapshot grid
  // from the first snapshot >= 1, checkpointed at the requested indices.
  void q_pass(const std::vector<int>& checkpoints) {
    q_acc.clear();
    std::vector<char> wanted(static_cast<std::size_t>(last) + 1, 0);
    for (int i : checkpoints) wanted.at(static_cast<std::size_t>(i)) = 1;
    const int i0 = store_idx.front();
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(g.n);
    Eigen::VectorXcd g_prev;
    double s_prev = 0.0;
    for (int i = i0; i <= last; ++i) {
      const double s = traj.times[i];
      const Eigen::VectorXd prof = potential_profile(traj.potential, g, s);
      Field vu(g, Rep::position, prof.cast<cd>().cwiseProduct(interp_store(s)));
      const Eigen::VectorXcd g_cur =
          apply_multiplier(MultiplierSpec::free_flow(-s), to_frequency(vu)).data;
      if (i > i0) acc += (0.5 * (s - s_prev)) * (g_prev + g_cur);
      g_prev = g_cur;
      s_prev = s;
      if (wanted[static_cast<std::size_t>(i)]) q_acc[i] = acc;
    }
    q_total = acc;
    have_q = true;
  }

  // Full assembly of layer n at one report target.
  Assembly report_assembly(const TargetData& td, int n) const {
    const Pieces pc = pieces_full(td);
    Field qf(g, Rep::position), qb(g, Rep::position);
    if (n >= 2) std::tie(qf, qb) = layer_duhamel(td);
    const Field back_end = pc.r + pc.binit;

    Field loc_low(g, Rep::position), loc_fwd(g, Rep::position), loc_bwd(g, Rep::position);
    Field rem_end(g, Rep::position), rem_drift(g, Rep::position), rem_tail(g, Rep::position);

    const int J = compute_J(td.t, p);
    for (int j = 0; j <= J; ++j) {
      const Level lv = shell_level(j, p);
      loc_low = loc_low + apply_level(lv, pc.v).low_part;
      const Field in_idf = apply_level(lv, pc.idf).in_part;
      const Field out_idb = apply_level(lv, pc.idb).out_part;
      if (n == 1) {
        loc_fwd = loc_fwd + in_idf;
        loc_bwd = loc_bwd - out_idb;
      } else {
        const Field qin = apply_level(lv, qf).in_part;
        const Field qout = apply_level(lv, qb).out_part;
        loc_fwd = loc_fwd + qin;
        loc_bwd = loc_bwd + qout;
        // exact-minus-quadrature correction stays in the remainder
        rem_drift = rem_drift + (in_idf - qin) - (out_idb + qout);
      }
      rem_drift = rem_drift - apply_level(lv, pc.iwf).in_part +
                  apply_level(lv, pc.iwb).out_part;
      rem_end = rem_end + apply_level(lv, pc.n1).in_part +
                apply_level(lv, back_end).out_part;
    }
    const Level tl = tail_level(J + 1, p);
    rem_tail = apply_level(tl, pc.v).low_part +
               apply_level(tl, pc.idf - pc.iwf).in_part +
               apply_level(tl, pc.iwb - pc.idb).out_part;
    rem_end = rem_end + apply_level(tl, pc.n1).in_part +
              apply_level(tl, back_end).out_part;

    Assembly out{loc_low + loc_fwd + loc_bwd, rem_end + rem_drift + rem_tail, {}};
    out.components.emplace("v", pc.v);
    out.components.emplace("loc_low", std::move(loc_low));
    out.components.emplace("loc_fwd", std::move(loc_fwd));
    out.components.emplace("loc_bwd", std::move(loc_bwd));
    out.components.emplace("rem_endpoint", std::move(rem_end));
    out.components.emplace("rem_drift", std::move(rem_drift));
    out.components.emplace("rem_tail", std::move(rem_tail));
    return out;
  }

  // Layer chain: stores for 1..n-1, then the report sweep for layer n.
  std::map<int, Assembly> run(const std::vector<int>& report, int n) {
    if (n < 1) throw std::domain_error("decomposition: layer index n must be >= 1");
    if (n >= 2) {
      build_store_grid();
      for (int layer = 1; layer < n; ++layer) {
        if (layer >= 2) q_pass(store_idx);  // Duhamel content of this layer
        std::vector<Eigen::VectorXcd> built(store_idx.size());
        sweep(store_idx, [&](const TargetData& td) {
          const auto pos = std::lower_bound(store_idx.begin(), store_idx.end(), td.idx);
          built[static_cast<std::size_t>(pos - store_idx.begin())] = layer_loc(td, layer);
        });
        store_prev = std::move(built);
      }
      q_pass(report);  // Duhamel content of layer n
    }
    std::map<int, Assembly> out;
    sweep(report, [&](const TargetData& td) { out.emplace(td.idx, report_assembly(td, n)); });
    return out;
  }
};

double h1dot(const Field& f) { return weighted_norm(f, 0.0, 1, 0.0); }

// || f ||_{L^2(|x| <= radius)}: the compact-window probe norm.
double window_l2(const Field& f, double radius) {
  double acc = 0.0;
  for (int i = 0; i < f.grid.n; ++i)
    if (std::abs(f.grid.x(i)) <= radius) acc += std::norm(f.data[i]);
  return std::sqrt(f.grid.dx() * acc);
}

void write_csv_row(std::ofstream& out, const std::vector<double>& vals) {
  char buf[64];
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
    out << (i ? "," : "") << buf;
  }
  out << "\n";
}

}  // namespace

void check_params(const MicrolocParams& p) {
  check_params(p.channel);
  if (!(p.theta > 0.0 && p.theta < 1.0))
    throw std::domain_error("decomposition: theta must lie in (0,1)");
  if (!(p.rho < 0.5) || (!p.relax_wedge && !(p.rho > p.channel.alpha)))
    throw std::domain_error("decomposition: need alpha < rho < 1/2");
  if (p.n_iter < 1) throw std::domain_error("decomposition: n_iter must be >= 1");
  if (!(p.eps_weak > 0.0)) throw std::domain_error("decomposition: eps_weak must be > 0");
  if (!(p.consistency_tol > 0.0))
    throw std::domain_error("decomposition: consistency_tol must be > 0");
}

Field proj(ProjKind kind, int j, const MicrolocParams& p, const Field& f) {
  check_params(p);
  if (j < 0) throw std::domain_error("proj: shell index must be >= 0");
  return pick(apply_level(shell_level(j, p), f), kind);
}

Field proj_tail(ProjKind kind, int J, const MicrolocParams& p, const Field& f,
                bool* resolution_flag) {
  check_params(p);
  if (J < 1) throw std::domain_error("proj_tail: tail level must be >= 1");
  if (resolution_flag != nullptr) {
    // Spatial support |x| > 2^{J-1}: when the whole grid sits inside, every
    // weight vanishes and the output is exactly zero.
    bool empty = true;
    for (int i = 0; i < f.grid.n && empty; ++i)
      if (cutoffs::eval(Variant::ge, dyadic(J), std::abs(f.grid.x(i)), 0) != 0.0)
        empty = false;
    *resolution_flag = empty;
  }
  return pick(apply_level(tail_level(J, p), f), kind);
}

int compute_J(double t, const MicrolocParams& p) {
  if (!(t > 0.0)) throw std::domain_error("compute_J: need t > 0");
  if (t <= 1.0) return 0;
  const double tr = std::pow(t, p.rho);
  int J = static_cast<int>(std::ceil(std::log2(tr)));
  while (J > 0 && std::ldexp(1.0, J - 1) >= tr) --J;  // enforce 2^{J-1} < t^rho
  while (std::ldexp(1.0, J) < tr) ++J;                // enforce t^rho <= 2^J
  return std::max(J, 0);
}

Field projected_duhamel(int j, DuhamelDirection dir, const Trajectory& source,
                        double t, const MicrolocParams& p) {
  check_params(p);
  if (j < 0) throw std::domain_error("projected_duhamel: shell index must be >= 0");
  const Grid& g = source.grid;
  if (dir == DuhamelDirection::bwd && j == 0) return Field(g, Rep::position);

  const int it = source.index_of(t);  // range error off the snapshot set
  Field integral(g, Rep::position);
  if (dir == DuhamelDirection::fwd && !source.duhamel.empty()) {
    integral = duhamel_forward(source, t);
  } else {
    const int lo = dir == DuhamelDirection::fwd ? 0 : it;
    const int hi = dir == DuhamelDirection::fwd ? it : source.count() - 1;
    if (dir == DuhamelDirection::fwd && source.times.front() > 1e-9)
      throw std::runtime_error("projected_duhamel: snapshots do not start at 0");
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(g.n);
    Eigen::VectorXcd g_prev;
    for (int i = lo; i <= hi; ++i) {
      const double s = source.times[i];
      const Eigen::VectorXd prof = potential_profile(source.potential, g, s);
      Field vu(g, Rep::position, prof.cast<cd>().cwiseProduct(source.snaps[i]));
      const Eigen::VectorXcd g_cur =
          apply_multiplier(MultiplierSpec::free_flow(-s), to_frequency(vu)).data;
      if (i > lo) acc += (0.5 * (source.times[i] - source.times[i - 1])) * (g_prev + g_cur);
      g_prev = g_cur;
    }
    integral = in_rep(free_propagate(Field(g, Rep::frequency, acc), t), Rep::position);
  }
  integral.data *= dir == DuhamelDirection::fwd ? cd(0.0, 1.0) : cd(0.0, -1.0);
  return proj(dir == DuhamelDirection::fwd ? ProjKind::in : ProjKind::out, j, p, integral);
}

Assembly assemble(const Trajectory& traj, double t, const MicrolocParams& p, int n) {
  if (!(t > 1.0)) throw std::domain_error("assemble: need t > 1");
  Engine eng(traj, p);
  auto built = eng.run({traj.index_of(t)}, n);
  return std::move(built.begin()->second);
}

DecompositionReport diagnostics(const Trajectory& traj, const MicrolocParams& p,
                                int n, const std::vector<double>& times) {
  if (times.empty()) throw std::domain_error("diagnostics: no report times");
  Engine eng(traj, p);
  std::vector<int> report;
  for (double t : times) {
    if (!(t > 1.0)) throw std::domain_error("diagnostics: report times must be > 1");
    report.push_back(traj.index_of(t));
  }
  std::sort(report.begin(), report.end());
  report.erase(std::unique(report.begin(), report.end()), report.end());
  auto built = eng.run(report, n);

  // Windowed horizon datum and its free flow for the linear-comparison probe.
  CutoffFactor floor_hor;
  floor_hor.kind = Variant::ge;
  floor_hor.scale = std::pow(traj.times[eng.last], -p.channel.delta);
  Field uplus = in_rep(
      apply_multiplier(MultiplierSpec::cutoff(floor_hor), make_field(eng.g, eng.psi_hor)),
      Rep::position);
  for (int i = 0; i < eng.g.n; ++i) uplus.data[i] *= 1.0 - eng.h_hor[i];

  DecompositionReport rep;
  rep.params = p;
  rep.n = n;
  for (const auto& [idx, asm_t] : built) {
    const double t = traj.times[idx];
    rep.times.push_back(t);
    std::vector<double> wk;
    for (int k = 0; k <= n; ++k)
      wk.push_back(weighted_norm(asm_t.u_loc, p.theta * k, k, 0.0));
    rep.loc_weighted.push_back(std::move(wk));
    rep.rem_deriv.push_back(h1dot(asm_t.u_rem));
    const Field& v = asm_t.components.at("v");
    const double resid = h1dot(v - asm_t.u_loc - asm_t.u_rem);
    const double vn = h1dot(v);
    if (!(resid <= p.consistency_tol * vn))
      throw std::runtime_error("diagnostics: consistency residual above tolerance at t = " +
                               std::to_string(t));
    rep.residual_h1dot.push_back(resid);
    rep.v_h1dot.push_back(vn);
    const Field uwb = split_weakly_bound(p.channel, traj, t).u_wb;
    rep.uwb_outer.push_back(restricted_l2(uwb, std::pow(t, 0.5 + p.eps_weak)));
    rep.rem_endpoint.push_back(h1dot(asm_t.components.at("rem_endpoint")));
    rep.rem_drift.push_back(h1dot(asm_t.components.at("rem_drift")));
    rep.rem_tail.push_back(h1dot(asm_t.components.at("rem_tail")));
    const Field diff = traj.at(idx) - in_rep(free_propagate(uplus, t), Rep::position) -
                       asm_t.u_loc;
    rep.probe_window.push_back(
        window_l2(apply_multiplier(MultiplierSpec::derivative(1), diff),
                  kProbeWindowRadius));
  }
  return rep;
}

void write_report_csv(const DecompositionReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_csv: cannot open " + path);
  out << "t";
  for (int k = 0; k <= report.n; ++k) out << ",uloc_k" << k;
  out << ",urem_dx,residual_hdot1,v_hdot1,uwb_outer_l2\n";
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    std::vector<double> row{report.times[i]};
    for (double w : report.loc_weighted[i]) row.push_back(w);
    row.push_back(report.rem_deriv[i]);
    row.push_back(report.residual_h1dot[i]);
    row.push_back(report.v_h1dot[i]);
    row.push_back(report.uwb_outer[i]);
    write_csv_row(out, row);
  }
  if (!out) throw std::runtime_error("write_report_csv: write failed for " + path);
}

void write_components_csv(const DecompositionReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_components_csv: cannot open " + path);
  out << "t,rem_endpoint_dx,rem_drift_dx,rem_tail_dx,probe_window_dx\n";
  for (std::size_t i = 0; i < report.times.size(); ++i)
    write_csv_row(out, {report.times[i], report.rem_endpoint[i], report.rem_drift[i],
                        report.rem_tail[i], report.probe_window[i]});
  if (!out) throw std::runtime_error("write_components_csv: write failed for " + path);
}

}  // namespace specloc
