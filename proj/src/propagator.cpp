#include "specloc/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include "specloc/cutoffs.hpp"

namespace specloc {
namespace {

using cd = std::complex<double>;

std::vector<double> sample_times(double t_final, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = t_final * i / (n - 1);
  return v;
}

/// Number of steps, after checking t_final is an integer multiple of dt.
long long step_count(const EvolutionConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::domain_error("time step must be positive");
  if (cfg.snapshot_stride < 1) throw std::domain_error("snapshot stride must be >= 1");
  if (cfg.t_final < 0.0) throw std::domain_error("end time must be nonnegative");
  const long long steps = std::llround(cfg.t_final / cfg.dt);
  if (std::abs(steps * cfg.dt - cfg.t_final) > 1e-9 * std::max(1.0, cfg.t_final))
    throw std::domain_error("end time is not an integer number of steps");
  if (steps % cfg.snapshot_stride != 0)
    throw std::domain_error("end time must land on a snapshot (steps divisible by stride)");
  return steps;
}

double sup_weighted_potential(const PotentialSpec& V, const Grid& g, double t_final) {
  double sup = 0.0;
  for (double t : sample_times(std::max(t_final, 1.0), 8)) {
    for (int i = 0; i < g.n; ++i) {
      const double x = g.x(i);
      sup = std::max(sup, std::pow(1.0 + x * x, 0.5 * V.sigma) *
                              std::abs(eval_potential(V, x, t)));
    }
  }
  return sup;
}

}  // namespace

int Trajectory::index_of(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  int best = -1;
  double gap = 1e300;
  for (const auto cand : {it, it == times.begin() ? it : std::prev(it)}) {
    if (cand == times.end()) continue;
    const double d = std::abs(*cand - t);
    if (d < gap) {
      gap = d;
      best = static_cast<int>(cand - times.begin());
    }
  }
  if (best < 0 || gap > 1e-6 * std::max(1.0, std::abs(t))) {
    std::ostringstream os;
    os << "t = " << t << " is not a snapshot time";
    throw std::range_error(os.str());
  }
  return best;
}

Field free_propagate(const Field& f, double tau) {
  return apply_multiplier(MultiplierSpec::free_flow(tau), f);
}

Field flat_frame(const Trajectory& traj, int snap_index) {
  return free_propagate(traj.at(snap_index), -traj.times.at(snap_index));
}

Trajectory evolve(const Field& u0, const PotentialSpec& V, const EvolutionConfig& cfg) {
  if (u0.rep != Rep::position)
    throw std::invalid_argument("evolve expects the initial datum in position space");
  check_spec(V);
  const long long steps = step_count(cfg);
  if (!cfg.skip_hypothesis_check) {
    const auto rep =
        validate_hypotheses(V, u0.grid, sample_times(std::max(cfg.t_final, 1.0), 16));
    if (!rep.pass)
      throw std::invalid_argument("potential fails its decay/symbol hypotheses: " +
                                  rep.summary());
  }

  const Grid& g = u0.grid;
  Trajectory traj(g);
  traj.potential = V;
  traj.config = cfg;
  traj.initial = u0.data;
  const double u0_norm = std::sqrt(g.dx() * u0.data.squaredNorm());

  // Per-step spectral phase e^{+i dt xi^2} and work buffers.
  Eigen::VectorXcd phase(g.n);
  for (int j = 0; j < g.n; ++j) phase[j] = std::polar(1.0, cfg.dt * g.xi(j) * g.xi(j));
  Eigen::VectorXcd u = u0.data, uhat(g.n), kick(g.n), work(g.n), g_prev, g_new;
  Eigen::VectorXcd acc;

  auto flat_source = [&](double t, Eigen::VectorXcd& out) {
    // e^{+i t Laplacian}(V u) in frequency representation: symbol e^{-i t xi^2}.
    const Eigen::VectorXd prof = potential_profile(V, g, t);
    work = prof.cast<cd>().cwiseProduct(u);
    dft_unitary_forward(g, work, out);
    for (int j = 0; j < g.n; ++j) out[j] *= std::polar(1.0, -t * g.xi(j) * g.xi(j));
  };

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.snaps.push_back(u);
    const Field f(g, Rep::position, u);
    const double bm = boundary_mass(f) / u0_norm;
    traj.boundary.push_back(bm);
    if (bm > cfg.boundary_warn) {
      std::ostringstream os;
      os << "boundary mass " << bm << " at t = " << t << " exceeds " << cfg.boundary_warn;
      traj.warnings.push_back(os.str());
    }
    if (cfg.accumulate_duhamel) traj.duhamel.push_back(acc);
  };

  if (cfg.accumulate_duhamel) {
    acc = Eigen::VectorXcd::Zero(g.n);
    flat_source(0.0, g_prev);
  }
  record(0.0);

  for (long long k = 0; k < steps; ++k) {
    const double t_mid = (k + 0.5) * cfg.dt;
    const Eigen::VectorXd vmid = potential_profile(V, g, t_mid);
    for (int i = 0; i < g.n; ++i) kick[i] = std::polar(1.0, 0.5 * cfg.dt * vmid[i]);
    u = u.cwiseProduct(kick);
    dft_unitary_forward(g, u, uhat);
    uhat = uhat.cwiseProduct(phase);
    dft_unitary_inverse(g, uhat, u);
    u = u.cwiseProduct(kick);
    const double t_new = (k + 1) * cfg.dt;
    if (!std::isfinite(u.squaredNorm())) {
      std::ostringstream os;
      os << "evolution produced non-finite data at step " << (k + 1) << " (t = " << t_new
         << ")";
      throw std::runtime_error(os.str());
    }
    if (cfg.accumulate_duhamel) {
      flat_source(t_new, g_new);
      acc += (0.5 * cfg.dt) * (g_prev + g_new);
      g_prev.swap(g_new);
    }
    if ((k + 1) % cfg.snapshot_stride == 0) record(t_new);
  }
  return traj;
}

Field duhamel_forward(const Trajectory& traj, double t) {
  const int i = traj.index_of(t);
  if (traj.duhamel.empty())
    throw std::logic_error("forward Duhamel accumulators were not stored for this run");
  const Field flat(traj.grid, Rep::frequency, traj.duhamel.at(i));
  return in_rep(free_propagate(flat, traj.times[i]), Rep::position);
}

BackwardDuhamel duhamel_backward(const Trajectory& traj, double t, double alpha) {
  if (!(t > 0.0)) throw std::domain_error("backward Duhamel needs t > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
  const int i0 = traj.index_of(t);
  const int last = traj.count() - 1;
  const Grid& g = traj.grid;

  BackwardDuhamel out{Field(g, Rep::position), Field(g, Rep::position), 0.0};
  auto pot_term = [&](int i) {
    // F_{>= s^alpha}(|x|) e^{+i s Laplacian}(V u)(s), position representation.
    const double s = traj.times[i];
    Field w = traj.at(i);
    const Eigen::VectorXd prof = potential_profile(traj.potential, g, s);
    for (int j = 0; j < g.n; ++j) w.data[j] *= prof[j];
    w = free_propagate(w, -s);
    const double scale = std::pow(s, alpha);
    scale_position(w, [&](double x) {
      return cutoffs::eval(cutoffs::Variant::ge, scale, std::abs(x));
    });
    return w;
  };
  auto bdry_term = [&](int i) {
    // (alpha |x| / s^{1+alpha}) F'_{>= s^alpha}(|x|) psi(s).
    const double s = traj.times[i];
    Field w = flat_frame(traj, i);
    const double scale = std::pow(s, alpha);
    const double rate = alpha / std::pow(s, 1.0 + alpha);
    scale_position(w, [&](double x) {
      return rate * std::abs(x) * cutoffs::eval(cutoffs::Variant::ge, scale, std::abs(x), 1);
    });
    return w;
  };

  Field pot_prev = pot_term(i0), bdry_prev = bdry_term(i0);
  for (int i = i0 + 1; i <= last; ++i) {
    Field pot_cur = pot_term(i), bdry_cur = bdry_term(i);
    const cd half_ds(0.5 * (traj.times[i] - traj.times[i - 1]), 0.0);
    out.potential_part = out.potential_part + half_ds * (pot_prev + pot_cur);
    out.boundary_part = out.boundary_part + half_ds * (bdry_prev + bdry_cur);
    pot_prev = std::move(pot_cur);
    bdry_prev = std::move(bdry_cur);
  }

  // Neglected (T_hor, infinity) piece of the potential part:
  // ||F_{>= s^alpha} V||_inf <~ S 2^sigma s^{-alpha sigma} with
  // S = sup <x>^sigma |V|, integrated against the conserved L2 mass.
  const double asig = alpha * traj.potential.sigma;
  if (asig <= 1.0) {
    out.tail_bound = std::numeric_limits<double>::infinity();
  } else {
    const double S = sup_weighted_potential(traj.potential, g, traj.last_time());
    const double u0_norm = std::sqrt(g.dx() * traj.initial.squaredNorm());
    out.tail_bound = S * std::pow(2.0, traj.potential.sigma) * u0_norm *
                     std::pow(traj.last_time(), 1.0 - asig) / (asig - 1.0);
  }
  return out;
}

double observable_expectation(const OperatorSpec& B, const Trajectory& traj, double t) {
  const Field u = traj.at(traj.index_of(t));
  return inner(apply_operator(B, u), u).real();
}

// ---------------------------------------------------------------------------
// Persistence: text header + raw little-endian complex64 payload.
// ---------------------------------------------------------------------------

namespace {

void write_complex64(std::ofstream& os, const Eigen::VectorXcd& v) {
  std::vector<float> buf(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    buf[2 * i] = static_cast<float>(v[i].real());
    buf[2 * i + 1] = static_cast<float>(v[i].imag());
  }
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Eigen::VectorXcd read_complex64(std::ifstream& is, int n) {
  std::vector<float> buf(2 * n);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!is) throw std::runtime_error("trajectory file truncated");
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = cd(buf[2 * i], buf[2 * i + 1]);
  return v;
}

}  // namespace

void save_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os.precision(17);
  const PotentialSpec& p = traj.potential;
  const EvolutionConfig& c = traj.config;
  os << "specloc-trajectory v1\n";
  os << "grid " << traj.grid.n << " " << traj.grid.half_width << "\n";
  os << "potential " << to_string(p.family) << " " << p.amplitude << " " << p.modulation
     << " " << p.frequency << " " << p.width << " " << p.phase << " " << p.sigma << " "
     << p.symbol_order << "\n";
  os << "config " << c.dt << " " << c.t_final << " " << c.snapshot_stride << " "
     << c.boundary_warn << "\n";
  os << "snapshots " << traj.count() << "\n";
  os << "times";
  for (double t : traj.times) os << " " << t;
  os << "\n";
  os << "boundary";
  for (double b : traj.boundary) os << " " << b;
  os << "\n";
  for (const auto& w : traj.warnings) os << "warning " << w << "\n";
  os << "end-header\n";
  write_complex64(os, traj.initial);
  for (const auto& s : traj.snaps) write_complex64(os, s);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::getline(is, line);
  if (line != "specloc-trajectory v1")
    throw std::runtime_error("'" + path + "' is not a trajectory file");
  int n = 0, count = 0;
  double half_width = 0.0;
  PotentialSpec p;
  EvolutionConfig c;
  c.accumulate_duhamel = false;  // accumulators are not persisted
  std::vector<double> times, boundary;
  std::vector<std::string> warnings;
  while (std::getline(is, line) && line != "end-header") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "grid") {
      ls >> n >> half_width;
    } else if (key == "potential") {
      std::string fam;
      ls >> fam >> p.amplitude >> p.modulation >> p.frequency >> p.width >> p.phase >>
          p.sigma >> p.symbol_order;
      p.family = family_from_string(fam);
    } else if (key == "config") {
      ls >> c.dt >> c.t_final >> c.snapshot_stride >> c.boundary_warn;
    } else if (key == "snapshots") {
      ls >> count;
    } else if (key == "times") {
      double t;
      while (ls >> t) times.push_back(t);
    } else if (key == "boundary") {
      double b;
      while (ls >> b) boundary.push_back(b);
    } else if (key == "warning") {
      std::string rest;
      std::getline(ls, rest);
      warnings.push_back(rest.empty() ? rest : rest.substr(1));
    } else {
      throw std::runtime_error("unknown trajectory header line: " + line);
    }
  }
  if (line != "end-header") throw std::runtime_error("trajectory header not terminated");
  if (static_cast<int>(times.size()) != count)
    throw std::runtime_error("trajectory header times/count mismatch");
  Trajectory traj{Grid(n, half_width)};
  traj.potential = p;
  traj.config = c;
  traj.times = std::move(times);
  traj.boundary = std::move(boundary);
  traj.warnings = std::move(warnings);
  traj.initial = read_complex64(is, n);
  traj.snaps.reserve(count);
  for (int i = 0; i < count; ++i) traj.snaps.push_back(read_complex64(is, n));
  return traj;
}

}  // namespace specloc
