/// \file runner.cpp
/// Suite orchestration: one shared evolution feeds the Cook series and the
/// decomposition diagnostics, the self-contained suites run on their own
/// instruments, every artifact is written with %.17g floats so reruns are
/// bit-identical, and the manifest records enough to reproduce the run.

#include "specloc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <new>

#include "specloc/channel.hpp"
#include "specloc/lemma_lab.hpp"

#ifndef SPECLOC_VERSION
#define SPECLOC_VERSION "0.0.0-unversioned"
#endif

namespace specloc {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SuiteSet {
  bool simulate = false;
  bool cook = false;
  bool decompose = false;
  bool lemma = false;
  bool potential = false;
};

// decompose needs the horizon datum (Cook), cook needs the trajectory.
SuiteSet suite_closure(const std::vector<Suite>& requested) {
  SuiteSet s;
  for (Suite x : requested) {
    switch (x) {
      case Suite::simulate: s.simulate = true; break;
      case Suite::cook: s.cook = true; break;
      case Suite::decompose: s.decompose = true; break;
      case Suite::lemma_lab: s.lemma = true; break;
      case Suite::validate_potential: s.potential = true; break;
    }
  }
  if (s.decompose) s.cook = true;
  if (s.cook) s.simulate = true;
  return s;
}

std::vector<std::string> executed_names(const SuiteSet& s) {
  std::vector<std::string> out;
  if (s.potential) out.push_back(to_string(Suite::validate_potential));
  if (s.simulate) out.push_back(to_string(Suite::simulate));
  if (s.cook) out.push_back(to_string(Suite::cook));
  if (s.decompose) out.push_back(to_string(Suite::decompose));
  if (s.lemma) out.push_back(to_string(Suite::lemma_lab));
  return out;
}

// t equal to a power of two, up to roundoff carried by the config text.
bool is_dyadic(double t) {
  if (!(t >= 2.0)) return false;
  const double k = std::round(std::log2(t));
  return std::abs(t - std::ldexp(1.0, static_cast<int>(k))) <= 1e-9 * t;
}

// Least-squares line through (ln t, y): the boundedness criteria ask for
// the raw series against log time, with a two-sigma allowance on the slope.
struct LinFit {
  double slope = 0.0;
  double se = 0.0;
  int count = 0;
};

LinFit fit_vs_logt(const std::vector<double>& ts, const std::vector<double>& ys) {
  LinFit f;
  const int n = static_cast<int>(ts.size());
  f.count = n;
  if (n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(ts[i]);
    sx += x;
    sy += ys[i];
    sxx += x * x;
    sxy += x * ys[i];
  }
  const double den = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / den;
  const double intercept = (sy - f.slope * sx) / n;
  if (n >= 3) {
    double ss = 0;
    for (int i = 0; i < n; ++i) {
      const double r = ys[i] - (intercept + f.slope * std::log(ts[i]));
      ss += r * r;
    }
    f.se = std::sqrt(ss / (n - 2) / (sxx - sx * sx / n));
  }
  return f;
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["grid"] = {{"half_width", cfg.half_width}, {"points", cfg.points}};
  j["initial"] = {{"bound_amplitude", cfg.initial.bound_amplitude},
                  {"packet_amplitude", cfg.initial.packet_amplitude},
                  {"packet_width", cfg.initial.packet_width},
                  {"packet_velocity", cfg.initial.packet_velocity},
                  {"normalize", cfg.initial.normalize}};
  j["potential"] = {{"family", to_string(cfg.potential.family)},
                    {"amplitude", cfg.potential.amplitude},
                    {"modulation", cfg.potential.modulation},
                    {"frequency", cfg.potential.frequency},
                    {"width", cfg.potential.width},
                    {"phase", cfg.potential.phase},
                    {"sigma", cfg.potential.sigma},
                    {"symbol_order", cfg.potential.symbol_order}};
  j["channel"] = {{"alpha", cfg.microloc.channel.alpha},
                  {"delta", cfg.microloc.channel.delta}};
  j["microloc"] = {{"theta", cfg.microloc.theta},
                   {"rho", cfg.microloc.rho},
                   {"n", cfg.microloc.n_iter},
                   {"eps_weak", cfg.microloc.eps_weak},
                   {"consistency_tol", cfg.microloc.consistency_tol}};
  j["evolution"] = {{"dt", cfg.evolution.dt},
                    {"t_hor", cfg.evolution.t_final},
                    {"stride", cfg.evolution.snapshot_stride},
                    {"boundary_warn", cfg.evolution.boundary_warn}};
  j["report"] = {{"times", cfg.report_times}};
  j["output"] = {{"dir", cfg.out_dir}};
  std::vector<std::string> names;
  for (Suite s : cfg.suites) names.push_back(to_string(s));
  j["run"] = {{"suites", names}, {"seed", cfg.seed}};
  return j;
}

// Report-time snapshots (plus the t = 0 anchor) are what the trajectory
// artifact keeps: the full stride-resolution store is a working set, not a
// deliverable, and would dwarf every other artifact.
Trajectory decimate(const Trajectory& full, const std::vector<double>& keep) {
  Trajectory out(full.grid);
  out.potential = full.potential;
  out.config = full.config;
  out.config.accumulate_duhamel = false;  // accumulators are not persisted
  out.initial = full.initial;
  out.warnings = full.warnings;
  auto push = [&](int idx) {
    out.times.push_back(full.times[idx]);
    out.snaps.push_back(full.snaps[idx]);
    out.boundary.push_back(full.boundary[idx]);
  };
  push(0);
  for (double t : keep) {
    const int idx = full.index_of(t);
    if (full.times[idx] > out.times.back()) push(idx);
  }
  return out;
}

// Flat-frame channel state Omega(t) = e^{+it Lap} J_free(t) u(t) in
// position representation, matching the Cook series' convention.
Eigen::VectorXcd omega_at(const ChannelParams& ch, const Trajectory& traj, double t) {
  const Field u = traj.at_time(t);
  return in_rep(free_propagate(apply_Jfree(ch, t, u), -t), Rep::position).data;
}

void write_decomposition_csv(const DecompositionReport& rep,
                             const std::vector<double>& cook_increment,
                             const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "t";
  for (int k = 0; k <= rep.n; ++k) os << ",uloc_w_norm_k" << k;
  os << ",urem_h1dot,consistency_h1dot,uwb_tail_l2,cook_increment\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    os << fmt(rep.times[i]);
    for (int k = 0; k <= rep.n; ++k) os << "," << fmt(rep.loc_weighted[i][k]);
    os << "," << fmt(rep.rem_deriv[i]) << "," << fmt(rep.residual_h1dot[i]) << ","
       << fmt(rep.uwb_outer[i]) << "," << fmt(cook_increment[i]) << "\n";
  }
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

// Boundedness in the sense the derivative-localization statements use:
// never more than twice the first value, and a fitted trend against log t
// that is not significantly positive.
CriterionResult bounded_series(const std::string& suite, const std::string& name,
                               const std::vector<double>& ts,
                               const std::vector<double>& ys) {
  CriterionResult c{suite, name, "", false};
  const double ref = ys.front();
  double worst = ref;
  for (double y : ys) worst = std::max(worst, y);
  const LinFit f = fit_vs_logt(ts, ys);
  const bool growth_ok = worst <= 2.0 * ref;
  const bool slope_ok = f.slope <= 2.0 * f.se;
  c.pass = growth_ok && slope_ok;
  c.detail = "max " + fmt(worst) + " vs 2x first " + fmt(2.0 * ref) + "; slope " +
             fmt(f.slope) + " (se " + fmt(f.se) + ") consistent with <= 0: " +
             (slope_ok ? "yes" : "no");
  return c;
}

struct StageOutcome {
  std::vector<CriterionResult> criteria;
  json extra;  // manifest fragments keyed per suite
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg_in, const RunOptions& opt,
                         std::ostream& log) {
  RunResult res;
  ExperimentConfig cfg = cfg_in;
  if (!opt.suites.empty()) cfg.suites = opt.suites;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.seed_set) cfg.seed = opt.seed;
  res.out_dir = cfg.out_dir;

  try {
    validate_config(cfg);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    res.exit_code = kExitConfigError;
    return res;
  }

  const SuiteSet ss = suite_closure(cfg.suites);

  json manifest;
  manifest["version"] = SPECLOC_VERSION;
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_json(cfg);
  manifest["config_text"] = to_config_text(cfg);
  {
    std::vector<std::string> req;
    for (Suite s : cfg.suites) req.push_back(to_string(s));
    manifest["suites"] = {{"requested", req}, {"executed", executed_names(ss)}};
  }
  manifest["tolerances"] = {
      {"l2_drift_per_1e4_steps", 1e-10},
      {"cook_monotone_from_t", 16.0},
      {"cook_potential_slope_max", -1.2},
      {"consistency_rel_tol", cfg.microloc.consistency_tol},
      {"loc_growth_factor_max", 2.0},
      {"loc_slope_sigmas", 2.0},
      {"rem_halving_factor_max", 0.5},
      {"potential_bound", 1e4},
  };

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) {
    log << "config error: [output] dir: cannot create '" << cfg.out_dir << "': "
        << ec.message() << "\n";
    res.exit_code = kExitConfigError;
    return res;
  }
  auto artifact_path = [&](const std::string& name) { return cfg.out_dir + "/" + name; };
  auto note = [&](const std::string& line) {
    if (!opt.quiet) log << line << "\n";
  };

  std::vector<std::string> expected;
  if (ss.potential) expected.push_back("potential_report.json");
  if (ss.simulate) expected.push_back("trajectory.bin");
  if (ss.cook) expected.push_back("cook.csv");
  if (ss.decompose) {
    expected.push_back("decomposition.csv");
    expected.push_back("components_n" + std::to_string(cfg.microloc.n_iter) + ".csv");
    if (cfg.microloc.n_iter >= 2) {
      expected.push_back("decomposition_n1.csv");
      expected.push_back("components_n1.csv");
    }
  }
  if (ss.lemma) expected.push_back("lemma_report.json");

  std::string stage = "setup";
  Trajectory traj(make_grid(cfg));
  try {
    if (ss.potential) {
      stage = "validate-potential";
      note("validate-potential: sampling decay and symbol bounds");
      const Grid g = make_grid(cfg);
      std::vector<double> ts;
      for (int i = 0; i <= 20; ++i)
        ts.push_back(cfg.evolution.t_final * static_cast<double>(i) / 20.0);
      const ValidationReport vrep = validate_hypotheses(cfg.potential, g, ts);
      json j;
      j["family"] = to_string(cfg.potential.family);
      j["sigma"] = vrep.sigma;
      j["symbol_order"] = vrep.symbol_order;
      j["sup_weighted"] = vrep.sup_weighted;
      j["bound"] = vrep.bound;
      j["has_nan"] = vrep.has_nan;
      j["growing"] = vrep.growing;
      j["pass"] = vrep.pass;
      j["t_samples"] = ts;
      write_json_file(j, artifact_path("potential_report.json"));
      res.artifacts.push_back("potential_report.json");
      res.criteria.push_back({"validate-potential", "hypotheses", vrep.summary(),
                              vrep.pass});
    }

    if (ss.simulate) {
      stage = "simulate";
      note("simulate: evolving to t = " + fmt(cfg.evolution.t_final) + " (N = " +
           std::to_string(cfg.points) + ", dt = " + fmt(cfg.evolution.dt) + ")");
      const Field u0 = make_initial(cfg);
      traj = evolve(u0, cfg.potential, cfg.evolution);
      const double m0 = Field(traj.grid, Rep::position, traj.initial)
                            .data.norm();  // relative drift: the dx factors cancel
      const double mT = traj.snaps.back().norm();
      const double drift = std::abs(mT - m0) / m0;
      const double steps = std::round(cfg.evolution.t_final / cfg.evolution.dt);
      const double tol = 1e-10 * std::max(1.0, steps / 1e4);
      res.criteria.push_back({"simulate", "l2_conservation",
                              "relative drift " + fmt(drift) + " <= " + fmt(tol) +
                                  " over " + fmt(steps) + " steps",
                              drift <= tol});
      save_trajectory(decimate(traj, cfg.report_times), artifact_path("trajectory.bin"));
      res.artifacts.push_back("trajectory.bin");
      double worst_boundary = 0.0;
      for (double b : traj.boundary) worst_boundary = std::max(worst_boundary, b);
      manifest["simulate"] = {{"boundary_mass_max", worst_boundary},
                              {"warnings", traj.warnings.size()}};
    }

    CookSeries series(traj.grid);
    if (ss.cook) {
      stage = "cook";
      note("cook: channel series over dyadic checkpoints");
      series = cook_wave_operator(cfg.microloc.channel, traj);
      write_cook_csv(series, artifact_path("cook.csv"));
      res.artifacts.push_back("cook.csv");

      // dyadic H1 increments from t = 16 on must shrink monotonically
      std::vector<double> ts, incs;
      for (std::size_t k = 1; k < series.checkpoint_times.size(); ++k) {
        const double t = series.checkpoint_times[k];
        if (is_dyadic(t) && t >= 16.0) {
          ts.push_back(t);
          incs.push_back(series.increment_h1[k - 1]);
        }
      }
      CriterionResult mono{"cook", "increments_decreasing", "", true};
      if (ts.size() < 2) {
        mono.detail = "vacuous: fewer than two dyadic checkpoints >= 16";
      } else {
        std::string seq;
        for (std::size_t i = 0; i < ts.size(); ++i) {
          if (i) mono.pass = mono.pass && incs[i] < incs[i - 1];
          seq += (i ? ", " : "") + fmt(incs[i]);
        }
        mono.detail = "increments at {";
        for (std::size_t i = 0; i < ts.size(); ++i)
          mono.detail += (i ? "," : "") + fmt(ts[i]);
        mono.detail += "}: " + seq;
      }
      res.criteria.push_back(mono);

      // the window's polynomial reach of the sigma-decay: log-log slope of
      // the potential-term norm past the pre-asymptotic era
      std::vector<double> fts, fvals;
      for (std::size_t i = 0; i < series.integrand_times.size(); ++i)
        if (series.integrand_times[i] >= 16.0 && series.potential_term[i] > 0.0) {
          fts.push_back(series.integrand_times[i]);
          fvals.push_back(series.potential_term[i]);
        }
      CriterionResult slope{"cook", "potential_term_slope", "", true};
      if (fts.size() < 4) {
        slope.detail = "vacuous: fewer than 4 positive samples past t = 16";
      } else {
        const DecayFit f = fit_decay(fts, fvals);
        slope.pass = f.slope <= -1.2;
        slope.detail = "slope " + fmt(f.slope) + " <= -1.2 over " +
                       std::to_string(fts.size()) + " samples in [" + fmt(fts.front()) +
                       ", " + fmt(fts.back()) + "]";
      }
      res.criteria.push_back(slope);
    }

    if (ss.decompose) {
      stage = "decompose";
      // flat-frame channel increments between consecutive report rows
      std::vector<double> cook_inc(cfg.report_times.size(), 0.0);
      Eigen::VectorXcd prev = omega_at(cfg.microloc.channel, traj, cfg.report_times[0]);
      for (std::size_t i = 1; i < cfg.report_times.size(); ++i) {
        Eigen::VectorXcd cur = omega_at(cfg.microloc.channel, traj, cfg.report_times[i]);
        cook_inc[i] =
            weighted_norm(Field(traj.grid, Rep::position, cur - prev), 0.0, 0, 1.0);
        prev = std::move(cur);
      }

      const int n_top = cfg.microloc.n_iter;
      std::vector<int> layers{1};
      if (n_top >= 2) layers.push_back(n_top);
      for (int n : layers) {
        note("decompose: layer n = " + std::to_string(n) + " at " +
             std::to_string(cfg.report_times.size()) + " report times");
        DecompositionReport rep;
        try {
          rep = diagnostics(traj, cfg.microloc, n, cfg.report_times);
        } catch (const std::runtime_error& e) {
          const std::string what = e.what();
          if (what.rfind("diagnostics: consistency", 0) == 0) {
            res.criteria.push_back(
                {"decompose", "consistency_n" + std::to_string(n), what, false});
            continue;  // report refused; no artifact for this layer
          }
          throw;
        }

        double worst_rel = 0.0;
        for (std::size_t i = 0; i < rep.times.size(); ++i)
          worst_rel = std::max(worst_rel, rep.residual_h1dot[i] / rep.v_h1dot[i]);
        res.criteria.push_back({"decompose", "consistency_n" + std::to_string(n),
                                "max relative residual " + fmt(worst_rel) + " <= " +
                                    fmt(cfg.microloc.consistency_tol),
                                worst_rel <= cfg.microloc.consistency_tol});

        const std::string csv =
            (n == n_top) ? "decomposition.csv" : "decomposition_n1.csv";
        write_decomposition_csv(rep, cook_inc, artifact_path(csv));
        res.artifacts.push_back(csv);
        const std::string comp = "components_n" + std::to_string(n) + ".csv";
        write_components_csv(rep, artifact_path(comp));
        res.artifacts.push_back(comp);

        if (n == 1) {
          std::vector<double> k1;
          for (const auto& row : rep.loc_weighted) k1.push_back(row[1]);
          res.criteria.push_back(
              bounded_series("decompose", "loc_derivative_bounded", rep.times, k1));

          // remainder derivative must at least halve across the run
          const double t_ref_min = cfg.evolution.t_final / 10.0;
          std::size_t iref = 0;
          while (iref + 1 < rep.times.size() && rep.times[iref] < t_ref_min) ++iref;
          const double early = rep.rem_deriv[iref];
          const double late = rep.rem_deriv.back();
          res.criteria.push_back(
              {"decompose", "rem_derivative_halving",
               "||dx u_rem,1|| " + fmt(late) + " at t = " + fmt(rep.times.back()) +
                   " vs " + fmt(early) + " at t = " + fmt(rep.times[iref]) +
                   " (factor <= 0.5)",
               late <= 0.5 * early});

          std::vector<double> dts, duwb;
          for (std::size_t i = 0; i < rep.times.size(); ++i)
            if (is_dyadic(rep.times[i]) && rep.times[i] >= 10.0) {
              dts.push_back(rep.times[i]);
              duwb.push_back(rep.uwb_outer[i]);
            }
          CriterionResult uwb{"decompose", "uwb_outer_decreasing", "", true};
          if (dts.size() < 2) {
            uwb.detail = "vacuous: fewer than two dyadic report times";
          } else {
            std::string seq;
            for (std::size_t i = 0; i < dts.size(); ++i) {
              if (i) uwb.pass = uwb.pass && duwb[i] < duwb[i - 1];
              seq += (i ? ", " : "") + fmt(duwb[i]);
            }
            uwb.detail = "outer mass at dyadic times: " + seq;
          }
          res.criteria.push_back(uwb);
        } else {
          std::vector<double> k2;
          const int k = std::min(2, n);
          for (const auto& row : rep.loc_weighted) k2.push_back(row[k]);
          res.criteria.push_back(bounded_series(
              "decompose", "loc_k" + std::to_string(k) + "_bounded_n" + std::to_string(n),
              rep.times, k2));
        }
      }
    }

    if (ss.lemma) {
      stage = "lemma-lab";
      note("lemma-lab: standard battery");
      const json rep = run_lemma_suite(lab_grid(), cfg.seed);
      write_lemma_report(rep, artifact_path("lemma_report.json"));
      res.artifacts.push_back("lemma_report.json");
      for (const json& check : rep.at("checks"))
        res.criteria.push_back({"lemma-lab", check.at("id").get<std::string>(),
                                "recorded in lemma_report.json",
                                check.at("pass").get<bool>()});
    }
  } catch (const std::bad_alloc&) {
    res.aborted = true;
    res.abort_reason = "out of memory during " + stage;
  } catch (const std::exception& e) {
    res.aborted = true;
    res.abort_reason = stage + ": " + e.what();
  }

  bool all_pass = !res.criteria.empty() || res.aborted;
  for (const CriterionResult& c : res.criteria) {
    if (!opt.quiet)
      log << (c.pass ? "[PASS] " : "[FAIL] ") << c.suite << "/" << c.name
          << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
    all_pass = all_pass && c.pass;
  }
  if (res.aborted) {
    log << "aborted: " << res.abort_reason << "\n";
    all_pass = false;
  }

  json jcrit = json::array();
  for (const CriterionResult& c : res.criteria)
    jcrit.push_back(
        {{"suite", c.suite}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  manifest["criteria"] = jcrit;
  std::vector<std::string> missing;
  for (const std::string& name : expected)
    if (std::find(res.artifacts.begin(), res.artifacts.end(), name) ==
        res.artifacts.end())
      missing.push_back(name);
  manifest["artifacts"] = {{"written", res.artifacts}, {"missing", missing}};
  manifest["aborted"] = res.aborted;
  manifest["abort_reason"] = res.abort_reason;
  manifest["pass"] = all_pass && !res.aborted;
  res.manifest = manifest;

  try {
    write_json_file(manifest, artifact_path("manifest.json"));
    res.artifacts.push_back("manifest.json");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    res.exit_code = kExitNumericError;
    return res;
  }

  if (res.aborted) {
    res.exit_code = kExitNumericError;
  } else {
    res.exit_code = all_pass ? kExitPass : kExitCriteriaFail;
    if (!opt.quiet)
      log << "RESULT: " << (all_pass ? "PASS" : "FAIL") << " ("
          << res.criteria.size() << " criteria)\n";
  }
  return res;
}

int run(const std::string& config_path, const RunOptions& opt, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::domain_error& e) {
    log << "config error: " << config_path << ": " << e.what() << "\n";
    return kExitConfigError;
  }
  return run_experiment(cfg, opt, log).exit_code;
}

}  // namespace specloc
