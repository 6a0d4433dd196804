#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pmon/cli.hpp"
#include "pmon/text.hpp"

namespace pmon::cli {

namespace {

namespace fs = std::filesystem;
using monitor::Evaluation;
using monitor::Monitor;

// Seed derivation indices off the master seed. Kept in one place so the
// manifest can list them.
enum SeedSlot : std::uint64_t { kSimulate = 9, kTest = 5, kRejection = 6, kEvaluation = 7, kPool = 8 };

hybrid::ObservationProcess observation(const Experiment& e) {
  std::vector<std::size_t> idx = e.obs_indices;
  if (idx.empty()) {
    idx.resize(e.system.dim);
    std::iota(idx.begin(), idx.end(), 0);
  }
  std::vector<double> noise = e.obs_noise;
  if (noise.empty()) noise.assign(idx.size(), 0.0);
  if (noise.size() == 1) noise.assign(idx.size(), noise[0]);
  return hybrid::ObservationProcess::select(idx, noise);
}

std::string region_text(const conformal::ClassRegion& r) {
  std::string s;
  for (std::size_t j : r.labels) s += (s.empty() ? "" : ";") + std::to_string(j);
  return s;
}

const char* flag(bool b) { return b ? "1" : "0"; }

void write_report(const fs::path& path, const Monitor& m, const Evaluation& ev) {
  write_file_atomic(path, [&](std::ostream& out) {
    const bool quantile = m.predictor.task == learn::Task::Quantile;
    if (m.classification) {
      out << "index,truth,prediction,label,p0,p1,region,region_size,confidence,credibility,covered,rejected\n";
    } else if (quantile) {
      out << "index,truth,q_lo,q_med,q_hi,lo,hi,width,covered,rejected\n";
    } else {
      out << "index,truth,prediction,lo,hi,width,covered,rejected\n";
    }
    for (const auto& r : ev.rows) {
      const auto& q = r.query;
      out << r.index << ',' << format_double(r.truth) << ',';
      if (m.classification) {
        out << format_double(q.prediction) << ',' << q.label << ',' << format_double(q.region.p_values[0]) << ','
            << format_double(q.region.p_values[1]) << ',' << region_text(q.region) << ',' << q.region.size() << ','
            << format_double(q.uncertainty.confidence) << ',' << format_double(q.uncertainty.credibility) << ','
            << format_double(r.covered);
      } else {
        if (quantile) {
          out << format_double(q.quantiles[0]) << ',' << format_double(q.quantiles[1]) << ','
              << format_double(q.quantiles[2]);
        } else {
          out << format_double(q.prediction);
        }
        out << ',' << format_double(q.interval.lower) << ',' << format_double(q.interval.upper) << ','
            << format_double(q.interval.width()) << ',' << format_double(r.covered);
      }
      out << ',' << flag(r.rejected) << '\n';
    }
  });
}

sat::Dataset make_test_set(const Experiment& e, const hybrid::ObservationProcess& obs) {
  const std::uint64_t seed = derive_seed(e.seed, kTest);
  switch (e.problem) {
    case Problem::FullObs:
      return sat::gen_dataset_fo(e.system, e.formula, e.n_test, e.horizon, e.semantics, seed, {e.threads});
    case Problem::PoEnd2End:
    case Problem::PoTwoStep: {
      sat::PoOptions po = e.po;
      po.threads = e.threads;
      return sat::gen_dataset_po(e.system, e.formula, obs, e.n_test, e.semantics, seed, po);
    }
    case Problem::Stochastic: {
      Rng rng(seed);
      std::vector<hybrid::State> states(e.n_test);
      for (auto& s : states) s = e.system.init.sample(rng);
      return sat::resample_stochastic(e.system, e.formula, states, e.m_test, e.horizon, e.semantics,
                                      derive_seed(seed, 1), {e.threads});
    }
  }
  throw std::logic_error("unknown problem");
}

monitor::Build build(const Experiment& e, const hybrid::ObservationProcess& obs) {
  switch (e.problem) {
    case Problem::FullObs:
      return monitor::build_fo_monitor(e.system, e.formula, e.semantics, e.n, e.horizon, e.monitor);
    case Problem::PoEnd2End:
    case Problem::PoTwoStep:
      return monitor::build_po_monitor(e.system, e.formula, obs,
                                       e.problem == Problem::PoEnd2End ? monitor::PoMode::End2End
                                                                       : monitor::PoMode::TwoStep,
                                       e.semantics, e.n, e.po, e.monitor);
    case Problem::Stochastic:
      return monitor::build_stochastic_monitor(e.system, e.formula, e.semantics, e.n, e.m, e.horizon, e.monitor);
  }
  throw std::logic_error("unknown problem");
}

std::string join_sizes(std::initializer_list<std::size_t> v) {
  std::string s;
  for (std::size_t x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

}  // namespace

SimulateResult cmd_simulate(const Experiment& e, std::size_t k) {
  fs::create_directories(e.output);
  SimulateResult res;
  const bool stochastic = e.system.is_stochastic();
  std::ostringstream labels;
  labels << "traj,mode";
  for (std::size_t j = 0; j < e.system.dim; ++j) labels << ",x" << j;
  labels << ",value\n";
  for (std::size_t i = 0; i < k; ++i) {
    Rng rng(derive_seed(derive_seed(e.seed, kSimulate), i));
    const hybrid::State s0 = e.system.init.sample(rng);
    const stl::Signal traj = hybrid::simulate(e.system, s0, e.horizon, stochastic ? &rng : nullptr);
    const fs::path p = e.output / ("traj_" + std::to_string(i) + ".csv");
    write_file_atomic(p, [&](std::ostream& out) { hybrid::write_trajectory_csv(out, traj); });
    res.trajectories.push_back(p);
    labels << i << ',' << s0.mode;
    for (double v : s0.values) labels << ',' << format_double(v);
    labels << ',' << format_double(stl::eval(e.formula, traj, 0, e.semantics)) << '\n';
  }
  res.labels = e.output / "labels.csv";
  write_file_atomic(res.labels, [&](std::ostream& out) { out << labels.str(); });
  return res;
}

RunResult cmd_run(const Experiment& e, std::ostream& log) {
  fs::create_directories(e.output);
  const auto obs = observation(e);
  log << "building " << to_string(e.problem) << " monitor (N=" << e.n << ")\n";
  monitor::Build b = build(e, obs);
  Monitor mon = b.monitor;

  monitor::Manifest man;
  man.set("config", e.source.empty() ? std::string("<string>") : e.source.filename().string());
  man.set("problem", std::string(to_string(e.problem)));
  man.set("monitor", std::string(monitor::to_string(mon.kind)));
  man.set("semantics", std::string(stl::to_string(e.semantics)));
  man.set("system", e.system.name);
  man.set("system_hash", e.system.fingerprint);
  man.set("formula", stl::to_string(e.formula));
  man.set("seed", std::to_string(e.seed));
  man.set("seed_derivation", "derive_seed(seed, slot): data=1 split=2 train=3 test=5 rejection=6 evaluation=7 pool=8");
  man.set("N", e.n);
  man.set("N_test", e.n_test);
  if (e.problem == Problem::Stochastic) {
    man.set("M", e.m);
    man.set("M_test", e.m_test);
  }
  man.set("H_f", e.horizon);
  if (e.problem == Problem::PoEnd2End || e.problem == Problem::PoTwoStep) {
    man.set("H_p", e.po.past_horizon);
    man.set("sampling", std::string(sat::to_string(e.po.sampling)));
  }
  man.set("split_fractions", format_double(e.monitor.split.train) + "," + format_double(e.monitor.split.cal) + "," +
                                 format_double(e.monitor.split.val));
  man.set("split_sizes", join_sizes({b.split.train.size(), b.split.cal.size(), b.split.val.size()}));
  man.set("epsilon", e.monitor.epsilon);
  if (mon.classification) {
    man.set("theta", std::string(conformal::to_string(e.monitor.theta)));
    man.set("label_conditional", std::string(e.monitor.label_conditional ? "true" : "false"));
  }
  man.set("coverage_guaranteed", std::string(b.coverage_guaranteed ? "true" : "false (sequential sampling breaks exchangeability)"));

  // active learning rounds (FO only)
  if (e.active_rounds > 0) {
    Rng pool_rng(derive_seed(e.seed, kPool));
    std::vector<hybrid::State> pool(e.active_pool);
    for (auto& s : pool) s = e.system.init.sample(pool_rng);
    auto oracle = [&](const hybrid::State& s) {
      return sat::sat_deterministic(e.system, s, e.formula, e.horizon, e.semantics);
    };
    sat::Dataset train = b.train;
    const sat::Dataset test = make_test_set(e, obs);
    man.set("active_round_0_accuracy", monitor::evaluate(mon, test, derive_seed(e.seed, kEvaluation), nullptr, e.threads).accuracy);
    for (std::size_t r = 1; r <= e.active_rounds; ++r) {
      if (pool.size() < e.active_budget) throw std::runtime_error("active learning pool exhausted");
      auto round = monitor::active_learning_round(mon, e.system, train, b.cal, pool, e.active_budget, oracle, e.monitor);
      std::vector<char> taken(pool.size(), 0);
      for (std::size_t i : round.selected) taken[i] = 1;
      std::vector<hybrid::State> rest;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!taken[i]) rest.push_back(pool[i]);
      }
      pool = std::move(rest);
      mon = std::move(round.monitor);
      train = std::move(round.train);
      const double acc = monitor::evaluate(mon, test, derive_seed(e.seed, kEvaluation), nullptr, e.threads).accuracy;
      man.set("active_round_" + std::to_string(r) + "_accuracy", acc);
      log << "active round " << r << ": accuracy " << format_double(acc) << "\n";
    }
    man.set("active_budget", e.active_budget);
  }

  std::optional<monitor::RejectionRule> rule;
  if (e.rejection && b.val.size() > 0) {
    rule = monitor::fit_rejection_rule(mon, b.val, e.error_kind, derive_seed(e.seed, kRejection));
    man.set("rejection_error_kind", std::string(monitor::to_string(e.error_kind)));
    if (rule->classification) {
      man.set("rejection_min_confidence", rule->min_confidence);
      man.set("rejection_min_credibility", rule->min_credibility);
    } else {
      man.set("rejection_max_width", rule->max_width);
    }
    man.set("detection_error", rule->detection_error);
  }

  log << "evaluating on " << e.n_test << " fresh test points\n";
  const sat::Dataset test = make_test_set(e, obs);
  Evaluation ev = monitor::evaluate(mon, test, derive_seed(e.seed, kEvaluation), rule ? &*rule : nullptr, e.threads);
  man.set("n_test", ev.rows.size());
  man.set("coverage", ev.coverage);
  man.set("efficiency", ev.efficiency);
  man.set("accuracy", ev.accuracy);
  if (rule) {
    man.set("rejection_rate", ev.rejection_rate);
    man.set("retained_error", ev.retained_error);
  }
  if (mon.predictor.task == learn::Task::Quantile) {
    const double tau = conformal::cqr_tau(mon.reg_cal, mon.epsilon);
    man.set("cqr_tau", tau);
    man.set("cpi_vs_pi", std::string(tau > 0.0 ? "wider" : tau < 0.0 ? "narrower" : "equal"));
  }

  RunResult res;
  res.report = e.output / "report.csv";
  res.manifest = e.output / "manifest.txt";
  write_report(res.report, mon, ev);
  if (mon.classification) {
    if (mon.class_cal.label_conditional) {
      for (std::size_t j = 0; j < mon.class_cal.num_labels; ++j) {
        conformal::write_scores_csv(e.output / ("calibration_label" + std::to_string(j) + ".csv"),
                                    mon.class_cal.by_label.for_label(j));
      }
    } else {
      conformal::write_scores_csv(e.output / "calibration.csv", mon.class_cal.pooled);
    }
  } else {
    conformal::write_scores_csv(e.output / "calibration.csv", mon.reg_cal);
  }
  learn::save_model(e.output / "predictor.model", mon.predictor);
  if (mon.estimator) learn::save_model(e.output / "estimator.model", *mon.estimator);
  if (mon.normalizer) learn::save_model(e.output / "normalizer.model", *mon.normalizer);
  man.set("report", res.report.filename().string());
  write_file_atomic(res.manifest, [&](std::ostream& out) { man.write(out); });
  res.evaluation = std::move(ev);
  log << "coverage=" << format_double(res.evaluation.coverage) << " efficiency="
      << format_double(res.evaluation.efficiency) << " n=" << res.evaluation.rows.size() << "\n";
  return res;
}

std::string CoverageSummary::line() const {
  return "coverage=" + format_double(coverage) + " efficiency=" + format_double(efficiency) + " n=" + std::to_string(n);
}

CoverageSummary cmd_coverage(const fs::path& report, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  std::istringstream in(read_file(report));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(report.string() + ": empty report");
  const auto header = split(line, ',');
  auto col = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto c_truth = col("truth"), c_p0 = col("p0"), c_p1 = col("p1"), c_lo = col("lo"), c_hi = col("hi"),
             c_cov = col("covered"), c_qmed = col("q_med");
  const bool classification = c_p0 >= 0 && c_p1 >= 0;
  if (c_truth < 0 || c_cov < 0 || (!classification && (c_lo < 0 || c_hi < 0))) {
    throw std::runtime_error(report.string() + ": missing report columns");
  }
  CoverageSummary s;
  double cov = 0.0, eff = 0.0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw std::runtime_error(report.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields");
    }
    try {
      const double truth = parse_double(f[c_truth]);
      if (classification) {
        const double p[2] = {parse_double(f[c_p0]), parse_double(f[c_p1])};
        const std::size_t t = truth > 0.5 ? 1 : 0;
        cov += p[t] > epsilon ? 1.0 : 0.0;
        eff += static_cast<double>((p[0] > epsilon ? 1 : 0) + (p[1] > epsilon ? 1 : 0));
      } else {
        const double lo = parse_double(f[c_lo]), hi = parse_double(f[c_hi]);
        // stochastic reports store the fraction of covered rollouts
        cov += c_qmed >= 0 ? parse_double(f[c_cov]) : (lo <= truth && truth <= hi ? 1.0 : 0.0);
        eff += hi - lo;
      }
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error(report.string() + ":" + std::to_string(lineno) + ": " + err.what());
    }
    ++s.n;
  }
  if (s.n == 0) throw std::runtime_error(report.string() + ": report has no rows");
  s.coverage = cov / static_cast<double>(s.n);
  s.efficiency = eff / static_cast<double>(s.n);
  return s;
}

}  // namespace pmon::cli
