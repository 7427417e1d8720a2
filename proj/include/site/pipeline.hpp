#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "site/error.hpp"
#include "site/library.hpp"
#include "site/oracle.hpp"
#include "site/precondition.hpp"
#include "site/pso.hpp"
#include "site/regress.hpp"
#include "site/select.hpp"
#include "site/solvers.hpp"
#include "site/spline.hpp"
#include "site/spline_init.hpp"

namespace site {

enum class IcMode { SplineOptimized, Gauss, Provided };
enum class Algorithm { FoBa, STRidge, Lasso, SR3 };

inline std::string_view to_string(IcMode m) {
  switch (m) {
    case IcMode::SplineOptimized: return "spline";
    case IcMode::Gauss: return "gauss";
    case IcMode::Provided: return "provided";
  }
  return "?";
}

inline IcMode ic_mode_from_string(std::string_view s) {
  if (s == "spline" || s == "spline_optimized") return IcMode::SplineOptimized;
  if (s == "gauss") return IcMode::Gauss;
  if (s == "provided") return IcMode::Provided;
  throw InvalidArgument("unknown ic_mode '" + std::string(s) + "' (expected spline, gauss or provided)");
}

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::FoBa: return "foba";
    case Algorithm::STRidge: return "stridge";
    case Algorithm::Lasso: return "lasso";
    case Algorithm::SR3: return "sr3";
  }
  return "?";
}

inline Algorithm algorithm_from_string(std::string_view s) {
  if (s == "foba") return Algorithm::FoBa;
  if (s == "stridge") return Algorithm::STRidge;
  if (s == "lasso") return Algorithm::Lasso;
  if (s == "sr3") return Algorithm::SR3;
  throw InvalidArgument("unknown algorithm '" + std::string(s) + "' (expected foba, stridge, lasso or sr3)");
}

/// Hyperparameter grids in dimensionless form. They are scaled per system:
/// FoBa epsilon by ||y||^2, Lasso lambda by ||Theta^T y||_inf, STRidge tol by
/// ||y||, SR3 lambda by ||y||^2. STRidge lambda and SR3 gamma are used as is
/// (the columns are unit norm).
struct SweepGrids {
  std::vector<double> foba_epsilon = log_grid(1e-24, 1e-2, 60);
  std::vector<double> lasso_lambda = log_grid(1e-10, 1.0, 30);
  std::vector<double> stridge_lambda = log_grid(1e-10, 1.0, 30);
  std::vector<double> stridge_tol = log_grid(1e-12, 1.0, 30);
  std::vector<double> sr3_lambda = log_grid(1e-10, 1.0, 30);
  std::vector<double> sr3_gamma = {1e-4, 1e-2, 1.0, 1e2};
  int foba_backward_frequency = 1;
};

struct PipelineConfig {
  std::string name = "experiment";
  CaseId case_id = CaseId::AdvectionFTBS;
  int nx = 300;
  int nt = 17;
  double cfl = 0.01;
  double advection_speed = 1.0;
  LibrarySpec library;
  /// Library used as the IC optimization objective (defaults to `library`).
  std::optional<LibrarySpec> ic_library;
  IcMode ic_mode = IcMode::SplineOptimized;
  /// Training control values for IcMode::Provided.
  std::vector<double> provided_control;
  int train_knots = 15;
  int test_knots = 11;
  int spline_degree = 8;
  SwarmConfig swarm;
  std::uint64_t train_seed = 1;
  std::uint64_t test_seed = 2;
  bool use_puffer = false;
  Algorithm algorithm = Algorithm::FoBa;
  SweepGrids grids;
  /// Effective sample size for BIC (defaults to nx).
  std::optional<double> n_eff;

  void validate() const {
    if (nx < 8) throw InvalidArgument("config.nx must be >= 8");
    if (nt < 2) throw InvalidArgument("config.nt must be >= 2");
    if (!(cfl > 0.0)) throw InvalidArgument("config.cfl must be positive");
    library.validate();
    if (ic_library) ic_library->validate();
    if (retained_levels(nt, library.pad_t) < 1)
      throw InvalidArgument("config.nt=" + std::to_string(nt) + " leaves no levels after library.pad_t=" +
                            std::to_string(library.pad_t) + " (need nt >= " + std::to_string(2 * library.pad_t + 1) + ")");
    if (ic_library && retained_levels(nt, ic_library->pad_t) < 1)
      throw InvalidArgument("config.nt leaves no levels after ic_library.pad_t");
    if (train_knots < 1 || test_knots < 1) throw InvalidArgument("config knots must be >= 1");
    if (spline_degree < 0) throw InvalidArgument("config.spline_degree must be >= 0");
    if (ic_mode == IcMode::Provided && provided_control.empty())
      throw InvalidArgument("config.provided_control is required for ic_mode 'provided'");
    swarm.validate();
    if (n_eff && !(*n_eff > 1.0)) throw InvalidArgument("config.n_eff must exceed 1");
    if (grids.foba_epsilon.empty() || grids.lasso_lambda.empty() || grids.stridge_lambda.empty() ||
        grids.stridge_tol.empty() || grids.sr3_lambda.empty() || grids.sr3_gamma.empty())
      throw InvalidArgument("config.grids: every grid needs at least one value");
  }
};

/// A training or test initial condition: either the Gauss bell or a spline.
struct IcSource {
  bool gauss = false;
  PeriodicSpline spline;
  std::vector<double> trace;
  double fitness = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;

  Eigen::VectorXd values(int nx) const {
    const Eigen::VectorXd x = sample_grid(nx);
    return gauss ? gauss_ic(x) : evaluate_spline(spline, x);
  }
};

struct IcPair {
  IcSource train;
  IcSource test;
};

inline IcProblem ic_problem(const PipelineConfig& cfg) {
  IcProblem p;
  p.scheme = scheme_of(cfg.case_id);
  p.nx = cfg.nx;
  p.nt = cfg.nt;
  p.cfl = cfg.cfl;
  p.advection_speed = cfg.advection_speed;
  p.library = cfg.ic_library.value_or(cfg.library);
  return p;
}

inline IcSource optimized_source(const IcProblem& p, int knots, int degree, SwarmConfig swarm, std::uint64_t seed) {
  swarm.seed = seed;
  const OptimizedIC o = optimize_ic(p, knots, degree, swarm);
  IcSource s;
  s.spline = o.spline;
  s.trace = o.trace;
  s.fitness = o.fitness;
  s.seed = seed;
  return s;
}

/// Training and test ICs for a configuration. The test IC is always an
/// optimized spline with its own seed and knot count.
inline IcPair prepare_ics(const PipelineConfig& cfg) {
  cfg.validate();
  const IcProblem p = ic_problem(cfg);
  IcPair ics;
  switch (cfg.ic_mode) {
    case IcMode::Gauss:
      ics.train.gauss = true;
      ics.train.fitness = ic_fitness(p, ics.train.values(cfg.nx));
      break;
    case IcMode::Provided:
      ics.train.spline = make_spline(Eigen::Map<const Eigen::VectorXd>(cfg.provided_control.data(),
                                                                       static_cast<Eigen::Index>(cfg.provided_control.size())),
                                     cfg.spline_degree);
      ics.train.fitness = ic_fitness(p, ics.train.values(cfg.nx));
      break;
    case IcMode::SplineOptimized:
      ics.train = optimized_source(p, cfg.train_knots, cfg.spline_degree, cfg.swarm, cfg.train_seed);
      break;
  }
  ics.test = optimized_source(p, cfg.test_knots, cfg.spline_degree, cfg.swarm, cfg.test_seed);
  return ics;
}

/// One scored candidate model.
struct CandidateRecord {
  SparseModel model;
  /// Physical (unscaled) coefficients of the model itself.
  Eigen::VectorXd physical;
  /// Physical coefficients scored by BIC (an un-puffered OLS refit when puffer is on).
  Eigen::VectorXd scored;
  double bic = 0.0;
  double test_rss = 0.0;
  int correct = 0;
  int incorrect = 0;
  ErrorMetrics metrics;
};

struct TermResult {
  std::string name;
  double predicted = 0.0;
  bool in_model = false;
  std::optional<double> analytic;
  double abs_error = std::numeric_limits<double>::quiet_NaN();
  double rel_error = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentReport {
  PipelineConfig config;
  IcPair ics;
  std::vector<std::string> term_names;
  std::vector<TermDescriptor> terms;
  double dx = 0.0, dt_train = 0.0, dt_test = 0.0, h_train = 0.0;
  double n_eff = 0.0;
  double train_rms_vif = 0.0;
  bool train_stability_warning = false, test_stability_warning = false;
  std::vector<CandidateRecord> candidates;
  size_t selected = 0;
  std::optional<size_t> optimal;
  /// Selected-model coefficients merged with the analytic terms present in the library.
  std::vector<TermResult> table;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> warnings;

  const CandidateRecord& selected_record() const { return candidates.at(selected); }
};

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

  template <class F>
  auto run(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record(stage, t0);
      } else {
        auto r = f();
        record(stage, t0);
        return r;
      }
    } catch (const std::exception& e) {
      throw Error("stage '" + stage + "' failed: " + e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    sink_.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::vector<std::pair<std::string, double>>& sink_;
};

inline std::vector<double> scaled(const std::vector<double>& g, double factor) {
  std::vector<double> out;
  out.reserve(g.size());
  for (double v : g) out.push_back(v * factor);
  return out;
}

}  // namespace detail

/// Run one sparse-regression sweep on a (scaled or puffered) system.
inline SweepResult run_sweep(Algorithm alg, const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, const SweepGrids& g) {
  const double y2 = y.squaredNorm();
  switch (alg) {
    case Algorithm::FoBa: {
      FobaOptions opt;
      opt.backward_frequency = g.foba_backward_frequency;
      return foba_sweep(theta, y, detail::scaled(g.foba_epsilon, y2), opt);
    }
    case Algorithm::Lasso: {
      const double lmax = (theta.transpose() * y).cwiseAbs().maxCoeff();
      return lasso_sweep(theta, y, detail::scaled(g.lasso_lambda, lmax));
    }
    case Algorithm::STRidge:
      return stridge_sweep(theta, y, g.stridge_lambda, detail::scaled(g.stridge_tol, std::sqrt(y2)));
    case Algorithm::SR3:
      return sr3_sweep(theta, y, detail::scaled(g.sr3_lambda, y2), g.sr3_gamma);
  }
  throw InvalidArgument("unknown algorithm");
}

struct Dataset {
  SolutionField field;
  CandidateLibrary library;
};

/// Simulation plus library for one IC at the configuration's grid. Without
/// `dt` the time step follows from the CFL number and u0.
inline Dataset make_dataset(const PipelineConfig& cfg, const Eigen::VectorXd& u0, std::optional<double> dt = std::nullopt) {
  IcProblem p = ic_problem(cfg);
  Dataset d;
  if (dt) {
    SimulationOptions opt;
    opt.advection_speed = p.advection_speed;
    d.field = run_simulation(p.scheme, u0, Grid1D::make(p.nx, p.nt, *dt), opt);
  } else {
    d.field = simulate_from_ic(p, u0);
  }
  d.library = build_library(d.field, cfg.library);
  return d;
}

/// Regress, score and classify on prepared training and test data.
inline std::vector<CandidateRecord> fit_and_score(const PipelineConfig& cfg, Algorithm alg, bool puffer,
                                                  const CandidateLibrary& train, const CandidateLibrary& test,
                                                  const AnalyticMDE& truth, double n_eff) {
  const PreconditionedSystem scaled_sys = scale_columns(train);
  const PreconditionedSystem sys = puffer ? puffer_transform(scaled_sys) : scaled_sys;
  const SweepResult sweep = run_sweep(alg, sys.theta, sys.target, cfg.grids);
  std::optional<ReducedSystem> unpuffered;
  if (puffer) unpuffered = reduce_system(scaled_sys.theta, scaled_sys.target);
  std::vector<CandidateRecord> out;
  for (const auto& m : sweep.models) {
    CandidateRecord r;
    r.model = m;
    r.physical = sys.unscale(m.coefficients);
    r.scored = puffer ? sys.unscale(detail::refit_on_support(*unpuffered, m.support, m.algorithm).coefficients) : r.physical;
    const ModelScore s = bic_score(m, r.scored, test, n_eff);
    r.bic = s.bic;
    r.test_rss = s.test_residual_sq;
    const auto cls = classify_terms(m, train.terms, truth);
    r.correct = static_cast<int>(cls.correct.size());
    r.incorrect = static_cast<int>(cls.incorrect.size());
    r.metrics = mae_mre(m, r.physical, train.terms, truth);
    out.push_back(std::move(r));
  }
  return out;
}

inline size_t select_record(const std::vector<CandidateRecord>& c) {
  std::vector<ModelScore> scores;
  scores.reserve(c.size());
  for (const auto& r : c) {
    ModelScore s;
    s.bic = r.bic;
    s.k = r.model.terms();
    s.test_residual_sq = r.test_rss;
    scores.push_back(std::move(s));
  }
  return select_best(scores);
}

inline std::optional<size_t> optimal_record(const std::vector<CandidateRecord>& c, const std::vector<TermDescriptor>& terms,
                                            const AnalyticMDE& truth) {
  std::vector<SparseModel> models;
  models.reserve(c.size());
  for (const auto& r : c) models.push_back(r.model);
  return optimal_choice(models, terms, truth);
}

inline std::vector<TermResult> coefficient_table(const CandidateRecord& rec, const std::vector<TermDescriptor>& terms,
                                                 const AnalyticMDE& truth) {
  std::vector<TermResult> rows;
  for (size_t j = 0; j < terms.size(); ++j) {
    const bool in_model = rec.physical[static_cast<Eigen::Index>(j)] != 0.0;
    const bool in_truth = truth.contains(terms[j]);
    if (!in_model && !in_truth) continue;
    TermResult t;
    t.name = describe_term(terms[j]);
    t.in_model = in_model;
    t.predicted = rec.physical[static_cast<Eigen::Index>(j)];
    if (in_truth) {
      t.analytic = truth.at(terms[j]);
      t.abs_error = std::abs(t.predicted - *t.analytic);
      t.rel_error = t.abs_error / std::abs(*t.analytic);
    }
    rows.push_back(std::move(t));
  }
  return rows;
}

/// Full pipeline with given initial conditions.
inline ExperimentReport run_site(const PipelineConfig& cfg, const IcPair& ics) {
  cfg.validate();
  ExperimentReport rep;
  rep.config = cfg;
  rep.ics = ics;
  detail::StageTimer timer(rep.timings);
  ScopedWarningSink capture([&](std::string_view w) { rep.warnings.emplace_back(w); });

  const Dataset train = timer.run("simulate_train", [&] { return make_dataset(cfg, ics.train.values(cfg.nx)); });
  const Dataset test =
      timer.run("simulate_test", [&] { return make_dataset(cfg, ics.test.values(cfg.nx), train.field.grid.dt); });
  rep.terms = train.library.terms;
  rep.term_names = train.library.names();
  rep.dx = train.field.grid.dx;
  rep.dt_train = train.field.grid.dt;
  rep.dt_test = test.field.grid.dt;
  rep.h_train = train.field.grid.h();
  rep.train_stability_warning = train.field.stability_warning;
  rep.test_stability_warning = test.field.stability_warning;
  rep.n_eff = cfg.n_eff.value_or(static_cast<double>(cfg.nx));
  rep.train_rms_vif = timer.run("vif", [&] { return rms_vif(train.library.theta); });

  const AnalyticMDE truth = analytic_coefficients(cfg.case_id, rep.dx, rep.h_train, cfg.advection_speed);
  rep.candidates = timer.run("regression", [&] {
    return fit_and_score(cfg, cfg.algorithm, cfg.use_puffer, train.library, test.library, truth, rep.n_eff);
  });
  timer.run("selection", [&] {
    rep.selected = select_record(rep.candidates);
    rep.optimal = optimal_record(rep.candidates, rep.terms, truth);
    rep.table = coefficient_table(rep.selected_record(), rep.terms, truth);
  });
  return rep;
}

inline ExperimentReport run_site(const PipelineConfig& cfg) { return run_site(cfg, prepare_ics(cfg)); }

/// One point of an algorithm comparison.
struct ComparisonRow {
  Algorithm algorithm = Algorithm::FoBa;
  IcMode ic_mode = IcMode::SplineOptimized;
  bool puffer = false;
  int term_count = 0;
  int correct = 0;
  int incorrect = 0;
  ErrorMetrics metrics;
};

/// Every deduplicated candidate of every algorithm for each IC mode and
/// puffer setting. Algorithms share the simulation of each IC mode.
inline std::vector<ComparisonRow> algorithm_comparison(const PipelineConfig& cfg, const std::vector<Algorithm>& algorithms,
                                                       const std::vector<std::pair<IcMode, IcPair>>& setups,
                                                       const std::vector<bool>& puffer_modes) {
  std::vector<ComparisonRow> rows;
  for (const auto& [mode, ics] : setups) {
    PipelineConfig c = cfg;
    c.ic_mode = mode;
    const Dataset train = make_dataset(c, ics.train.values(c.nx));
    const Dataset test = make_dataset(c, ics.test.values(c.nx), train.field.grid.dt);
    const AnalyticMDE truth = analytic_coefficients(c.case_id, train.field.grid.dx, train.field.grid.h(), c.advection_speed);
    const double n_eff = c.n_eff.value_or(static_cast<double>(c.nx));
    for (bool puffer : puffer_modes) {
      for (Algorithm alg : algorithms) {
        for (const auto& r : fit_and_score(c, alg, puffer, train.library, test.library, truth, n_eff)) {
          ComparisonRow row;
          row.algorithm = alg;
          row.ic_mode = mode;
          row.puffer = puffer;
          row.term_count = r.model.terms();
          row.correct = r.correct;
          row.incorrect = r.incorrect;
          row.metrics = r.metrics;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

struct ResolutionRecord {
  int nx = 0;
  int nt = 0;
  bool ok = true;
  std::string failure;
  int bic_terms = 0, bic_correct = 0, bic_incorrect = 0;
  ErrorMetrics bic_metrics;
  bool has_optimal = false;
  int optimal_terms = 0;
  ErrorMetrics optimal_metrics;
  bool bic_matches_optimal = false;
};

/// Pipeline at every (nx, nt) with the spline control values of `ics` reused on each grid.
inline std::vector<ResolutionRecord> resolution_study(const PipelineConfig& cfg, const IcPair& ics,
                                                      const std::vector<int>& nx_list, const std::vector<int>& nt_list,
                                                      int jobs = 1) {
  std::vector<std::pair<int, int>> points;
  for (int nt : nt_list)
    for (int nx : nx_list) points.emplace_back(nx, nt);
  std::vector<ResolutionRecord> out(points.size());
  parallel_for(static_cast<int>(points.size()), jobs, [&](int i) {
    ResolutionRecord& rec = out[static_cast<size_t>(i)];
    rec.nx = points[static_cast<size_t>(i)].first;
    rec.nt = points[static_cast<size_t>(i)].second;
    try {
      PipelineConfig c = cfg;
      c.nx = rec.nx;
      c.nt = rec.nt;
      const ExperimentReport rep = run_site(c, ics);
      const auto& sel = rep.selected_record();
      rec.bic_terms = sel.model.terms();
      rec.bic_correct = sel.correct;
      rec.bic_incorrect = sel.incorrect;
      rec.bic_metrics = sel.metrics;
      if (rep.optimal) {
        const auto& opt = rep.candidates[*rep.optimal];
        rec.has_optimal = true;
        rec.optimal_terms = opt.model.terms();
        rec.optimal_metrics = opt.metrics;
        rec.bic_matches_optimal = *rep.optimal == rep.selected || opt.model.support == sel.model.support;
      }
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.failure = e.what();
    }
  });
  return out;
}

struct TermOrder {
  std::string name;
  std::vector<double> dx;
  /// Selected-model coefficient per resolution (NaN if the term was not selected).
  std::vector<double> coefficient;
  OrderEstimate estimate;
};

/// Empirical order of every analytic term across resolutions, using the
/// BIC-selected model at each nx.
inline std::vector<TermOrder> order_study(const PipelineConfig& cfg, const IcPair& ics, const std::vector<int>& nx_list,
                                          std::vector<ExperimentReport>* reports = nullptr) {
  std::vector<TermOrder> rows;
  std::vector<ExperimentReport> reps;
  for (int nx : nx_list) {
    PipelineConfig c = cfg;
    c.nx = nx;
    reps.push_back(run_site(c, ics));
  }
  const auto& first = reps.front();
  for (size_t j = 0; j < first.terms.size(); ++j) {
    const AnalyticMDE truth = analytic_coefficients(cfg.case_id, first.dx, first.h_train, cfg.advection_speed);
    if (!truth.contains(first.terms[j])) continue;
    TermOrder t;
    t.name = first.term_names[j];
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : reps) {
      const double c = r.selected_record().physical[static_cast<Eigen::Index>(j)];
      t.dx.push_back(r.dx);
      t.coefficient.push_back(c != 0.0 ? c : std::numeric_limits<double>::quiet_NaN());
      if (c != 0.0) pairs.emplace_back(r.dx, c);
    }
    if (pairs.size() == reps.size()) t.estimate = empirical_order(pairs);
    rows.push_back(std::move(t));
  }
  if (reports) *reports = std::move(reps);
  return rows;
}

}  // namespace site
