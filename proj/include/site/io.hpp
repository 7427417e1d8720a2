#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "site/error.hpp"
#include "site/pipeline.hpp"

namespace site::io {

using nlohmann::json;

/// Configuration problem with the offending field path, e.g. "library.pad_t".
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// "%.16e" formatting; "nan"/"inf"/"-inf" for non-finite values.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Write via a temporary file in the same directory and rename over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// RFC 4180 CSV text builder.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error("csv: row width does not match header");
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += quote(cells[i]);
    }
    text_ += "\r\n";
  }

  const std::string& str() const { return text_; }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }
  size_t width_;
  std::string text_;
};

// ------------------------------------------------------------ config reading

namespace detail {

/// Typed access to a JSON object that tracks the field path and rejects unknown keys.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(where(key) + ": required field is missing");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    raw(key);
    return as<T>(key);
  }

  Fields object(const std::string& key) { return Fields(raw(key), where(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown field");
  }

 private:
  template <class T>
  T as(const std::string& key) {
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("expected a string");
      }
      return v.get<T>();
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + ": " + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::vector<double> read_grid(const json& v, const std::string& path) {
  if (v.is_array()) {
    std::vector<double> g;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
      g.push_back(v[i].get<double>());
    }
    if (g.empty()) throw ConfigError(path + ": grid must not be empty");
    return g;
  }
  Fields f(v, path);
  const double lo = f.require<double>("min"), hi = f.require<double>("max");
  const int n = f.require<int>("count");
  f.finish();
  try {
    return log_grid(lo, hi, n);
  } catch (const InvalidArgument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline std::vector<int> read_int_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of integers");
  std::vector<int> out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected an integer");
    out.push_back(v[i].get<int>());
  }
  return out;
}

inline LibrarySpec read_library(Fields f) {
  LibrarySpec s;
  s.max_single_derivative_order = f.get("max_single_derivative_order", s.max_single_derivative_order);
  s.max_cumulative_product_order = f.get("max_cumulative_product_order", s.max_cumulative_product_order);
  s.max_u_power = f.get("max_u_power", s.max_u_power);
  if (f.has("time_derivatives")) s.time_derivatives = read_int_list(f.raw("time_derivatives"), f.where("time_derivatives"));
  s.accuracy = f.get("accuracy", s.accuracy);
  s.pad_t = f.get("pad_t", s.pad_t);
  f.finish();
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(f.where() + ": " + e.what());
  }
  return s;
}

inline json library_json(const LibrarySpec& s) {
  return json{{"max_single_derivative_order", s.max_single_derivative_order},
              {"max_cumulative_product_order", s.max_cumulative_product_order},
              {"max_u_power", s.max_u_power},
              {"time_derivatives", s.time_derivatives},
              {"accuracy", s.accuracy},
              {"pad_t", s.pad_t}};
}

}  // namespace detail

/// Parameter-study settings carried alongside a pipeline configuration.
struct StudyConfig {
  std::vector<int> nx;
  std::vector<int> nt;
  /// Resolutions for empirical orders (empty: skip).
  std::vector<int> order_nx;
};

struct CompareConfig {
  std::vector<Algorithm> algorithms = {Algorithm::FoBa, Algorithm::STRidge, Algorithm::Lasso, Algorithm::SR3};
  std::vector<IcMode> ic_modes = {IcMode::SplineOptimized, IcMode::Gauss};
  std::vector<bool> puffer = {false, true};
};

struct ExperimentConfig {
  PipelineConfig pipeline;
  std::optional<StudyConfig> study;
  CompareConfig compare;
};

inline ExperimentConfig parse_config(const json& root) {
  ExperimentConfig ec;
  PipelineConfig& c = ec.pipeline;
  detail::Fields f(root, "");
  c.name = f.get<std::string>("name", c.name);
  try {
    c.case_id = case_from_string(f.require<std::string>("case"));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("case: ") + e.what());
  }
  {
    auto g = f.object("grid");
    c.nx = g.require<int>("nx");
    c.nt = g.require<int>("nt");
    c.cfl = g.require<double>("cfl");
    g.finish();
  }
  c.advection_speed = f.get("advection_speed", c.advection_speed);
  c.library = detail::read_library(f.object("library"));
  if (f.has("ic_library")) c.ic_library = detail::read_library(f.object("ic_library"));
  if (f.has("ic")) {
    auto ic = f.object("ic");
    try {
      c.ic_mode = ic_mode_from_string(ic.get<std::string>("mode", "spline"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(ic.where("mode") + ": " + e.what());
    }
    c.train_knots = ic.get("train_knots", c.train_knots);
    c.test_knots = ic.get("test_knots", c.test_knots);
    c.spline_degree = ic.get("degree", c.spline_degree);
    c.train_seed = ic.get<std::uint64_t>("train_seed", c.train_seed);
    c.test_seed = ic.get<std::uint64_t>("test_seed", c.test_seed);
    if (ic.has("provided_control")) {
      const json& pc = ic.raw("provided_control");
      if (!pc.is_array()) throw ConfigError(ic.where("provided_control") + ": expected an array of numbers");
      for (const auto& v : pc) c.provided_control.push_back(v.get<double>());
    }
    if (ic.has("swarm")) {
      auto s = ic.object("swarm");
      c.swarm.particles = s.get("particles", c.swarm.particles);
      c.swarm.iterations = s.get("iterations", c.swarm.iterations);
      c.swarm.inertia = s.get("inertia", c.swarm.inertia);
      c.swarm.cognitive = s.get("cognitive", c.swarm.cognitive);
      c.swarm.social = s.get("social", c.swarm.social);
      c.swarm.lower = s.get("lower", c.swarm.lower);
      c.swarm.upper = s.get("upper", c.swarm.upper);
      c.swarm.velocity_clamp = s.get("velocity_clamp", c.swarm.velocity_clamp);
      s.finish();
    }
    ic.finish();
  }
  if (f.has("regression")) {
    auto r = f.object("regression");
    try {
      c.algorithm = algorithm_from_string(r.get<std::string>("algorithm", "foba"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(r.where("algorithm") + ": " + e.what());
    }
    c.use_puffer = r.get("puffer", c.use_puffer);
    c.grids.foba_backward_frequency = r.get("foba_backward_frequency", c.grids.foba_backward_frequency);
    if (r.has("grids")) {
      auto g = r.object("grids");
      auto grid = [&](const char* key, std::vector<double>& dst) {
        if (g.has(key)) dst = detail::read_grid(g.raw(key), g.where(key));
      };
      grid("foba_epsilon", c.grids.foba_epsilon);
      grid("lasso_lambda", c.grids.lasso_lambda);
      grid("stridge_lambda", c.grids.stridge_lambda);
      grid("stridge_tol", c.grids.stridge_tol);
      grid("sr3_lambda", c.grids.sr3_lambda);
      grid("sr3_gamma", c.grids.sr3_gamma);
      g.finish();
    }
    r.finish();
  }
  if (f.has("selection")) {
    auto s = f.object("selection");
    if (s.has("n_eff")) c.n_eff = s.require<double>("n_eff");
    s.finish();
  }
  if (f.has("study")) {
    auto s = f.object("study");
    StudyConfig st;
    if (s.has("nx")) st.nx = detail::read_int_list(s.raw("nx"), s.where("nx"));
    if (s.has("nt")) st.nt = detail::read_int_list(s.raw("nt"), s.where("nt"));
    if (s.has("order_nx")) st.order_nx = detail::read_int_list(s.raw("order_nx"), s.where("order_nx"));
    s.finish();
    if (st.nt.empty()) st.nt = {c.nt};
    ec.study = st;
  }
  if (f.has("compare")) {
    auto s = f.object("compare");
    if (s.has("algorithms")) {
      ec.compare.algorithms.clear();
      for (const auto& v : s.raw("algorithms")) {
        try {
          ec.compare.algorithms.push_back(algorithm_from_string(v.get<std::string>()));
        } catch (const std::exception& e) {
          throw ConfigError(s.where("algorithms") + ": " + e.what());
        }
      }
    }
    if (s.has("ic_modes")) {
      ec.compare.ic_modes.clear();
      for (const auto& v : s.raw("ic_modes")) {
        try {
          ec.compare.ic_modes.push_back(ic_mode_from_string(v.get<std::string>()));
        } catch (const std::exception& e) {
          throw ConfigError(s.where("ic_modes") + ": " + e.what());
        }
      }
    }
    if (s.has("puffer")) {
      ec.compare.puffer.clear();
      for (const auto& v : s.raw("puffer")) {
        if (!v.is_boolean()) throw ConfigError(s.where("puffer") + ": expected booleans");
        ec.compare.puffer.push_back(v.get<bool>());
      }
    }
    s.finish();
  }
  f.finish();
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return ec;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("config file '" + path.string() + "' does not exist");
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

inline json to_json(const ExperimentConfig& ec) {
  const PipelineConfig& c = ec.pipeline;
  json j;
  j["name"] = c.name;
  j["case"] = std::string(to_string(c.case_id));
  j["grid"] = {{"nx", c.nx}, {"nt", c.nt}, {"cfl", c.cfl}};
  j["advection_speed"] = c.advection_speed;
  j["library"] = detail::library_json(c.library);
  if (c.ic_library) j["ic_library"] = detail::library_json(*c.ic_library);
  j["ic"] = {{"mode", std::string(to_string(c.ic_mode))},
             {"train_knots", c.train_knots},
             {"test_knots", c.test_knots},
             {"degree", c.spline_degree},
             {"train_seed", c.train_seed},
             {"test_seed", c.test_seed},
             {"swarm",
              {{"particles", c.swarm.particles},
               {"iterations", c.swarm.iterations},
               {"inertia", c.swarm.inertia},
               {"cognitive", c.swarm.cognitive},
               {"social", c.swarm.social},
               {"lower", c.swarm.lower},
               {"upper", c.swarm.upper},
               {"velocity_clamp", c.swarm.velocity_clamp}}}};
  if (!c.provided_control.empty()) j["ic"]["provided_control"] = c.provided_control;
  j["regression"] = {{"algorithm", std::string(to_string(c.algorithm))},
                     {"puffer", c.use_puffer},
                     {"foba_backward_frequency", c.grids.foba_backward_frequency},
                     {"grids",
                      {{"foba_epsilon", c.grids.foba_epsilon},
                       {"lasso_lambda", c.grids.lasso_lambda},
                       {"stridge_lambda", c.grids.stridge_lambda},
                       {"stridge_tol", c.grids.stridge_tol},
                       {"sr3_lambda", c.grids.sr3_lambda},
                       {"sr3_gamma", c.grids.sr3_gamma}}}};
  j["selection"] = json::object();
  if (c.n_eff) j["selection"]["n_eff"] = *c.n_eff;
  if (ec.study) j["study"] = {{"nx", ec.study->nx}, {"nt", ec.study->nt}, {"order_nx", ec.study->order_nx}};
  json algs = json::array(), modes = json::array();
  for (auto a : ec.compare.algorithms) algs.push_back(std::string(to_string(a)));
  for (auto m : ec.compare.ic_modes) modes.push_back(std::string(to_string(m)));
  j["compare"] = {{"algorithms", algs}, {"ic_modes", modes}, {"puffer", ec.compare.puffer}};
  return j;
}

/// Hash of the canonical (fully resolved) configuration.
inline std::string config_hash(const ExperimentConfig& ec) { return hex64(fnv1a(to_json(ec).dump())); }

// ------------------------------------------------------------ initial conditions

inline json ic_json(const IcSource& s) {
  json j;
  j["gauss"] = s.gauss;
  j["seed"] = s.seed;
  j["fitness"] = std::isfinite(s.fitness) ? json(s.fitness) : json(nullptr);
  j["trace"] = s.trace;
  if (!s.gauss) {
    j["degree"] = s.spline.degree;
    j["knots"] = s.spline.knots();
    j["control"] = std::vector<double>(s.spline.control.data(), s.spline.control.data() + s.spline.control.size());
  }
  return j;
}

inline IcSource ic_from_json(const json& j, const std::string& path) {
  detail::Fields f(j, path);
  IcSource s;
  s.gauss = f.get("gauss", false);
  s.seed = f.get<std::uint64_t>("seed", 0);
  s.fitness = f.has("fitness") ? f.require<double>("fitness") : std::numeric_limits<double>::quiet_NaN();
  if (f.has("trace")) s.trace = f.raw("trace").get<std::vector<double>>();
  if (!s.gauss) {
    s.spline.degree = f.require<int>("degree");
    const int knots = f.require<int>("knots");
    const auto ctrl = f.raw("control").get<std::vector<double>>();
    if (static_cast<int>(ctrl.size()) != knots) throw ConfigError(f.where("control") + ": length differs from knots");
    s.spline.control = Eigen::Map<const Eigen::VectorXd>(ctrl.data(), knots);
    s.spline.validate();
  } else {
    f.has("degree");
    f.has("knots");
    f.has("control");
  }
  f.finish();
  return s;
}

inline json ics_json(const IcPair& p) { return json{{"train", ic_json(p.train)}, {"test", ic_json(p.test)}}; }

inline IcPair load_ics(const std::filesystem::path& path) {
  const json j = json::parse(read_file(path));
  detail::Fields f(j, "");
  IcPair p;
  p.train = ic_from_json(f.raw("train"), "train");
  p.test = ic_from_json(f.raw("test"), "test");
  f.finish();
  return p;
}

// ------------------------------------------------------------ result tables

inline std::string join_names(const std::vector<int>& support, const std::vector<std::string>& names) {
  std::string s;
  for (size_t i = 0; i < support.size(); ++i) s += (i ? ";" : "") + names[static_cast<size_t>(support[i])];
  return s;
}

inline std::string join_params(const std::vector<std::pair<std::string, double>>& hp) {
  std::string s;
  for (size_t i = 0; i < hp.size(); ++i) s += (i ? ";" : "") + hp[i].first + "=" + fmt(hp[i].second);
  return s;
}

inline std::string coefficients_csv(const ExperimentReport& r) {
  Csv csv({"term", "in_model", "analytic", "predicted", "abs_error", "rel_error"});
  for (const auto& t : r.table) {
    csv.row({t.name, t.in_model ? "1" : "0", t.analytic ? fmt(*t.analytic) : "", fmt(t.predicted),
             t.analytic ? fmt(t.abs_error) : "", t.analytic ? fmt(t.rel_error) : ""});
  }
  return csv.str();
}

inline std::string models_csv(const ExperimentReport& r) {
  Csv csv({"index", "algorithm", "terms", "support", "correct", "incorrect", "refit_ols", "converged", "hyperparameters",
           "train_residual", "test_rss", "bic", "selected", "optimal", "metrics_valid", "mae", "mre"});
  for (size_t i = 0; i < r.candidates.size(); ++i) {
    const auto& c = r.candidates[i];
    csv.row({std::to_string(i), c.model.algorithm, std::to_string(c.model.terms()), join_names(c.model.support, r.term_names),
             std::to_string(c.correct), std::to_string(c.incorrect), c.model.refit_ols ? "1" : "0",
             c.model.converged ? "1" : "0", join_params(c.model.hyperparameters), fmt(c.model.residual_norm),
             fmt(c.test_rss), fmt(c.bic), i == r.selected ? "1" : "0", (r.optimal && *r.optimal == i) ? "1" : "0",
             c.metrics.valid ? "1" : "0", c.metrics.valid ? fmt(c.metrics.mae) : "",
             c.metrics.valid ? fmt(c.metrics.mre) : ""});
  }
  return csv.str();
}

inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  Csv csv({"algorithm", "ic_mode", "puffer", "term_count", "correct", "incorrect", "mre_valid", "mae", "mre"});
  for (const auto& r : rows) {
    csv.row({std::string(to_string(r.algorithm)), std::string(to_string(r.ic_mode)), r.puffer ? "1" : "0",
             std::to_string(r.term_count), std::to_string(r.correct), std::to_string(r.incorrect),
             r.metrics.valid ? "1" : "0", r.metrics.valid ? fmt(r.metrics.mae) : "",
             r.metrics.valid ? fmt(r.metrics.mre) : ""});
  }
  return csv.str();
}

inline std::string resolution_csv(const std::vector<ResolutionRecord>& rows) {
  Csv csv({"nx", "nt", "ok", "bic_terms", "bic_correct", "bic_incorrect", "bic_valid", "bic_mae", "bic_mre",
           "has_optimal", "optimal_terms", "optimal_valid", "optimal_mae", "optimal_mre", "bic_matches_optimal",
           "failure"});
  for (const auto& r : rows) {
    auto m = [](const ErrorMetrics& e, bool mre) { return e.valid ? fmt(mre ? e.mre : e.mae) : std::string(); };
    csv.row({std::to_string(r.nx), std::to_string(r.nt), r.ok ? "1" : "0", std::to_string(r.bic_terms),
             std::to_string(r.bic_correct), std::to_string(r.bic_incorrect), r.bic_metrics.valid ? "1" : "0",
             m(r.bic_metrics, false), m(r.bic_metrics, true), r.has_optimal ? "1" : "0", std::to_string(r.optimal_terms),
             r.optimal_metrics.valid ? "1" : "0", m(r.optimal_metrics, false), m(r.optimal_metrics, true),
             r.bic_matches_optimal ? "1" : "0", r.failure});
  }
  return csv.str();
}

inline std::string orders_csv(const std::vector<TermOrder>& rows) {
  Csv csv({"term", "order", "pairwise_orders", "dx", "coefficients"});
  for (const auto& r : rows) {
    std::string pw, dx, co;
    for (size_t i = 0; i < r.estimate.pairwise.size(); ++i) pw += (i ? ";" : "") + fmt(r.estimate.pairwise[i]);
    for (size_t i = 0; i < r.dx.size(); ++i) dx += (i ? ";" : "") + fmt(r.dx[i]);
    for (size_t i = 0; i < r.coefficient.size(); ++i) co += (i ? ";" : "") + fmt(r.coefficient[i]);
    csv.row({r.name, fmt(r.estimate.order), pw, dx, co});
  }
  return csv.str();
}

inline std::string convergence_csv(Scheme scheme, const std::vector<ConvergenceRow>& rows) {
  Csv csv({"scheme", "nx", "steps", "dt", "l2", "linf", "order", "ok", "failure"});
  for (const auto& r : rows) {
    csv.row({std::string(to_string(scheme)), std::to_string(r.nx), std::to_string(r.steps), fmt(r.dt), fmt(r.l2_error),
             fmt(r.linf_error), std::isnan(r.order) ? "" : fmt(r.order), r.ok ? "1" : "0", r.failure});
  }
  return csv.str();
}

inline std::string pso_trace_csv(const IcPair& ics) {
  Csv csv({"set", "iteration", "best_rms_vif"});
  auto add = [&](const char* set, const IcSource& s) {
    for (size_t i = 0; i < s.trace.size(); ++i) csv.row({set, std::to_string(i), fmt(s.trace[i])});
  };
  add("train", ics.train);
  add("test", ics.test);
  return csv.str();
}

inline json report_json(const ExperimentReport& r, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["name"] = r.config.name;
  j["case"] = std::string(to_string(r.config.case_id));
  j["grid"] = {{"nx", r.config.nx}, {"nt", r.config.nt}, {"dx", r.dx}, {"dt_train", r.dt_train},
               {"dt_test", r.dt_test}, {"h_train", r.h_train}, {"cfl", r.config.cfl}};
  j["seeds"] = {{"train", r.config.train_seed}, {"test", r.config.test_seed}};
  j["n_eff"] = r.n_eff;
  j["library_size"] = r.terms.size();
  j["train_rms_vif"] = r.train_rms_vif;
  j["stability_warning"] = {{"train", r.train_stability_warning}, {"test", r.test_stability_warning}};
  const auto& sel = r.selected_record();
  json terms = json::array();
  for (const auto& t : r.table) {
    json row{{"term", t.name}, {"in_model", t.in_model}, {"predicted", t.predicted}};
    if (t.analytic) {
      row["analytic"] = *t.analytic;
      row["abs_error"] = t.abs_error;
      row["rel_error"] = t.rel_error;
    }
    terms.push_back(row);
  }
  j["selected"] = {{"index", r.selected},
                   {"algorithm", sel.model.algorithm},
                   {"terms", sel.model.terms()},
                   {"correct", sel.correct},
                   {"incorrect", sel.incorrect},
                   {"bic", sel.bic},
                   {"metrics_valid", sel.metrics.valid},
                   {"mae", sel.metrics.valid ? json(sel.metrics.mae) : json(nullptr)},
                   {"mre", sel.metrics.valid ? json(sel.metrics.mre) : json(nullptr)},
                   {"coefficients", terms}};
  if (r.optimal) {
    const auto& o = r.candidates[*r.optimal];
    j["optimal"] = {{"index", *r.optimal}, {"terms", o.model.terms()}, {"same_as_selected", *r.optimal == r.selected},
                    {"mre", o.metrics.valid ? json(o.metrics.mre) : json(nullptr)}};
  } else {
    j["optimal"] = nullptr;
  }
  json bic = json::array();
  for (size_t i = 0; i < r.candidates.size(); ++i) {
    const auto& c = r.candidates[i];
    bic.push_back({{"index", i}, {"terms", c.model.terms()}, {"bic", c.bic}, {"test_rss", c.test_rss},
                   {"correct", c.correct}, {"incorrect", c.incorrect}});
  }
  j["bic_table"] = bic;
  json timing = json::object();
  for (const auto& [stage, sec] : r.timings) timing[stage] = sec;
  j["timing_seconds"] = timing;
  j["warnings"] = r.warnings;
  j["initial_conditions"] = ics_json(r.ics);
  return j;
}

}  // namespace site::io
