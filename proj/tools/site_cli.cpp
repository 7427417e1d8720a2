// Command-line front end for the SITE pipeline.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "site/io.hpp"
#include "site/pipeline.hpp"
#include "site/solvers.hpp"

#ifndef SITE_REVISION
#define SITE_REVISION "unknown"
#endif

namespace fs = std::filesystem;
using site::io::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> test_seed;
  std::string ics;
  int jobs = 1;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

fs::path output_dir(const std::string& flag, const std::string& name) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SITE_OUT_DIR"); env && *env) return fs::path(env) / name;
  return fs::path("site_out") / name;
}

class Run {
 public:
  Run(std::string command, const Common& c, fs::path out) : command_(std::move(command)), common_(c), out_(std::move(out)) {
    manifest_["command"] = command_;
    manifest_["config"] = c.config;
    manifest_["output_dir"] = out_.string();
    manifest_["seed_overrides"] = json::object();
    if (c.seed) manifest_["seed_overrides"]["train"] = *c.seed;
    if (c.test_seed) manifest_["seed_overrides"]["test"] = *c.test_seed;
    if (!c.ics.empty()) manifest_["initial_conditions"] = c.ics;
    manifest_["jobs"] = c.jobs;
    manifest_["timestamp"] = utc_now();
    manifest_["revision"] = SITE_REVISION;
    manifest_["status"] = "running";
    manifest_["outputs"] = json::array();
    manifest_["failures"] = json::array();
  }

  void set(const std::string& key, json v) { manifest_[key] = std::move(v); }
  void start() { flush(); }

  void write(const std::string& file, const std::string& content) {
    site::io::write_atomic(out_ / file, content);
    manifest_["outputs"].push_back(file);
    std::cout << "wrote " << (out_ / file).string() << '\n';
  }

  void failure(const std::string& what) { manifest_["failures"].push_back(what); }

  int finish(bool ok) {
    manifest_["status"] = ok && manifest_["failures"].empty() ? "completed" : "failed";
    flush();
    return manifest_["status"] == "completed" ? 0 : 1;
  }

 private:
  void flush() { site::io::write_atomic(out_ / "manifest.json", manifest_.dump(2) + "\n"); }

  std::string command_;
  Common common_;
  fs::path out_;
  json manifest_;
};

site::io::ExperimentConfig load(const Common& c) {
  site::io::ExperimentConfig ec = site::io::load_config(c.config);
  if (c.seed) ec.pipeline.train_seed = *c.seed;
  if (c.test_seed) ec.pipeline.test_seed = *c.test_seed;
  ec.pipeline.swarm.jobs = c.jobs;
  return ec;
}

site::IcPair obtain_ics(const Common& c, const site::PipelineConfig& cfg) {
  if (!c.ics.empty()) return site::io::load_ics(c.ics);
  std::cout << "optimizing initial conditions (" << cfg.swarm.particles << " particles x " << cfg.swarm.iterations
            << " iterations)..." << std::endl;
  return site::prepare_ics(cfg);
}

void write_ics(Run& run, const site::IcPair& ics) {
  run.write("ics.json", site::io::ics_json(ics).dump(2) + "\n");
  run.write("pso_trace.csv", site::io::pso_trace_csv(ics));
}

int cmd_run(const Common& c) {
  const auto ec = load(c);
  Run run("run", c, output_dir(c.out, ec.pipeline.name));
  const std::string hash = site::io::config_hash(ec);
  run.set("config_hash", hash);
  run.set("resolved_config", site::io::to_json(ec));
  run.start();
  const site::IcPair ics = obtain_ics(c, ec.pipeline);
  write_ics(run, ics);
  const site::ExperimentReport rep = site::run_site(ec.pipeline, ics);
  run.write("report.json", site::io::report_json(rep, hash).dump(2) + "\n");
  run.write("coefficients.csv", site::io::coefficients_csv(rep));
  run.write("models.csv", site::io::models_csv(rep));
  const auto& sel = rep.selected_record();
  std::cout << "selected " << sel.model.terms() << " terms (" << sel.correct << " correct, " << sel.incorrect
            << " incorrect)\n";
  for (const auto& t : rep.table) {
    std::cout << "  " << t.name << "  predicted " << site::io::fmt(t.predicted);
    if (t.analytic) std::cout << "  analytic " << site::io::fmt(*t.analytic) << "  rel.err " << site::io::fmt(t.rel_error);
    std::cout << '\n';
  }
  return run.finish(true);
}

int cmd_optimize(const Common& c) {
  const auto ec = load(c);
  Run run("optimize-ic", c, output_dir(c.out, ec.pipeline.name));
  run.set("config_hash", site::io::config_hash(ec));
  run.start();
  write_ics(run, site::prepare_ics(ec.pipeline));
  return run.finish(true);
}

int cmd_compare(const Common& c) {
  const auto ec = load(c);
  Run run("compare", c, output_dir(c.out, ec.pipeline.name));
  run.set("config_hash", site::io::config_hash(ec));
  run.start();
  // The spline pair (from --ics or a fresh optimization) provides the shared test IC.
  site::PipelineConfig spline_cfg = ec.pipeline;
  spline_cfg.ic_mode = site::IcMode::SplineOptimized;
  const site::IcPair spline = obtain_ics(c, spline_cfg);
  write_ics(run, spline);
  std::vector<std::pair<site::IcMode, site::IcPair>> setups;
  for (auto mode : ec.compare.ic_modes) {
    site::IcPair p = spline;
    if (mode == site::IcMode::Gauss) {
      p.train = site::IcSource{};
      p.train.gauss = true;
    } else if (mode == site::IcMode::Provided) {
      site::PipelineConfig pc = ec.pipeline;
      pc.ic_mode = mode;
      p.train = site::prepare_ics(pc).train;
    }
    setups.emplace_back(mode, p);
  }
  const auto rows = site::algorithm_comparison(ec.pipeline, ec.compare.algorithms, setups, ec.compare.puffer);
  run.write("comparison.csv", site::io::comparison_csv(rows));
  std::cout << rows.size() << " candidate models compared\n";
  return run.finish(true);
}

int cmd_study(const Common& c) {
  const auto ec = load(c);
  if (!ec.study) throw site::io::ConfigError("study: the config has no 'study' section");
  Run run("study", c, output_dir(c.out, ec.pipeline.name));
  run.set("config_hash", site::io::config_hash(ec));
  run.start();
  const site::IcPair ics = obtain_ics(c, ec.pipeline);
  write_ics(run, ics);
  bool ok = true;
  if (!ec.study->nx.empty()) {
    const auto rows = site::resolution_study(ec.pipeline, ics, ec.study->nx, ec.study->nt, c.jobs);
    run.write("resolution.csv", site::io::resolution_csv(rows));
    for (const auto& r : rows) {
      if (!r.ok) {
        ok = false;
        run.failure("nx=" + std::to_string(r.nx) + " nt=" + std::to_string(r.nt) + ": " + r.failure);
      }
    }
  }
  if (!ec.study->order_nx.empty()) {
    const auto orders = site::order_study(ec.pipeline, ics, ec.study->order_nx);
    run.write("orders.csv", site::io::orders_csv(orders));
    for (const auto& o : orders) std::cout << "  " << o.name << "  order " << site::io::fmt(o.estimate.order) << '\n';
  }
  return run.finish(ok);
}

int cmd_mms(const std::string& scheme_name, const std::vector<int>& resolutions, std::optional<double> cfl,
            std::optional<double> t_test, const std::string& out) {
  const site::Scheme scheme = site::scheme_from_string(scheme_name);
  const double cfl_value = cfl.value_or(scheme == site::Scheme::ZabuskyKruskal ? 1e-10 : 0.1);
  Common c;
  c.config = "";
  Run run("mms", c, output_dir(out, "mms_" + std::string(site::to_string(scheme))));
  run.set("scheme", std::string(site::to_string(scheme)));
  run.set("cfl", cfl_value);
  run.set("resolutions", resolutions);
  run.start();
  const auto rows = site::mms_convergence(scheme, resolutions, cfl_value, t_test);
  run.write("convergence.csv", site::io::convergence_csv(scheme, rows));
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << "  nx=" << r.nx << "  l2=" << site::io::fmt(r.l2_error);
    if (!std::isnan(r.order)) std::cout << "  order=" << r.order;
    std::cout << '\n';
    if (!r.ok) {
      ok = false;
      run.failure("nx=" + std::to_string(r.nx) + ": " + r.failure);
    }
  }
  return run.finish(ok);
}

void add_common(CLI::App* sub, Common& c, bool with_ics) {
  sub->add_option("config", c.config, "experiment configuration (JSON)")->required();
  sub->add_option("-o,--out", c.out, "output directory (default: $SITE_OUT_DIR/<name> or site_out/<name>)");
  sub->add_option("--seed", c.seed, "override the training-IC swarm seed");
  sub->add_option("--test-seed", c.test_seed, "override the test-IC swarm seed");
  sub->add_option("-j,--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  if (with_ics) sub->add_option("--ics", c.ics, "reuse initial conditions from an ics.json artifact")->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse identification of truncation errors"};
  app.require_subcommand(1);
  Common run_opts, opt_opts, cmp_opts, study_opts;
  add_common(app.add_subcommand("run", "run one pipeline and write report, coefficients and models"), run_opts, true);
  add_common(app.add_subcommand("optimize-ic", "optimize and store the training and test initial conditions"), opt_opts,
             false);
  add_common(app.add_subcommand("compare", "compare regression algorithms across IC and puffer setups"), cmp_opts, true);
  add_common(app.add_subcommand("study", "resolution study and empirical orders"), study_opts, true);

  auto* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
  std::string scheme;
  std::vector<int> resolutions{25, 50, 100, 200, 400};
  std::optional<double> cfl, t_test;
  std::string mms_out;
  mms->add_option("--scheme", scheme, "ftbs, maccormack or zabusky_kruskal")->required();
  mms->add_option("--resolutions", resolutions, "grid sizes")->delimiter(',');
  mms->add_option("--cfl", cfl, "CFL number (default 0.1; 1e-10 for zabusky_kruskal)");
  mms->add_option("--t-test", t_test, "evaluation time");
  mms->add_option("-o,--out", mms_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand("run")) return cmd_run(run_opts);
    if (app.got_subcommand("optimize-ic")) return cmd_optimize(opt_opts);
    if (app.got_subcommand("compare")) return cmd_compare(cmp_opts);
    if (app.got_subcommand("study")) return cmd_study(study_opts);
    if (app.got_subcommand("mms")) return cmd_mms(scheme, resolutions, cfl, t_test, mms_out);
  } catch (const site::io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
