#include <gtest/gtest.h>

#include "site/io.hpp"
#include "site/pipeline.hpp"

namespace {

site::PipelineConfig tiny() {
  site::PipelineConfig c;
  c.name = "tiny";
  c.nx = 60;
  c.nt = 13;
  c.cfl = 0.05;
  c.library.max_single_derivative_order = 4;
  c.library.max_u_power = 2;
  c.library.pad_t = 4;
  c.train_knots = 7;
  c.test_knots = 5;
  c.spline_degree = 4;
  c.swarm.particles = 4;
  c.swarm.iterations = 2;
  c.grids.foba_epsilon = site::log_grid(1e-20, 1e-2, 12);
  return c;
}

}  // namespace

TEST(Pipeline, SameSeedGivesIdenticalArtifacts) {
  const auto cfg = tiny();
  const auto a = site::run_site(cfg);
  const auto b = site::run_site(cfg);
  EXPECT_EQ(site::io::coefficients_csv(a), site::io::coefficients_csv(b));
  EXPECT_EQ(site::io::models_csv(a), site::io::models_csv(b));
  EXPECT_EQ(site::io::pso_trace_csv(a.ics), site::io::pso_trace_csv(b.ics));
  EXPECT_EQ(site::io::ics_json(a.ics).dump(), site::io::ics_json(b.ics).dump());
}

TEST(Pipeline, PhysicalCoefficientsMatchRawLeastSquares) {
  const auto cfg = tiny();
  const auto ics = site::prepare_ics(cfg);
  const auto rep = site::run_site(cfg, ics);
  const auto train = site::make_dataset(cfg, ics.train.values(cfg.nx));
  for (const auto& r : rep.candidates) {
    if (r.model.support.empty() || !r.model.refit_ols) continue;
    const auto fit = site::ols(site::detail::select_columns(train.library.theta, r.model.support), train.library.target);
    for (size_t k = 0; k < r.model.support.size(); ++k) {
      const double want = fit.coefficients[static_cast<Eigen::Index>(k)];
      EXPECT_NEAR(r.physical[r.model.support[k]], want, 1e-7 * std::abs(want)) << rep.term_names[r.model.support[k]];
    }
  }
}

TEST(Pipeline, GaussAdvectionFindsLeadingTerms) {
  auto cfg = tiny();
  cfg.ic_mode = site::IcMode::Gauss;
  const auto rep = site::run_site(cfg);
  const auto& sel = rep.selected_record();
  EXPECT_EQ(sel.incorrect, 0);
  EXPECT_GE(sel.correct, 2);
  ASSERT_FALSE(rep.table.empty());
  EXPECT_EQ(rep.table.front().name, "u_x");
  EXPECT_LT(rep.table.front().rel_error, 1e-4);
  EXPECT_TRUE(rep.ics.train.gauss);
  EXPECT_FALSE(rep.ics.test.gauss);
  std::vector<std::string> stages;
  for (const auto& [s, t] : rep.timings) stages.push_back(s);
  EXPECT_EQ(stages, (std::vector<std::string>{"simulate_train", "simulate_test", "vif", "regression", "selection"}));
}

TEST(Pipeline, ComparisonAndResolutionStudies) {
  const auto cfg = tiny();
  const auto ics = site::prepare_ics(cfg);
  const auto rows = site::algorithm_comparison(cfg, {site::Algorithm::FoBa, site::Algorithm::Lasso},
                                               {{site::IcMode::SplineOptimized, ics}}, {false, true});
  bool saw[2][2] = {};
  for (const auto& r : rows) saw[r.algorithm == site::Algorithm::Lasso][r.puffer] = true;
  EXPECT_TRUE(saw[0][0] && saw[0][1] && saw[1][0] && saw[1][1]);
  const auto res = site::resolution_study(cfg, ics, {40, 60}, {5, 13}, 2);
  ASSERT_EQ(res.size(), 4u);
  EXPECT_FALSE(res[0].ok);
  EXPECT_NE(res[0].failure.find("pad_t"), std::string::npos);
  EXPECT_TRUE(res[2].ok);
  EXPECT_TRUE(res[3].ok);
  EXPECT_EQ(res[3].nx, 60);
  EXPECT_EQ(res[3].bic_terms, site::run_site(cfg, ics).selected_record().model.terms());
}

TEST(Pipeline, StageFailuresNameTheStage) {
  std::vector<std::pair<std::string, double>> sink;
  site::detail::StageTimer timer(sink);
  EXPECT_EQ(timer.run("ok", [] { return 3; }), 3);
  try {
    timer.run("boom", []() -> int { throw std::runtime_error("bad input"); });
    FAIL();
  } catch (const site::Error& e) {
    EXPECT_NE(std::string(e.what()).find("stage 'boom' failed: bad input"), std::string::npos);
  }
  ASSERT_EQ(sink.size(), 1u);
  EXPECT_EQ(sink[0].first, "ok");
}

TEST(Pipeline, InvalidConfigRejectedBeforeWork) {
  auto cfg = tiny();
  cfg.nt = 6;
  EXPECT_THROW(site::run_site(cfg), site::InvalidArgument);
  cfg = tiny();
  cfg.ic_mode = site::IcMode::Provided;
  EXPECT_THROW(site::prepare_ics(cfg), site::InvalidArgument);
}

TEST(Pipeline, TestDataSharesTheTrainingTimeStep) {
  auto cfg = tiny();
  cfg.case_id = site::CaseId::BurgersMacCormack;
  cfg.cfl = 0.5;
  cfg.library.max_single_derivative_order = 3;
  cfg.library.max_cumulative_product_order = 3;
  cfg.library.max_u_power = 3;
  const auto ics = site::prepare_ics(cfg);
  const auto rep = site::run_site(cfg, ics);
  EXPECT_EQ(rep.dt_test, rep.dt_train);
  const auto own = site::make_dataset(cfg, ics.test.values(cfg.nx));
  EXPECT_NE(own.field.grid.dt, rep.dt_train);
}
