#include <gtest/gtest.h>

#include <random>

#include "site/precondition.hpp"

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = g(rng);
  return m;
}

// VIF by one explicit least-squares regression per column (with intercept).
double explicit_vif(const Eigen::MatrixXd& x, int i) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::MatrixXd others(n, p);
  others.col(0).setOnes();
  for (Eigen::Index c = 0, k = 1; c < p; ++c)
    if (c != i) others.col(k++) = x.col(c);
  const Eigen::VectorXd y = x.col(i);
  const Eigen::VectorXd beta = others.colPivHouseholderQr().solve(y);
  const double rss = (y - others * beta).squaredNorm();
  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  return 1.0 / (rss / tss);
}

site::CandidateLibrary wrap(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y) {
  site::CandidateLibrary lib;
  lib.theta = theta;
  lib.target = y;
  return lib;
}

}  // namespace

TEST(Precondition, VifMatchesExplicitRegressions) {
  Eigen::MatrixXd x = random_matrix(200, 5, 3);
  x.col(3) += 0.9 * x.col(1);
  x.col(4) = 0.5 * x.col(0) + 0.5 * x.col(2) + 0.05 * x.col(4);
  const auto vif = site::compute_vif(x);
  ASSERT_EQ(vif.values.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(vif.values[i], explicit_vif(x, i), 1e-8 * explicit_vif(x, i));
}

TEST(Precondition, VifIgnoresConstantColumnAndScale) {
  Eigen::MatrixXd x(100, 4);
  x.col(0).setOnes();
  x.rightCols(3) = random_matrix(100, 3, 5);
  const auto a = site::compute_vif(x);
  EXPECT_EQ(a.columns, (std::vector<Eigen::Index>{1, 2, 3}));
  Eigen::MatrixXd y = x;
  y.col(2) *= 1e6;
  y.col(3) *= 1e-6;
  const auto b = site::compute_vif(y);
  for (size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-8);
}

TEST(Precondition, VifOrthogonalColumnsIsOne) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 2);
  x << 1, 1, -1, 1, 1, -1, -1, -1;
  const auto vif = site::compute_vif(x);
  EXPECT_NEAR(vif.values[0], 1.0, 1e-12);
  EXPECT_NEAR(site::rms_vif(x), 1.0, 1e-12);
}

TEST(Precondition, CollinearColumnsAreCapped) {
  Eigen::MatrixXd x = random_matrix(50, 3, 7);
  x.col(2) = 2.0 * x.col(0) - x.col(1);
  const auto vif = site::compute_vif(x);
  for (double v : vif.values) EXPECT_EQ(v, 1e12);
}

TEST(Precondition, VifRejectsDegenerateInput) {
  EXPECT_THROW(site::compute_vif(Eigen::MatrixXd::Ones(5, 1)), site::InvalidArgument);
  Eigen::MatrixXd x = random_matrix(10, 3, 1);
  x.col(1).setZero();
  EXPECT_THROW(site::compute_vif(x), site::InvalidArgument);
}

TEST(Precondition, ScalingGivesUnitDiagonal) {
  Eigen::MatrixXd x = random_matrix(80, 4, 11);
  x.col(1) *= 1e-9;
  x.col(3) *= 1e5;
  const auto lib = wrap(x, x.col(0));
  const auto sys = site::scale_columns(lib);
  const Eigen::MatrixXd g = sys.theta.transpose() * sys.theta;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(g(i, i), 1.0, 1e-14);
  Eigen::VectorXd xi(4);
  xi << 1, 2, 3, 4;
  EXPECT_TRUE((sys.theta * xi).isApprox(x * sys.unscale(xi), 1e-13));
}

TEST(Precondition, ScalingRejectsZeroColumn) {
  Eigen::MatrixXd x = random_matrix(10, 3, 2);
  x.col(2).setZero();
  EXPECT_THROW(site::scale_columns(wrap(x, x.col(0))), site::InvalidArgument);
}

TEST(Precondition, PufferOrthonormalizesAndKeepsSolution) {
  Eigen::MatrixXd x = random_matrix(120, 6, 13);
  x.col(5) = x.col(4) + 1e-3 * x.col(5);
  const Eigen::VectorXd y = random_matrix(120, 1, 17).col(0);
  const auto sys = site::scale_columns(wrap(x, y));
  EXPECT_GT(site::condition_number(sys.theta), 100.0);
  const auto puf = site::puffer_transform(sys);
  EXPECT_TRUE(puf.puffer_applied);
  const Eigen::MatrixXd g = puf.theta.transpose() * puf.theta;
  EXPECT_TRUE(g.isApprox(Eigen::MatrixXd::Identity(6, 6), 1e-12));
  EXPECT_NEAR(site::condition_number(puf.theta), 1.0, 1e-10);
  const Eigen::VectorXd a = sys.theta.colPivHouseholderQr().solve(sys.target);
  const Eigen::VectorXd b = puf.theta.colPivHouseholderQr().solve(puf.target);
  EXPECT_TRUE(a.isApprox(b, 1e-8));
}

TEST(Precondition, PufferRejectsRankDeficiencyAndWideSystems) {
  Eigen::MatrixXd x = random_matrix(30, 3, 19);
  x.col(2) = x.col(0) + x.col(1);
  EXPECT_THROW(site::puffer_transform(site::scale_columns(wrap(x, x.col(0)))), site::RankDeficient);
  Eigen::MatrixXd wide = random_matrix(3, 4, 23);
  EXPECT_THROW(site::puffer_transform(site::scale_columns(wrap(wide, wide.col(0)))), site::InvalidArgument);
}

TEST(Precondition, ConditionNumber) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 4.0, 2.0, 0.5;
  EXPECT_NEAR(site::condition_number(d), 8.0, 1e-12);
  EXPECT_TRUE(std::isinf(site::condition_number(Eigen::MatrixXd::Zero(2, 2))));
}
