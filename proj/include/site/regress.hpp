#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "site/error.hpp"

namespace site {

/// One candidate model u_t ~ Theta xi.
struct SparseModel {
  std::string algorithm;
  /// Ascending column indices with nonzero coefficients.
  std::vector<int> support;
  /// Full-length coefficient vector, exactly zero off support.
  Eigen::VectorXd coefficients;
  std::vector<std::pair<std::string, double>> hyperparameters;
  /// ||Theta xi - target||_2 on the system the model was fit on.
  double residual_norm = 0.0;
  bool refit_ols = false;
  bool converged = true;
  bool rank_deficient = false;

  int terms() const { return static_cast<int>(support.size()); }
};

struct SweepResult {
  std::string algorithm;
  std::vector<SparseModel> models;
  /// Every hyperparameter point tried, in sweep order.
  std::vector<std::vector<std::pair<std::string, double>>> grid;
};

/// Least-squares problem min ||Theta xi - y|| compressed by a Householder QR:
/// ||Theta xi - y||^2 = ||R xi - c||^2 + rss_perp.
struct ReducedSystem {
  Eigen::MatrixXd r;
  Eigen::VectorXd c;
  double rss_perp = 0.0;
  double target_sq = 0.0;
  Eigen::Index samples = 0;

  Eigen::Index cols() const { return r.cols(); }
  double rss(const Eigen::VectorXd& xi) const { return (r * xi - c).squaredNorm() + rss_perp; }
};

inline ReducedSystem reduce_system(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (theta.rows() != y.size()) throw InvalidArgument("regression: Theta and target have different row counts");
  if (theta.cols() == 0) throw InvalidArgument("regression: empty library");
  if (!theta.allFinite() || !y.allFinite()) throw InvalidArgument("regression: non-finite entries in the system");
  ReducedSystem s;
  s.samples = theta.rows();
  s.target_sq = y.squaredNorm();
  const Eigen::Index n = theta.rows(), p = theta.cols();
  if (n <= p) {
    s.r = theta;
    s.c = y;
    return s;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(theta);
  s.r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::VectorXd qty = qr.householderQ().transpose() * y;
  s.c = qty.head(p);
  s.rss_perp = qty.tail(n - p).squaredNorm();
  return s;
}

struct OlsResult {
  Eigen::VectorXd coefficients;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

/// Least squares by complete orthogonal decomposition; least-norm solution
/// when Theta is rank deficient.
inline OlsResult ols(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (theta.rows() != y.size()) throw InvalidArgument("ols: Theta and target have different row counts");
  OlsResult out;
  if (theta.cols() == 0) return out;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(theta);
  out.coefficients = cod.solve(y);
  out.rank = cod.rank();
  out.rank_deficient = out.rank < theta.cols();
  return out;
}

/// argmin 1/2 ||Theta xi - y||^2 + lambda ||xi||^2, i.e. (Theta^T Theta + 2 lambda I) xi = Theta^T y,
/// solved as the augmented least-squares problem [Theta; sqrt(2 lambda) I].
inline Eigen::VectorXd ridge(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                             double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("ridge: lambda must be non-negative");
  if (lambda == 0.0) return ols(theta, y).coefficients;
  const Eigen::Index n = theta.rows(), p = theta.cols();
  Eigen::MatrixXd a(n + p, p);
  a.topRows(n) = theta;
  a.bottomRows(p) = std::sqrt(2.0 * lambda) * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + p);
  b.head(n) = y;
  return a.householderQr().solve(b);
}

namespace detail {

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
  return out;
}

inline std::vector<int> nonzero_support(const Eigen::VectorXd& xi) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    if (xi[i] != 0.0) s.push_back(static_cast<int>(i));
  return s;
}

/// OLS on the given support of a reduced system; fills a complete model.
inline SparseModel refit_on_support(const ReducedSystem& sys, std::vector<int> support, std::string algorithm) {
  std::sort(support.begin(), support.end());
  SparseModel m;
  m.algorithm = std::move(algorithm);
  m.coefficients = Eigen::VectorXd::Zero(sys.cols());
  m.refit_ols = true;
  if (!support.empty()) {
    const OlsResult fit = ols(select_columns(sys.r, support), sys.c);
    m.rank_deficient = fit.rank_deficient;
    for (size_t k = 0; k < support.size(); ++k) m.coefficients[support[k]] = fit.coefficients[static_cast<Eigen::Index>(k)];
  }
  m.support = detail::nonzero_support(m.coefficients);
  m.residual_norm = std::sqrt(std::max(0.0, sys.rss(m.coefficients)));
  return m;
}

inline SparseModel raw_model(const ReducedSystem& sys, Eigen::VectorXd xi, std::string algorithm) {
  SparseModel m;
  m.algorithm = std::move(algorithm);
  m.coefficients = std::move(xi);
  m.support = nonzero_support(m.coefficients);
  m.residual_norm = std::sqrt(std::max(0.0, sys.rss(m.coefficients)));
  return m;
}

inline void warn_if_not_unit_norm(const Eigen::Ref<const Eigen::MatrixXd>& theta, const char* who) {
  for (Eigen::Index c = 0; c < theta.cols(); ++c) {
    if (std::abs(theta.col(c).norm() - 1.0) > 1e-6) {
      warn(std::string(who) + ": columns are not unit norm; hyperparameters are scale dependent");
      return;
    }
  }
}

}  // namespace detail

/// Keep one model per (support, refit flag): the one with the smallest residual.
/// Order of first appearance is preserved.
inline std::vector<SparseModel> deduplicate(const std::vector<SparseModel>& models) {
  std::vector<SparseModel> out;
  std::map<std::pair<std::vector<int>, bool>, size_t> where;
  for (const auto& m : models) {
    const auto key = std::make_pair(m.support, m.refit_ols);
    auto it = where.find(key);
    if (it == where.end()) {
      where.emplace(key, out.size());
      out.push_back(m);
    } else if (m.residual_norm < out[it->second].residual_norm) {
      out[it->second] = m;
    }
  }
  return out;
}

// ---------------------------------------------------------------- Lasso

struct LassoOptions {
  int max_sweeps = 10000;
  /// Stop when max |change| <= tolerance * max(|xi|).
  double tolerance = 1e-12;
};

/// Cyclic coordinate descent for 1/2 ||Theta xi - y||^2 + lambda ||xi||_1 on the
/// Gram form (covariance updates). Returns (xi, converged).
inline std::pair<Eigen::VectorXd, bool> lasso_cd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& cov, double lambda,
                                                 Eigen::VectorXd xi, const LassoOptions& opt = {}) {
  const Eigen::Index p = gram.rows();
  // grad = cov - gram * xi, kept up to date after every coordinate change.
  Eigen::VectorXd grad = cov - gram * xi;
  auto soft = [](double z, double t) { return z > t ? z - t : (z < -t ? z + t : 0.0); };
  auto sweep = [&](bool active_only) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (active_only && xi[j] == 0.0) continue;
      const double gjj = gram(j, j);
      if (gjj <= 0.0) continue;
      const double old = xi[j];
      const double z = grad[j] + gjj * old;
      const double fresh = soft(z, lambda) / gjj;
      if (fresh != old) {
        grad -= gram.col(j) * (fresh - old);
        xi[j] = fresh;
        change = std::max(change, std::abs(fresh - old));
      }
    }
    return change;
  };
  auto small = [&](double change) { return change <= opt.tolerance * std::max(xi.cwiseAbs().maxCoeff(), 1e-300); };
  int sweeps = 0;
  while (sweeps < opt.max_sweeps) {
    ++sweeps;
    if (small(sweep(false))) return {xi, true};
    while (sweeps < opt.max_sweeps) {
      ++sweeps;
      if (small(sweep(true))) break;
    }
  }
  return {xi, false};
}

/// Lasso path over `lambdas` (absolute values), warm-started from the
/// largest lambda. Each point yields the raw Lasso model and its OLS refit.
inline SweepResult lasso_sweep(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                               std::vector<double> lambdas, const LassoOptions& opt = {}) {
  detail::warn_if_not_unit_norm(theta, "lasso");
  const ReducedSystem sys = reduce_system(theta, y);
  const Eigen::MatrixXd gram = sys.r.transpose() * sys.r;
  const Eigen::VectorXd cov = sys.r.transpose() * sys.c;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  SweepResult res;
  res.algorithm = "lasso";
  std::vector<SparseModel> all;
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(sys.cols());
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0)) throw InvalidArgument("lasso: lambda must be non-negative");
    res.grid.push_back({{"lambda", lambda}});
    auto [sol, ok] = lasso_cd(gram, cov, lambda, xi, opt);
    xi = sol;
    SparseModel raw = detail::raw_model(sys, sol, "lasso");
    raw.converged = ok;
    raw.hyperparameters = {{"lambda", lambda}};
    SparseModel refit = detail::refit_on_support(sys, raw.support, "lasso");
    refit.converged = ok;
    refit.hyperparameters = raw.hyperparameters;
    all.push_back(std::move(raw));
    all.push_back(std::move(refit));
  }
  res.models = deduplicate(all);
  return res;
}

// ---------------------------------------------------------------- STRidge

struct STRidgeOptions {
  int max_iterations = 100;
};

namespace detail {

inline Eigen::VectorXd reduced_ridge(const ReducedSystem& sys, const std::vector<int>& support, double lambda) {
  const Eigen::MatrixXd a = select_columns(sys.r, support);
  return ridge(a, sys.c, lambda);
}

}  // namespace detail

/// Sequentially thresholded ridge regression for one (lambda, tol) pair.
inline SparseModel stridge(const ReducedSystem& sys, double lambda, double tol, const STRidgeOptions& opt = {}) {
  if (!(tol >= 0.0)) throw InvalidArgument("stridge: tol must be non-negative");
  std::vector<int> support(static_cast<size_t>(sys.cols()));
  for (size_t i = 0; i < support.size(); ++i) support[i] = static_cast<int>(i);
  bool stable = false;
  for (int it = 0; it < opt.max_iterations && !support.empty(); ++it) {
    const Eigen::VectorXd xi = detail::reduced_ridge(sys, support, lambda);
    std::vector<int> keep;
    for (size_t k = 0; k < support.size(); ++k)
      if (std::abs(xi[static_cast<Eigen::Index>(k)]) >= tol) keep.push_back(support[k]);
    if (keep.size() == support.size()) {
      stable = true;
      break;
    }
    support = std::move(keep);
  }
  SparseModel m = detail::refit_on_support(sys, support, "stridge");
  m.converged = stable || support.empty();
  m.hyperparameters = {{"lambda", lambda}, {"tol", tol}};
  return m;
}

/// STRidge over the Cartesian product of the grids (absolute values).
inline SweepResult stridge_sweep(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                                 const std::vector<double>& lambdas, const std::vector<double>& tols,
                                 const STRidgeOptions& opt = {}) {
  const ReducedSystem sys = reduce_system(theta, y);
  SweepResult res;
  res.algorithm = "stridge";
  std::vector<SparseModel> all;
  for (double lambda : lambdas) {
    for (double tol : tols) {
      res.grid.push_back({{"lambda", lambda}, {"tol", tol}});
      all.push_back(stridge(sys, lambda, tol, opt));
    }
  }
  res.models = deduplicate(all);
  return res;
}

// ---------------------------------------------------------------- SR3

struct SR3Options {
  int max_iterations = 10000;
  double tolerance = 1e-12;
};

/// Relaxed system (F_gamma, g_gamma) obtained by eliminating xi from the SR3
/// objective: min_w ||F_gamma w - g_gamma||^2 with H = Theta^T Theta + gamma I,
/// F = [gamma Theta H^-1; sqrt(gamma)(I - gamma H^-1)],
/// g = [(I - Theta H^-1 Theta^T) y; sqrt(gamma) H^-1 Theta^T y].
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> sr3_relaxed_system(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                                                      const Eigen::Ref<const Eigen::VectorXd>& y,
                                                                      double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("sr3: gamma must be positive");
  const Eigen::Index n = theta.rows(), p = theta.cols();
  const Eigen::MatrixXd h = theta.transpose() * theta + gamma * Eigen::MatrixXd::Identity(p, p);
  const Eigen::LLT<Eigen::MatrixXd> llt(h);
  const Eigen::MatrixXd hinv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd f(n + p, p);
  f.topRows(n) = gamma * theta * hinv;
  f.bottomRows(p) = std::sqrt(gamma) * (Eigen::MatrixXd::Identity(p, p) - gamma * hinv);
  Eigen::VectorXd g(n + p);
  const Eigen::VectorXd hty = llt.solve(theta.transpose() * y);
  g.head(n) = y - theta * hty;
  g.tail(p) = std::sqrt(gamma) * hty;
  return {f, g};
}

/// SR3 with an L0 regularizer: minimize
/// 1/2 ||Theta xi - y||^2 + lambda ||w||_0 + gamma/2 ||xi - w||^2 by alternating
/// exact xi-updates and hard thresholding of w at sqrt(2 lambda / gamma).
inline SparseModel sr3(const ReducedSystem& sys, double lambda, double gamma, const SR3Options& opt = {}) {
  if (!(lambda >= 0.0)) throw InvalidArgument("sr3: lambda must be non-negative");
  if (!(gamma > 0.0)) throw InvalidArgument("sr3: gamma must be positive");
  const Eigen::Index p = sys.cols();
  // (Theta^T Theta + gamma I) = T^T T with T from the QR of [R; sqrt(gamma) I].
  Eigen::MatrixXd aug(sys.r.rows() + p, p);
  aug.topRows(sys.r.rows()) = sys.r;
  aug.bottomRows(p) = std::sqrt(gamma) * Eigen::MatrixXd::Identity(p, p);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(aug);
  const Eigen::MatrixXd t = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const auto tri = t.triangularView<Eigen::Upper>();
  const Eigen::VectorXd rhs0 = sys.r.transpose() * sys.c;
  const double threshold = std::sqrt(2.0 * lambda / gamma);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p), xi = Eigen::VectorXd::Zero(p);
  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::VectorXd next = rhs0 + gamma * w;
    tri.transpose().solveInPlace(next);
    tri.solveInPlace(next);
    Eigen::VectorXd w_next = next;
    for (Eigen::Index i = 0; i < p; ++i)
      if (std::abs(w_next[i]) <= threshold) w_next[i] = 0.0;
    const double change = (next - xi).cwiseAbs().maxCoeff();
    const bool same_support = ((w_next.array() != 0.0) == (w.array() != 0.0)).all();
    xi = std::move(next);
    w = std::move(w_next);
    if (it > 0 && same_support && change <= opt.tolerance * std::max(xi.cwiseAbs().maxCoeff(), 1e-300)) {
      converged = true;
      break;
    }
  }
  SparseModel m = detail::refit_on_support(sys, detail::nonzero_support(w), "sr3");
  m.converged = converged;
  m.hyperparameters = {{"lambda", lambda}, {"gamma", gamma}};
  return m;
}

inline SweepResult sr3_sweep(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                             const std::vector<double>& lambdas, const std::vector<double>& gammas,
                             const SR3Options& opt = {}) {
  const ReducedSystem sys = reduce_system(theta, y);
  SweepResult res;
  res.algorithm = "sr3";
  std::vector<SparseModel> all;
  for (double gamma : gammas) {
    for (double lambda : lambdas) {
      res.grid.push_back({{"lambda", lambda}, {"gamma", gamma}});
      all.push_back(sr3(sys, lambda, gamma, opt));
    }
  }
  res.models = deduplicate(all);
  return res;
}

// ---------------------------------------------------------------- FoBa

struct FobaOptions {
  double epsilon = 1e-10;
  /// Backward elimination is attempted after this many forward steps.
  int backward_frequency = 1;
  /// Columns whose part orthogonal to the support is below this fraction of
  /// their norm are treated as dependent and never added.
  double dependence_tolerance = 1e-12;
  /// 0: no limit besides min(n, p).
  int max_terms = 0;
};

struct FobaStep {
  bool forward = true;
  int feature = -1;
  /// Residual sum-of-squares decrease (forward) or increase (backward).
  double change = 0.0;
};

namespace detail {

/// Greedy state on a reduced system: orthonormal basis Q of the support
/// columns and the residualized library W = (I - Q Q^T) R.
class FobaState {
 public:
  explicit FobaState(const ReducedSystem& sys) : sys_(sys) {
    norms_ = sys.r.colwise().norm().transpose();
    rebuild();
  }

  const std::vector<int>& support() const { return support_; }

  /// Best forward candidate as (feature, rss decrease); feature -1 if none.
  std::pair<int, double> best_forward(double dep_tol) const {
    int best = -1;
    double gain = -1.0;
    for (Eigen::Index j = 0; j < w_.cols(); ++j) {
      if (in_support(static_cast<int>(j))) continue;
      const double nrm = w_.col(j).norm();
      if (!(nrm > dep_tol * norms_[j]) || nrm == 0.0) continue;
      const double proj = w_.col(j).dot(resid_);
      const double g = proj * proj / (nrm * nrm);
      if (g > gain) {
        gain = g;
        best = static_cast<int>(j);
      }
    }
    return {best, gain};
  }

  void add(int j) {
    Eigen::VectorXd q = w_.col(j);
    q /= q.norm();
    // Second orthogonalization pass keeps Q orthonormal to working precision.
    for (Eigen::Index k = 0; k < q_.cols(); ++k) q -= q_.col(k) * q_.col(k).dot(q);
    q /= q.norm();
    q_.conservativeResize(sys_.r.rows(), q_.cols() + 1);
    q_.col(q_.cols() - 1) = q;
    support_.push_back(j);
    w_ -= q * (q.transpose() * w_);
    w_ -= q * (q.transpose() * w_);
    resid_ -= q * q.dot(resid_);
    resid_ -= q * q.dot(resid_);
  }

  /// Cheapest removal as (position in support, rss increase).
  std::pair<int, double> best_backward() const {
    const Eigen::Index k = static_cast<Eigen::Index>(support_.size());
    if (k == 0) return {-1, 0.0};
    const Eigen::MatrixXd a = select_columns(sys_.r, support_);
    const Eigen::MatrixXd rr = (q_.transpose() * a).triangularView<Eigen::Upper>();
    const Eigen::VectorXd coef = rr.triangularView<Eigen::Upper>().solve(q_.transpose() * sys_.c);
    const Eigen::MatrixXd rinv = rr.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    int best = -1;
    double inc = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
      const double d = coef[i] * coef[i] / rinv.row(i).squaredNorm();
      if (d < inc || (best >= 0 && d == inc && support_[i] < support_[best])) {
        inc = d;
        best = static_cast<int>(i);
      }
    }
    return {best, inc};
  }

  void remove_at(int pos) {
    support_.erase(support_.begin() + pos);
    rebuild();
  }

 private:
  bool in_support(int j) const { return std::find(support_.begin(), support_.end(), j) != support_.end(); }

  void rebuild() {
    const std::vector<int> order = support_;
    support_.clear();
    q_.resize(sys_.r.rows(), 0);
    w_ = sys_.r;
    resid_ = sys_.c;
    for (int j : order) add(j);
  }

  const ReducedSystem& sys_;
  Eigen::VectorXd norms_;
  std::vector<int> support_;
  Eigen::MatrixXd q_, w_;
  Eigen::VectorXd resid_;
};

}  // namespace detail

/// Adaptive forward-backward greedy selection. A forward step adds the
/// column with the largest residual-sum-of-squares decrease delta and stops
/// when delta < epsilon; a backward step deletes the column whose removal
/// costs least if that cost is below half the decrease of the latest
/// surviving forward step. Final coefficients are an OLS refit.
inline SparseModel foba(const ReducedSystem& sys, const FobaOptions& opt, std::vector<FobaStep>* log = nullptr) {
  if (!(opt.epsilon > 0.0)) throw InvalidArgument("foba: epsilon must be positive");
  if (opt.backward_frequency < 1) throw InvalidArgument("foba: backward_frequency must be >= 1");
  detail::FobaState state(sys);
  const int limit = static_cast<int>(std::min<Eigen::Index>(
      opt.max_terms > 0 ? opt.max_terms : sys.cols(), std::min(sys.cols(), std::max<Eigen::Index>(sys.r.rows(), 1))));
  std::vector<double> gains;  // forward decrease for each support size
  int forward_since_backward = 0;
  const int step_cap = 10 * static_cast<int>(sys.cols()) + 100;
  bool converged = false;
  for (int step = 0; step < step_cap; ++step) {
    if (static_cast<int>(state.support().size()) >= limit) {
      converged = true;
      break;
    }
    const auto [j, gain] = state.best_forward(opt.dependence_tolerance);
    if (j < 0 || gain < opt.epsilon) {
      converged = true;
      break;
    }
    state.add(j);
    gains.push_back(gain);
    if (log) log->push_back({true, j, gain});
    if (++forward_since_backward < opt.backward_frequency) continue;
    forward_since_backward = 0;
    while (state.support().size() > 1) {
      const auto [pos, inc] = state.best_backward();
      if (!(inc < 0.5 * gains.back())) break;
      const int feature = state.support()[static_cast<size_t>(pos)];
      state.remove_at(pos);
      gains.pop_back();
      if (log) log->push_back({false, feature, inc});
    }
  }
  SparseModel m = detail::refit_on_support(sys, state.support(), "foba");
  m.converged = converged;
  m.hyperparameters = {{"epsilon", opt.epsilon}};
  return m;
}

inline SparseModel foba(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                        const FobaOptions& opt, std::vector<FobaStep>* log = nullptr) {
  return foba(reduce_system(theta, y), opt, log);
}

/// One FoBa run per epsilon (absolute values, processed in descending order).
inline SweepResult foba_sweep(const Eigen::Ref<const Eigen::MatrixXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& y,
                              std::vector<double> epsilons, FobaOptions base = {}) {
  const ReducedSystem sys = reduce_system(theta, y);
  std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
  SweepResult res;
  res.algorithm = "foba";
  std::vector<SparseModel> all;
  for (double eps : epsilons) {
    res.grid.push_back({{"epsilon", eps}});
    base.epsilon = eps;
    all.push_back(foba(sys, base));
  }
  res.models = deduplicate(all);
  return res;
}

/// n log-spaced values from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw InvalidArgument("log_grid: need 0 < lo <= hi and n >= 1");
  std::vector<double> g(static_cast<size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  return g;
}

}  // namespace site
