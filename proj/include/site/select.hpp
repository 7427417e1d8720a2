#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "site/error.hpp"
#include "site/library.hpp"
#include "site/oracle.hpp"
#include "site/regress.hpp"

namespace site {

struct ModelScore {
  SparseModel model;
  /// Physical coefficients used on the test system.
  Eigen::VectorXd coefficients;
  double bic = 0.0;
  double n_eff = 0.0;
  double test_residual_sq = 0.0;
  int k = 0;
};

/// BIC = -(n_eff/2) log(RSS_test) - (k/2) log(n_eff).
inline double bic_value(double rss, int k, double n_eff) {
  return -0.5 * n_eff * std::log(std::max(rss, 1e-300)) - 0.5 * k * std::log(n_eff);
}

/// Score trained physical coefficients on an independent test library
/// (no refit on the test data).
inline ModelScore bic_score(const SparseModel& model, const Eigen::VectorXd& physical_coefficients,
                            const CandidateLibrary& test, double n_eff) {
  if (!(n_eff > 1.0)) throw InvalidArgument("bic_score: n_eff must exceed 1");
  if (physical_coefficients.size() != test.theta.cols())
    throw InvalidArgument("bic_score: coefficient length does not match the test library");
  ModelScore s;
  s.model = model;
  s.coefficients = physical_coefficients;
  s.n_eff = n_eff;
  s.k = model.terms();
  s.test_residual_sq = (test.theta * physical_coefficients - test.target).squaredNorm();
  s.bic = bic_value(s.test_residual_sq, s.k, n_eff);
  return s;
}

/// Index of the BIC maximizer; ties go to fewer terms, then smaller test residual.
inline size_t select_best(const std::vector<ModelScore>& scores) {
  if (scores.empty()) throw InvalidArgument("select_best: no models");
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    const auto& a = scores[i];
    const auto& b = scores[best];
    if (a.bic > b.bic || (a.bic == b.bic && (a.k < b.k || (a.k == b.k && a.test_residual_sq < b.test_residual_sq))))
      best = i;
  }
  return best;
}

/// Model with no incorrect terms and the most correct terms (ties: smaller
/// training residual). Empty when every model contains an incorrect term or
/// no model has a correct one.
inline std::optional<size_t> optimal_choice(const std::vector<SparseModel>& models, const std::vector<TermDescriptor>& terms,
                                            const AnalyticMDE& truth) {
  std::optional<size_t> best;
  size_t best_correct = 0;
  for (size_t i = 0; i < models.size(); ++i) {
    const auto cls = classify_terms(models[i], terms, truth);
    if (!cls.incorrect.empty() || cls.correct.empty()) continue;
    const size_t c = cls.correct.size();
    if (!best || c > best_correct || (c == best_correct && models[i].residual_norm < models[*best].residual_norm)) {
      best = i;
      best_correct = c;
    }
  }
  return best;
}

}  // namespace site
