#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "site/error.hpp"
#include "site/grid.hpp"
#include "site/library.hpp"
#include "site/regress.hpp"

namespace site {

enum class CaseId { AdvectionFTBS, BurgersMacCormack, KdVZabuskyKruskal };

inline std::string_view to_string(CaseId c) {
  switch (c) {
    case CaseId::AdvectionFTBS: return "advection";
    case CaseId::BurgersMacCormack: return "burgers";
    case CaseId::KdVZabuskyKruskal: return "kdv";
  }
  return "?";
}

inline CaseId case_from_string(std::string_view s) {
  if (s == "advection" || s == "advection_ftbs") return CaseId::AdvectionFTBS;
  if (s == "burgers" || s == "burgers_maccormack") return CaseId::BurgersMacCormack;
  if (s == "kdv" || s == "kdv_zabusky_kruskal") return CaseId::KdVZabuskyKruskal;
  throw InvalidArgument("unknown case '" + std::string(s) + "' (expected advection, burgers or kdv)");
}

inline Scheme scheme_of(CaseId c) {
  switch (c) {
    case CaseId::AdvectionFTBS: return Scheme::FTBS;
    case CaseId::BurgersMacCormack: return Scheme::MacCormack;
    case CaseId::KdVZabuskyKruskal: return Scheme::ZabuskyKruskal;
  }
  throw InvalidArgument("unknown case");
}

/// Truncation-error coefficients of a scheme written as u_t = sum c_T * T.
struct AnalyticMDE {
  CaseId case_id = CaseId::AdvectionFTBS;
  std::map<TermDescriptor, double> coefficients;
  /// Highest power of dx retained.
  int truncation_order = 0;

  bool contains(const TermDescriptor& t) const { return coefficients.count(t) != 0; }
  double at(const TermDescriptor& t) const {
    auto it = coefficients.find(t);
    if (it == coefficients.end()) throw InvalidArgument("analytic MDE has no term " + describe_term(t));
    return it->second;
  }
};

/// Closed-form MDE coefficients. h = dt/dx; `a` is the advection speed.
///
/// FTBS advection (third MDE, through dx^5):
///   u_t = -a u_x + dx (a - a^2 h)/2 u_xx + dx^2 (-a + 3a^2h - 2a^3h^2)/6 u_xxx
///         + dx^3 (a - 7a^2h + 12a^3h^2 - 6a^4h^3)/24 u_4x
///         + dx^4 (-a + 15a^2h - 50a^3h^2 + 60a^4h^3 - 24a^5h^4)/120 u_5x
///         + dx^5 (a - 31a^2h + 180a^3h^2 - 390a^4h^3 + 360a^5h^4 - 120a^6h^5)/720 u_6x
/// MacCormack Burgers (third MDE, through dx^2) and Zabusky-Kruskal KdV
/// (first MDE, through dx^4) are listed term by term below.
inline AnalyticMDE analytic_coefficients(CaseId id, double dx, double h, double a = 1.0) {
  if (!(dx > 0.0) || !(h > 0.0)) throw InvalidArgument("analytic_coefficients: dx and h must be positive");
  AnalyticMDE m;
  m.case_id = id;
  auto d = [](int order) { return TermDescriptor::product(0, {order}); };
  switch (id) {
    case CaseId::AdvectionFTBS: {
      const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a, a6 = a5 * a;
      const double h2 = h * h, h3 = h2 * h, h4 = h3 * h, h5 = h4 * h;
      m.coefficients[d(1)] = -a;
      m.coefficients[d(2)] = dx * (a - a2 * h) / 2.0;
      m.coefficients[d(3)] = dx * dx * (-a + 3 * a2 * h - 2 * a3 * h2) / 6.0;
      m.coefficients[d(4)] = std::pow(dx, 3) * (a - 7 * a2 * h + 12 * a3 * h2 - 6 * a4 * h3) / 24.0;
      m.coefficients[d(5)] = std::pow(dx, 4) * (-a + 15 * a2 * h - 50 * a3 * h2 + 60 * a4 * h3 - 24 * a5 * h4) / 120.0;
      m.coefficients[d(6)] =
          std::pow(dx, 5) * (a - 31 * a2 * h + 180 * a3 * h2 - 390 * a4 * h3 + 360 * a5 * h4 - 120 * a6 * h5) / 720.0;
      m.truncation_order = 5;
      break;
    }
    case CaseId::BurgersMacCormack: {
      const double dx2 = dx * dx, h2 = h * h;
      m.coefficients[TermDescriptor::product(1, {1})] = -1.0;
      m.coefficients[TermDescriptor::product(1, {3})] = -dx2 / 6.0;
      m.coefficients[TermDescriptor::product(3, {3})] = dx2 * h2 / 6.0;
      m.coefficients[TermDescriptor::product(2, {1, 2})] = dx2 * h2;
      m.coefficients[TermDescriptor::product(1, {1, 2})] = -dx2 * h / 2.0;
      m.coefficients[TermDescriptor::product(0, {1, 2})] = -dx2 / 2.0;
      m.coefficients[TermDescriptor::product(1, {1, 1, 1})] = dx2 * h2 / 2.0;
      m.coefficients[TermDescriptor::product(0, {1, 1, 1})] = -dx2 * h / 4.0;
      m.truncation_order = 2;
      break;
    }
    case CaseId::KdVZabuskyKruskal: {
      const double dx2 = dx * dx, dx4 = dx2 * dx2, dt = h * dx;
      m.coefficients[TermDescriptor::product(1, {1})] = -6.0;
      m.coefficients[d(3)] = -1.0;
      m.coefficients[TermDescriptor::time_derivative(3)] = -dt * dt / 6.0;
      m.coefficients[d(5)] = -dx2 / 4.0;
      m.coefficients[TermDescriptor::product(1, {3})] = -dx2;
      m.coefficients[TermDescriptor::product(0, {1, 2})] = -2.0 * dx2;
      m.coefficients[TermDescriptor::time_derivative(5)] = -std::pow(dt, 4) / 120.0;
      m.coefficients[d(7)] = -dx4 / 40.0;
      m.coefficients[TermDescriptor::product(0, {2, 3})] = -dx4 / 3.0;
      m.coefficients[TermDescriptor::product(0, {1, 4})] = -dx4 / 6.0;
      m.coefficients[TermDescriptor::product(1, {5})] = -dx4 / 20.0;
      m.truncation_order = 4;
      break;
    }
  }
  return m;
}

struct TermClassification {
  std::vector<int> correct;
  std::vector<int> incorrect;
};

/// Split a model's support into columns that appear in the analytic MDE and columns that do not.
inline TermClassification classify_terms(const SparseModel& model, const std::vector<TermDescriptor>& terms,
                                         const AnalyticMDE& truth) {
  TermClassification c;
  for (int j : model.support) {
    if (j < 0 || j >= static_cast<int>(terms.size())) throw InvalidArgument("classify_terms: support index out of range");
    (truth.contains(terms[static_cast<size_t>(j)]) ? c.correct : c.incorrect).push_back(j);
  }
  return c;
}

struct ErrorMetrics {
  /// False when the model contains an incorrect term (or is empty); mae/mre are NaN then.
  bool valid = false;
  double mae = std::numeric_limits<double>::quiet_NaN();
  double mre = std::numeric_limits<double>::quiet_NaN();
};

/// Mean absolute and mean relative coefficient error over the model's terms.
/// `coefficients` are physical (unscaled) values indexed like `terms`.
inline ErrorMetrics mae_mre(const SparseModel& model, const Eigen::VectorXd& coefficients,
                            const std::vector<TermDescriptor>& terms, const AnalyticMDE& truth) {
  ErrorMetrics e;
  const auto cls = classify_terms(model, terms, truth);
  if (!cls.incorrect.empty() || cls.correct.empty()) return e;
  double sa = 0.0, sr = 0.0;
  for (int j : cls.correct) {
    const double exact = truth.at(terms[static_cast<size_t>(j)]);
    const double err = std::abs(coefficients[j] - exact);
    sa += err;
    sr += err / std::abs(exact);
  }
  const double k = static_cast<double>(cls.correct.size());
  e.valid = true;
  e.mae = sa / k;
  e.mre = sr / k;
  return e;
}

struct OrderEstimate {
  /// Mean of the pairwise orders that passed the sign check; NaN if none did.
  double order = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> pairwise;
  /// Indices i of pairs (i, i+1) dropped for a sign change or a zero coefficient.
  std::vector<int> excluded_pairs;
};

/// Empirical order k in xi ~ dx^k from consecutive (dx, xi) pairs, averaged.
inline OrderEstimate empirical_order(const std::vector<std::pair<double, double>>& coefs_by_dx) {
  if (coefs_by_dx.size() < 2) throw InvalidArgument("empirical_order: need at least two entries");
  OrderEstimate out;
  double sum = 0.0;
  for (size_t i = 0; i + 1 < coefs_by_dx.size(); ++i) {
    const auto [dx1, c1] = coefs_by_dx[i];
    const auto [dx2, c2] = coefs_by_dx[i + 1];
    if (!(c1 * c2 > 0.0) || dx1 == dx2) {
      out.excluded_pairs.push_back(static_cast<int>(i));
      continue;
    }
    const double k = std::log(c1 / c2) / std::log(dx1 / dx2);
    out.pairwise.push_back(k);
    sum += k;
  }
  if (!out.pairwise.empty()) out.order = sum / static_cast<double>(out.pairwise.size());
  return out;
}

}  // namespace site
