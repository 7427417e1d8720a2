#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <compare>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "site/error.hpp"
#include "site/grid.hpp"
#include "site/stencils.hpp"

namespace site {

/// Symbolic identity of one candidate term: u^k * prod(d^m u/dx^m), a pure
/// time derivative d^n u/dt^n, or the intercept.
struct TermDescriptor {
  int u_power = 0;
  /// Spatial derivative orders of the product, sorted ascending.
  std::vector<int> spatial;
  int time_order = 0;
  bool intercept = false;

  static TermDescriptor constant() { return TermDescriptor{0, {}, 0, true}; }
  static TermDescriptor power(int k) { return TermDescriptor{k, {}, 0, false}; }
  static TermDescriptor product(int k, std::vector<int> orders) {
    std::sort(orders.begin(), orders.end());
    return TermDescriptor{k, std::move(orders), 0, false};
  }
  static TermDescriptor time_derivative(int n) { return TermDescriptor{0, {}, n, false}; }

  int cumulative_order() const {
    int s = 0;
    for (int m : spatial) s += m;
    return s;
  }

  auto operator<=>(const TermDescriptor&) const = default;
};

inline bool valid(const TermDescriptor& t) {
  if (t.intercept) return t.u_power == 0 && t.spatial.empty() && t.time_order == 0;
  if (t.u_power < 0 || t.time_order < 0) return false;
  if (t.time_order > 0 && (!t.spatial.empty() || t.u_power != 0)) return false;
  if (!std::is_sorted(t.spatial.begin(), t.spatial.end())) return false;
  for (int m : t.spatial)
    if (m <= 0) return false;
  return t.time_order > 0 || t.u_power > 0 || !t.spatial.empty();
}

/// Display name, e.g. "1", "u^2", "u*u_xxx", "u^2*u_x*u_xx", "u_x^3", "u_ttt".
inline std::string describe_term(const TermDescriptor& t) {
  if (t.intercept) return "1";
  if (t.time_order > 0) return "u_" + std::string(t.time_order, 't');
  std::vector<std::string> factors;
  if (t.u_power == 1) factors.emplace_back("u");
  if (t.u_power > 1) factors.push_back("u^" + std::to_string(t.u_power));
  for (size_t i = 0; i < t.spatial.size();) {
    size_t j = i;
    while (j < t.spatial.size() && t.spatial[j] == t.spatial[i]) ++j;
    std::string f = "u_" + std::string(t.spatial[i], 'x');
    if (j - i > 1) f += "^" + std::to_string(j - i);
    factors.push_back(std::move(f));
    i = j;
  }
  std::string out;
  for (size_t i = 0; i < factors.size(); ++i) out += (i ? "*" : "") + factors[i];
  return out;
}

/// Declarative description of a candidate library.
struct LibrarySpec {
  int max_single_derivative_order = 6;
  /// Products of derivatives whose orders add up to at most this (0: no products).
  int max_cumulative_product_order = 0;
  int max_u_power = 6;
  std::vector<int> time_derivatives;
  int accuracy = 8;
  int pad_t = 6;

  void validate() const {
    if (max_single_derivative_order < 1) throw InvalidArgument("library: max_single_derivative_order must be >= 1");
    if (max_cumulative_product_order < 0) throw InvalidArgument("library: max_cumulative_product_order must be >= 0");
    if (max_u_power < 0) throw InvalidArgument("library: max_u_power must be >= 0");
    if (accuracy <= 0 || accuracy % 2) throw InvalidArgument("library: accuracy must be a positive even integer");
    if (pad_t < 0) throw InvalidArgument("library: pad_t must be >= 0");
    for (int n : time_derivatives)
      if (n < 2) throw InvalidArgument("library: time derivative terms must have order >= 2");
  }
};

namespace detail {

inline void partitions(int remaining, int max_part, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    std::vector<int> p(current.rbegin(), current.rend());
    out.push_back(std::move(p));
    return;
  }
  for (int part = std::min(remaining, max_part); part >= 1; --part) {
    current.push_back(part);
    partitions(remaining - part, part, current, out);
    current.pop_back();
  }
}

}  // namespace detail

/// All integer partitions of n as ascending multisets.
inline std::vector<std::vector<int>> integer_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  if (n > 0) detail::partitions(n, n, current, out);
  return out;
}

/// Derivative multisets of a spec, ordered by cumulative order, then factor
/// count, then lexicographically.
inline std::vector<std::vector<int>> derivative_multisets(const LibrarySpec& spec) {
  std::set<std::vector<int>> unique;
  for (int m = 1; m <= spec.max_single_derivative_order; ++m) unique.insert({m});
  for (int order = 1; order <= spec.max_cumulative_product_order; ++order)
    for (auto& p : integer_partitions(order)) unique.insert(std::move(p));
  std::vector<std::vector<int>> sets(unique.begin(), unique.end());
  std::stable_sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
    const int sa = std::accumulate(a.begin(), a.end(), 0), sb = std::accumulate(b.begin(), b.end(), 0);
    if (sa != sb) return sa < sb;
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return sets;
}

/// Candidate terms: intercept, u^k (k >= 1), u^k * D for every derivative
/// multiset D and 0 <= k <= max_u_power, then bare time derivatives.
inline std::vector<TermDescriptor> enumerate_terms(const LibrarySpec& spec) {
  spec.validate();
  std::vector<TermDescriptor> terms;
  std::set<TermDescriptor> seen;
  auto add = [&](TermDescriptor t) {
    if (seen.insert(t).second) terms.push_back(std::move(t));
  };
  add(TermDescriptor::constant());
  for (int k = 1; k <= spec.max_u_power; ++k) add(TermDescriptor::power(k));
  for (const auto& d : derivative_multisets(spec))
    for (int k = 0; k <= spec.max_u_power; ++k) add(TermDescriptor::product(k, d));
  for (int n : spec.time_derivatives) add(TermDescriptor::time_derivative(n));
  return terms;
}

/// Assembled regression system u_t = Theta xi.
struct CandidateLibrary {
  std::vector<TermDescriptor> terms;
  Eigen::MatrixXd theta;
  Eigen::VectorXd target;
  /// (time level, space index) of every row; rows are time-major.
  std::vector<std::pair<int, int>> sample_index;
  Grid1D grid;

  Eigen::Index samples() const { return theta.rows(); }
  Eigen::Index size() const { return theta.cols(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(describe_term(t));
    return out;
  }

  /// Column index of a term, or -1.
  int index_of(const TermDescriptor& t) const {
    const auto it = std::find(terms.begin(), terms.end(), t);
    return it == terms.end() ? -1 : static_cast<int>(it - terms.begin());
  }
};

namespace detail {

inline Eigen::VectorXd flatten_time_major(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[k++] = m(r, c);
  return v;
}

}  // namespace detail

/// Evaluate the candidate library on a solution field. Spatial derivatives are
/// periodic; temporal derivatives use only levels with a full centered stencil.
inline CandidateLibrary build_library(const SolutionField& field, const LibrarySpec& spec,
                                      const std::vector<TermDescriptor>& terms) {
  spec.validate();
  const int nt = field.grid.nt;
  const int kept = retained_levels(nt, spec.pad_t);
  if (kept < 1) {
    throw InvalidArgument("library: pad_t=" + std::to_string(spec.pad_t) + " needs at least " +
                          std::to_string(2 * spec.pad_t + 1) + " levels, field has " + std::to_string(nt));
  }
  int widest_time = centered_stencil(1, spec.accuracy).half_width();
  for (const auto& t : terms)
    if (t.time_order > 0) widest_time = std::max(widest_time, centered_stencil(t.time_order, spec.accuracy).half_width());
  if (widest_time > spec.pad_t) {
    throw InvalidArgument("library: pad_t=" + std::to_string(spec.pad_t) +
                          " is below the temporal stencil half-width " + std::to_string(widest_time));
  }

  const Eigen::MatrixXd u = field.values.middleRows(spec.pad_t, kept);
  std::map<int, Eigen::VectorXd> spatial;
  std::map<int, Eigen::VectorXd> temporal;
  std::map<int, Eigen::VectorXd> powers;
  const Eigen::VectorXd u_flat = detail::flatten_time_major(u);
  for (const auto& t : terms) {
    if (!valid(t)) throw InvalidArgument("library: invalid term descriptor " + describe_term(t));
    for (int m : t.spatial)
      if (!spatial.count(m)) spatial[m] = detail::flatten_time_major(spatial_derivative(u, field.grid.dx, m, spec.accuracy));
    if (t.time_order > 0 && !temporal.count(t.time_order))
      temporal[t.time_order] = detail::flatten_time_major(
          temporal_derivative(field.values, field.grid.dt, t.time_order, spec.accuracy, spec.pad_t));
  }
  auto u_power = [&](int k) -> const Eigen::VectorXd& {
    auto it = powers.find(k);
    if (it != powers.end()) return it->second;
    Eigen::VectorXd p = Eigen::VectorXd::Ones(u_flat.size());
    for (int i = 0; i < k; ++i) p.array() *= u_flat.array();
    return powers.emplace(k, std::move(p)).first->second;
  };

  CandidateLibrary lib;
  lib.terms = terms;
  lib.grid = field.grid;
  const Eigen::Index n = u_flat.size();
  lib.theta.resize(n, static_cast<Eigen::Index>(terms.size()));
  for (size_t c = 0; c < terms.size(); ++c) {
    const auto& t = terms[c];
    Eigen::VectorXd col;
    if (t.intercept) {
      col = Eigen::VectorXd::Ones(n);
    } else if (t.time_order > 0) {
      col = temporal.at(t.time_order);
    } else {
      col = u_power(t.u_power);
      for (int m : t.spatial) col.array() *= spatial.at(m).array();
    }
    lib.theta.col(static_cast<Eigen::Index>(c)) = col;
  }
  lib.target =
      detail::flatten_time_major(temporal_derivative(field.values, field.grid.dt, 1, spec.accuracy, spec.pad_t));
  lib.sample_index.reserve(static_cast<size_t>(n));
  for (int k = 0; k < kept; ++k)
    for (int i = 0; i < field.grid.nx; ++i) lib.sample_index.emplace_back(spec.pad_t + k, i);
  return lib;
}

inline CandidateLibrary build_library(const SolutionField& field, const LibrarySpec& spec) {
  return build_library(field, spec, enumerate_terms(spec));
}

}  // namespace site
