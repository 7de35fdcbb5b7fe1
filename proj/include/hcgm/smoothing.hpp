#pragma once

// Quadratic (Nesterov) smoothing of the non-smooth terms:
//
//   g_beta(z) = max_y <z, y> - g*(y) - (beta/2) ||y||^2,
//   y*_beta(z) = (z - prox_{beta g}(z)) / beta = grad g_beta(z),
//
// and the smoothed objective F_beta(x) = f(x) + sum_j g_{j,beta}(A_j x).

#include "hcgm/problem.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hcgm {

inline void require_positive_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("smoothing parameter beta must be finite and > 0");
}

inline Vector y_star(const Vector& z, const NonsmoothTerm& g, double beta) {
  require_positive_beta(beta);
  return (z - g.prox(z, beta)) / beta;
}

namespace detail {

// g_beta from a precomputed prox point.
inline double g_beta_from_prox(const Vector& z, const Vector& prox, const NonsmoothTerm& g,
                               double beta) {
  if (g.kind() == TermKind::Indicator) {
    const double dist = (z - prox).norm();
    return dist * dist / (2.0 * beta);
  }
  const Vector y = (z - prox) / beta;
  const double conj = g.conjugate(y);
  if (!std::isfinite(conj)) {
    // y* is a prox output and sits in dom g* up to roundoff; fall back to
    // the envelope form g(prox) + ||z - prox||^2 / (2 beta).
    return g.value_or_distance(prox) + (z - prox).squaredNorm() / (2.0 * beta);
  }
  return z.dot(y) - conj - 0.5 * beta * y.squaredNorm();
}

}  // namespace detail

inline double g_beta_value(const Vector& z, const NonsmoothTerm& g, double beta) {
  require_positive_beta(beta);
  return detail::g_beta_from_prox(z, g.prox(z, beta), g, beta);
}

/// Per-term cache of z_j = A_j x, prox_j and y*_j at a fixed beta.
struct SmoothedState {
  double beta = 1.0;
  std::vector<Vector> z;
  std::vector<Vector> prox;
  std::vector<Vector> y;

  /// max_j ||y_j - (z_j - prox_j)/beta||
  double coherence_error() const {
    double e = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j)
      e = std::max(e, (y[j] - (z[j] - prox[j]) / beta).norm());
    return e;
  }
};

inline SmoothedState smoothed_state(const Vector& x, const CompositeProblem& p, double beta) {
  require_positive_beta(beta);
  SmoothedState s;
  s.beta = beta;
  s.z.reserve(p.terms.size());
  s.prox.reserve(p.terms.size());
  s.y.reserve(p.terms.size());
  for (const auto& t : p.terms) {
    Vector z = t.map.apply(x);
    Vector pr = t.g->prox(z, beta);
    s.y.push_back((z - pr) / beta);
    s.z.push_back(std::move(z));
    s.prox.push_back(std::move(pr));
  }
  return s;
}

/// sum_j g_{j,beta}(A_j x)
inline double g_beta_total(const CompositeProblem& p, const SmoothedState& s) {
  double total = 0.0;
  for (std::size_t j = 0; j < p.terms.size(); ++j)
    total += detail::g_beta_from_prox(s.z[j], s.prox[j], *p.terms[j].g, s.beta);
  return total;
}

inline double F_beta_value(const Vector& x, const CompositeProblem& p, double beta) {
  require_positive_beta(beta);
  double total = p.f.value(x);
  for (const auto& t : p.terms) {
    const Vector z = t.map.apply(x);
    total += detail::g_beta_from_prox(z, t.g->prox(z, beta), *t.g, beta);
  }
  return total;
}

/// grad f(x) + sum_j A_j^T y*_j
inline Vector grad_F_beta(const Vector& x, const CompositeProblem& p, double beta) {
  const SmoothedState s = smoothed_state(x, p, beta);
  Vector grad = p.f.gradient(x);
  for (std::size_t j = 0; j < p.terms.size(); ++j) grad += p.terms[j].map.adjoint(s.y[j]);
  return grad;
}

/// beta grad f(x) + sum_j A_j^T (A_j x - prox_{beta g_j}(A_j x)), i.e.
/// beta * grad_F_beta(x). Same LMO answer, no division by beta.
inline Vector lmo_direction(const Vector& x, const CompositeProblem& p, double beta,
                            const SmoothedState& s) {
  Vector v = beta * p.f.gradient(x);
  for (std::size_t j = 0; j < p.terms.size(); ++j)
    v += p.terms[j].map.adjoint(s.z[j] - s.prox[j]);
  return v;
}

inline Vector lmo_direction(const Vector& x, const CompositeProblem& p, double beta) {
  return lmo_direction(x, p, beta, smoothed_state(x, p, beta));
}

/// Objective split into the smooth value, the Lipschitz terms and the
/// feasibility gaps of the indicator terms.
struct ObjectiveReport {
  double f = 0.0;
  double lipschitz_total = 0.0;    // sum of g_j(A_j x) over Lipschitz terms
  std::vector<double> distances;   // dist(A_j x, K_j); 0 for Lipschitz terms
  bool feasible = true;
  std::optional<double> value;     // F(x) when every indicator is satisfied

  double total_distance() const {
    double s = 0.0;
    for (double d : distances) s += d * d;
    return std::sqrt(s);
  }
};

inline ObjectiveReport F_value(const Vector& x, const CompositeProblem& p, double feas_tol = 1e-12) {
  ObjectiveReport r;
  r.f = p.f.value(x);
  r.distances.reserve(p.terms.size());
  for (const auto& t : p.terms) {
    const Vector z = t.map.apply(x);
    const double v = t.g->value_or_distance(z);
    if (t.g->kind() == TermKind::Indicator) {
      r.distances.push_back(v);
      if (v > feas_tol) r.feasible = false;
    } else {
      r.distances.push_back(0.0);
      r.lipschitz_total += v;
    }
  }
  if (r.feasible) r.value = r.f + r.lipschitz_total;
  return r;
}

/// Signed slacks of the smoothing inequalities at (z1, z2); a negative slack
/// is a violation. Entries that do not apply are empty.
struct SmoothingReport {
  double descent = 0.0;                  // g_b(z1) >= g_b(z2) + <y2, z1-z2> + b/2 ||y2 - y1||^2
  std::optional<double> lower_model;     // g(z1) >= g_b(z2) + <y2, z1-z2> + b/2 ||y2||^2
  double parameter_change = 0.0;         // g_b(z1) <= g_c(z1) + (c-b)/2 ||y_b(z1)||^2
  std::optional<double> sandwich_lower;  // g(z) - g_b(z) >= 0
  std::optional<double> sandwich_upper;  // g_b(z) + b/2 L^2 - g(z) >= 0

  double worst() const {
    double w = std::min(descent, parameter_change);
    for (const auto& o : {lower_model, sandwich_lower, sandwich_upper})
      if (o) w = std::min(w, *o);
    return w;
  }
};

inline SmoothingReport verify_smoothing_properties(const NonsmoothTerm& g, double beta, double gamma,
                                                   const Vector& z1, const Vector& z2,
                                                   double feas_tol = 1e-12) {
  require_positive_beta(beta);
  require_positive_beta(gamma);
  SmoothingReport r;
  const Vector y1 = y_star(z1, g, beta);
  const Vector y2 = y_star(z2, g, beta);
  const double gb1 = g_beta_value(z1, g, beta);
  const double gb2 = g_beta_value(z2, g, beta);
  const double linear = gb2 + y2.dot(z1 - z2);

  r.descent = gb1 - (linear + 0.5 * beta * (y2 - y1).squaredNorm());
  r.parameter_change = g_beta_value(z1, g, gamma) + 0.5 * (gamma - beta) * y1.squaredNorm() - gb1;

  if (g.kind() == TermKind::Lipschitz) {
    const double g1 = g.value_or_distance(z1);
    r.lower_model = g1 - (linear + 0.5 * beta * y2.squaredNorm());
    r.sandwich_lower = g1 - gb1;
    const double lg = g.lipschitz();
    r.sandwich_upper = gb1 + 0.5 * beta * lg * lg - g1;
  } else if (g.value_or_distance(z1) <= feas_tol) {
    r.lower_model = 0.0 - (linear + 0.5 * beta * y2.squaredNorm());
  }
  return r;
}

}  // namespace hcgm
