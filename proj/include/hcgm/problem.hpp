#pragma once

// min_{x in X} f(x) + sum_j g_j(A_j x)

#include "hcgm/oracles.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hcgm {

struct SmoothFunction {
  std::function<double(const Vector&)> value;
  Operator gradient;
  double lipschitz = 0.0;  // L_f
  std::string name;
};

inline SmoothFunction zero_function() {
  return {[](const Vector&) { return 0.0; },
          [](const Vector& x) -> Vector { return Vector::Zero(x.size()); }, 0.0, "zero"};
}

/// <c, x>
inline SmoothFunction linear_function(Vector c) {
  auto cp = std::make_shared<const Vector>(std::move(c));
  return {[cp](const Vector& x) { return cp->dot(x); },
          [cp](const Vector&) -> Vector { return *cp; }, 0.0, "linear"};
}

/// 0.5 x^T H x + c^T x + offset, H symmetric positive semidefinite.
inline SmoothFunction quadratic_function(Matrix h, Vector c, double offset = 0.0) {
  if (h.rows() != h.cols() || h.rows() != c.size())
    throw std::invalid_argument("quadratic_function: dimension mismatch");
  auto hp = std::make_shared<const Matrix>(std::move(h));
  auto cp = std::make_shared<const Vector>(std::move(c));
  const double lf = hp->size() == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<Matrix>(*hp, Eigen::EigenvaluesOnly)
                                                 .eigenvalues()
                                                 .cwiseAbs()
                                                 .maxCoeff();
  return {[hp, cp, offset](const Vector& x) { return 0.5 * x.dot(*hp * x) + cp->dot(x) + offset; },
          [hp, cp](const Vector& x) -> Vector { return *hp * x + *cp; }, lf, "quadratic"};
}

/// 0.5 ||A x - b||^2
inline SmoothFunction least_squares(LinearMap a, Vector b) {
  if (a.dim_out != b.size()) throw std::invalid_argument("least_squares: dimension mismatch");
  auto ap = std::make_shared<const LinearMap>(std::move(a));
  auto bp = std::make_shared<const Vector>(std::move(b));
  const double lf = ap->norm_estimate * ap->norm_estimate;
  return {[ap, bp](const Vector& x) { return 0.5 * (ap->apply(x) - *bp).squaredNorm(); },
          [ap, bp](const Vector& x) -> Vector { return ap->adjoint(ap->apply(x) - *bp); }, lf,
          "least_squares"};
}

struct PenaltyTerm {
  LinearMap map;
  std::shared_ptr<const NonsmoothTerm> g;
};

struct CompositeProblem {
  SmoothFunction f;
  std::shared_ptr<const Domain> domain;
  std::vector<PenaltyTerm> terms;
  Vector start;  // x_1; defaults to domain->start()

  Eigen::Index dim() const { return domain->dim(); }

  /// ||A|| of the stacked map [A_1; ...; A_J], bounded by sqrt(sum ||A_j||^2).
  double stacked_norm() const {
    double s = 0.0;
    for (const auto& t : terms) s += t.map.norm_estimate * t.map.norm_estimate;
    return std::sqrt(s);
  }

  bool has_indicator() const {
    for (const auto& t : terms)
      if (t.g->kind() == TermKind::Indicator) return true;
    return false;
  }

  /// Throws std::invalid_argument on a malformed instance.
  void validate(double start_tol = 1e-9) const {
    if (!domain) throw std::invalid_argument("problem: missing domain");
    if (!f.value || !f.gradient) throw std::invalid_argument("problem: missing smooth part");
    const Eigen::Index n = domain->dim();
    if (start.size() != n) throw std::invalid_argument("problem: start dimension mismatch");
    if (!domain->contains(start, start_tol)) throw std::invalid_argument("problem: start not in domain");
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const auto& t = terms[j];
      if (!t.g) throw std::invalid_argument("problem: term " + std::to_string(j) + " has no function");
      if (t.map.dim_in != n)
        throw std::invalid_argument("problem: term " + std::to_string(j) + " map input dimension mismatch");
      if (t.map.apply(start).size() != t.map.dim_out)
        throw std::invalid_argument("problem: term " + std::to_string(j) + " map output dimension mismatch");
    }
  }
};

}  // namespace hcgm
