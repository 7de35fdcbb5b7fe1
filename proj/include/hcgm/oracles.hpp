#pragma once

// Linear minimization oracles for compact domains, proximal operators and
// projections for the non-smooth terms, and the operator-form linear map
// that connects the two.

#include "hcgm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hcgm {

// ---------------------------------------------------------------------------
// Linear maps

struct LinearMap {
  Operator apply;
  Operator adjoint;
  Eigen::Index dim_in = 0;
  Eigen::Index dim_out = 0;
  double norm_estimate = 0.0;
  bool norm_is_upper_bound = false;  // true when norm_estimate >= ||A|| is guaranteed
  std::string name;
};

inline LinearMap identity_map(Eigen::Index n) {
  LinearMap m;
  m.apply = [](const Vector& x) -> Vector { return x; };
  m.adjoint = [](const Vector& y) -> Vector { return y; };
  m.dim_in = m.dim_out = n;
  m.norm_estimate = 1.0;
  m.norm_is_upper_bound = true;
  m.name = "identity";
  return m;
}

inline LinearMap dense_map(Matrix a, const EigConfig& cfg = {}) {
  LinearMap m;
  auto shared = std::make_shared<const Matrix>(std::move(a));
  m.apply = [shared](const Vector& x) -> Vector { return *shared * x; };
  m.adjoint = [shared](const Vector& y) -> Vector { return shared->transpose() * y; };
  m.dim_in = shared->cols();
  m.dim_out = shared->rows();
  // Ritz estimate is a lower bound; pad by the residual so it bounds ||A||.
  const NormEstimate est = spectral_norm(*shared, cfg);
  m.norm_estimate = est.value + (est.value > 0 ? est.residual / est.value : 0.0);
  m.norm_is_upper_bound = est.converged;
  m.name = "dense";
  return m;
}

/// X (n x n, column-major) -> X 1.
inline LinearMap row_sum_map(Eigen::Index n) {
  LinearMap m;
  m.apply = [n](const Vector& x) -> Vector {
    return as_matrix(x, n, n).rowwise().sum();
  };
  m.adjoint = [n](const Vector& y) -> Vector {
    Matrix out = y * Eigen::RowVectorXd::Ones(n);
    return flatten(out);
  };
  m.dim_in = n * n;
  m.dim_out = n;
  m.norm_estimate = std::sqrt(static_cast<double>(n));
  m.norm_is_upper_bound = true;
  m.name = "row_sum";
  return m;
}

/// Sampling operator: X -> (X_{i})_{i in observed}, indices into the
/// flattened variable.
inline LinearMap mask_map(Eigen::Index dim_in, std::vector<Eigen::Index> observed) {
  for (auto i : observed)
    if (i < 0 || i >= dim_in) throw std::invalid_argument("mask_map: index out of range");
  auto idx = std::make_shared<const std::vector<Eigen::Index>>(std::move(observed));
  LinearMap m;
  m.apply = [idx](const Vector& x) -> Vector {
    Vector out(static_cast<Eigen::Index>(idx->size()));
    for (std::size_t k = 0; k < idx->size(); ++k) out(static_cast<Eigen::Index>(k)) = x((*idx)[k]);
    return out;
  };
  m.adjoint = [idx, dim_in](const Vector& y) -> Vector {
    Vector out = Vector::Zero(dim_in);
    for (std::size_t k = 0; k < idx->size(); ++k) out((*idx)[k]) += y(static_cast<Eigen::Index>(k));
    return out;
  };
  m.dim_in = dim_in;
  m.dim_out = static_cast<Eigen::Index>(idx->size());
  m.norm_estimate = idx->empty() ? 0.0 : 1.0;
  m.norm_is_upper_bound = true;
  m.name = "mask";
  return m;
}

struct MapProbe {
  double adjoint_error = 0.0;  // max |<Ax,y> - <x,A^T y>| / (||A|| ||x|| ||y||)
  double max_ratio = 0.0;      // max ||Ax|| / ||x||
};

inline MapProbe probe_map(const LinearMap& m, int probes, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MapProbe out;
  for (int p = 0; p < probes; ++p) {
    Vector x(m.dim_in), y(m.dim_out);
    for (auto& e : x) e = normal(gen);
    for (auto& e : y) e = normal(gen);
    const Vector ax = m.apply(x);
    const Vector aty = m.adjoint(y);
    const double denom = std::max(m.norm_estimate, 1.0) * x.norm() * std::max(y.norm(), 1e-300);
    out.adjoint_error = std::max(out.adjoint_error, std::abs(ax.dot(y) - x.dot(aty)) / denom);
    out.max_ratio = std::max(out.max_ratio, ax.norm() / x.norm());
  }
  return out;
}

// ---------------------------------------------------------------------------
// LMO catalog. Ties resolve to the smallest index.

inline Vector lmo_simplex(const Vector& v) {
  if (v.size() == 0) throw std::invalid_argument("lmo_simplex: empty vector");
  Eigen::Index i = 0;
  for (Eigen::Index j = 1; j < v.size(); ++j)
    if (v(j) < v(i)) i = j;
  Vector s = Vector::Zero(v.size());
  s(i) = 1.0;
  return s;
}

inline Vector lmo_l1_ball(const Vector& v, double radius) {
  if (v.size() == 0) throw std::invalid_argument("lmo_l1_ball: empty vector");
  Eigen::Index i = 0;
  for (Eigen::Index j = 1; j < v.size(); ++j)
    if (std::abs(v(j)) > std::abs(v(i))) i = j;
  Vector s = Vector::Zero(v.size());
  s(i) = v(i) > 0.0 ? -radius : radius;
  return s;
}

inline Vector lmo_box(const Vector& v, const Vector& lower, const Vector& upper) {
  if (v.size() != lower.size() || v.size() != upper.size())
    throw std::invalid_argument("lmo_box: dimension mismatch");
  Vector s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) s(i) = v(i) < 0.0 ? upper(i) : lower(i);
  return s;
}

inline Vector lmo_euclidean_ball(const Vector& v, double radius) {
  const double nrm = v.norm();
  if (nrm == 0.0) return Vector::Zero(v.size());
  return -radius * v / nrm;
}

/// Rank-one atom of a spectral LMO plus the eigensolver diagnostics.
struct Atom {
  Vector point;
  int inner_iterations = 0;
  double residual = 0.0;
  bool converged = true;
};

inline Atom lmo_nuclear_ball(const Matrix& v, double radius, const EigConfig& cfg) {
  Atom a;
  if (v.isZero(0.0)) {
    Matrix s = Matrix::Zero(v.rows(), v.cols());
    s(0, 0) = -radius;
    a.point = flatten(s);
    return a;
  }
  const SingularTriplet t = top_singular_pair(v, cfg);
  a.point = flatten(-radius * t.u * t.v.transpose());
  a.inner_iterations = t.iterations;
  a.residual = t.residual;
  a.converged = t.converged;
  return a;
}

inline Atom lmo_spectrahedron(const Matrix& v, double radius, const EigConfig& cfg) {
  const Eigen::Index n = v.rows();
  Atom a;
  const Matrix sym = 0.5 * (v + v.transpose());
  const EigPair p = min_eigpair(sym, cfg);
  a.inner_iterations = p.iterations;
  a.residual = p.residual;
  a.converged = p.converged;
  if (p.value < 0.0)
    a.point = flatten(radius * p.vector * p.vector.transpose());
  else
    a.point = Vector::Zero(n * n);
  return a;
}

// ---------------------------------------------------------------------------
// Projections and proximal operators

/// Euclidean projection onto the unit simplex (sort and threshold).
inline Vector proj_simplex(const Vector& z) {
  const Eigen::Index d = z.size();
  if (d == 0) throw std::invalid_argument("proj_simplex: empty vector");
  std::vector<double> sorted(z.data(), z.data() + d);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0, tau = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    cumsum += sorted[static_cast<std::size_t>(j)];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - t > 0.0) tau = t;
  }
  return (z.array() - tau).max(0.0).matrix();
}

inline Vector proj_box(const Vector& z, const Vector& lower, const Vector& upper) {
  if (z.size() != lower.size() || z.size() != upper.size())
    throw std::invalid_argument("proj_box: dimension mismatch");
  return z.cwiseMax(lower).cwiseMin(upper);
}

inline Vector prox_point_indicator(const Vector& z, const Vector& b) {
  if (z.size() != b.size()) throw std::invalid_argument("prox_point_indicator: dimension mismatch");
  return b;
}

inline Vector soft_threshold(const Vector& u, double t) {
  return u.array().sign() * (u.array().abs() - t).max(0.0);
}

/// prox of lambda*||. - b||_1 with step beta.
inline Vector prox_l1_residual(const Vector& z, const Vector& b, double lambda, double beta) {
  if (z.size() != b.size()) throw std::invalid_argument("prox_l1_residual: dimension mismatch");
  return b + soft_threshold(z - b, beta * lambda);
}

/// prox of beta*max_i z_i: the largest entries are cut down to a common
/// level t with sum_i (z_i - t)_+ = beta.
inline Vector prox_max(const Vector& z, double beta) {
  const Eigen::Index d = z.size();
  if (d == 0) throw std::invalid_argument("prox_max: empty vector");
  if (!(beta > 0.0)) throw std::invalid_argument("prox_max: beta must be > 0");
  std::vector<double> sorted(z.data(), z.data() + d);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double level = 0.0, cumsum = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    cumsum += sorted[static_cast<std::size_t>(j)];
    level = (cumsum - beta) / static_cast<double>(j + 1);
    const bool last = (j + 1 == d);
    if (last || sorted[static_cast<std::size_t>(j + 1)] <= level) break;
  }
  return z.cwiseMin(level);
}

// ---------------------------------------------------------------------------
// Domains

class Domain {
 public:
  virtual ~Domain() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Atom lmo(const Vector& v) const = 0;
  virtual double diameter() const = 0;
  virtual bool contains(const Vector& x, double tol) const = 0;
  virtual Vector start() const = 0;
  virtual std::string name() const = 0;
};

class SimplexDomain final : public Domain {
 public:
  explicit SimplexDomain(Eigen::Index n) : n_(n) {
    if (n < 1) throw std::invalid_argument("SimplexDomain: empty");
  }
  Eigen::Index dim() const override { return n_; }
  Atom lmo(const Vector& v) const override { return Atom{lmo_simplex(v)}; }
  double diameter() const override { return n_ > 1 ? std::sqrt(2.0) : 0.0; }
  bool contains(const Vector& x, double tol) const override {
    return x.size() == n_ && x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
  }
  Vector start() const override { return Vector::Unit(n_, 0); }
  std::string name() const override { return "simplex"; }

 private:
  Eigen::Index n_;
};

class L1BallDomain final : public Domain {
 public:
  L1BallDomain(Eigen::Index n, double radius) : n_(n), radius_(radius) {
    if (n < 1 || !(radius > 0)) throw std::invalid_argument("L1BallDomain: bad parameters");
  }
  Eigen::Index dim() const override { return n_; }
  Atom lmo(const Vector& v) const override { return Atom{lmo_l1_ball(v, radius_)}; }
  double diameter() const override { return 2.0 * radius_; }
  bool contains(const Vector& x, double tol) const override {
    return x.size() == n_ && x.lpNorm<1>() <= radius_ + tol;
  }
  Vector start() const override { return Vector::Zero(n_); }
  std::string name() const override { return "l1_ball"; }
  double radius() const { return radius_; }

 private:
  Eigen::Index n_;
  double radius_;
};

class BoxDomain final : public Domain {
 public:
  BoxDomain(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0)
      throw std::invalid_argument("BoxDomain: dimension mismatch");
    if ((upper_.array() < lower_.array()).any() || !lower_.allFinite() || !upper_.allFinite())
      throw std::invalid_argument("BoxDomain: box must be bounded and non-empty");
  }
  Eigen::Index dim() const override { return lower_.size(); }
  Atom lmo(const Vector& v) const override { return Atom{lmo_box(v, lower_, upper_)}; }
  double diameter() const override { return (upper_ - lower_).norm(); }
  bool contains(const Vector& x, double tol) const override {
    return x.size() == lower_.size() && (x.array() >= lower_.array() - tol).all() &&
           (x.array() <= upper_.array() + tol).all();
  }
  Vector start() const override { return lower_; }
  std::string name() const override { return "box"; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  Vector lower_, upper_;
};

class EuclideanBallDomain final : public Domain {
 public:
  EuclideanBallDomain(Eigen::Index n, double radius) : n_(n), radius_(radius) {
    if (n < 1 || !(radius > 0)) throw std::invalid_argument("EuclideanBallDomain: bad parameters");
  }
  Eigen::Index dim() const override { return n_; }
  Atom lmo(const Vector& v) const override { return Atom{lmo_euclidean_ball(v, radius_)}; }
  double diameter() const override { return 2.0 * radius_; }
  bool contains(const Vector& x, double tol) const override {
    return x.size() == n_ && x.norm() <= radius_ + tol;
  }
  Vector start() const override { return Vector::Zero(n_); }
  std::string name() const override { return "euclidean_ball"; }

 private:
  Eigen::Index n_;
  double radius_;
};

/// {X in R^{rows x cols} : ||X||_{S1} <= radius}, flattened column-major.
class NuclearBallDomain final : public Domain {
 public:
  NuclearBallDomain(Eigen::Index rows, Eigen::Index cols, double radius, EigConfig cfg = {})
      : rows_(rows), cols_(cols), radius_(radius), cfg_(cfg) {
    if (rows < 1 || cols < 1 || !(radius > 0)) throw std::invalid_argument("NuclearBallDomain: bad parameters");
  }
  Eigen::Index dim() const override { return rows_ * cols_; }
  Atom lmo(const Vector& v) const override {
    return lmo_nuclear_ball(Matrix(as_matrix(v, rows_, cols_)), radius_, cfg_);
  }
  double diameter() const override { return 2.0 * radius_; }
  bool contains(const Vector& x, double tol) const override {
    return x.size() == dim() && nuclear_norm(Matrix(as_matrix(x, rows_, cols_))) <= radius_ + tol;
  }
  Vector start() const override { return Vector::Zero(dim()); }
  std::string name() const override { return "nuclear_ball"; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  double radius() const { return radius_; }

 private:
  Eigen::Index rows_, cols_;
  double radius_;
  EigConfig cfg_;
};

/// {X symmetric n x n : X psd, tr(X) <= radius}, flattened column-major.
class SpectrahedronDomain final : public Domain {
 public:
  SpectrahedronDomain(Eigen::Index n, double radius, EigConfig cfg = {})
      : n_(n), radius_(radius), cfg_(cfg) {
    if (n < 1 || !(radius > 0)) throw std::invalid_argument("SpectrahedronDomain: bad parameters");
  }
  Eigen::Index dim() const override { return n_ * n_; }
  Atom lmo(const Vector& v) const override {
    return lmo_spectrahedron(Matrix(as_matrix(v, n_, n_)), radius_, cfg_);
  }
  double diameter() const override { return n_ > 1 ? std::sqrt(2.0) * radius_ : radius_; }
  bool contains(const Vector& x, double tol) const override {
    if (x.size() != dim()) return false;
    const Matrix m = as_matrix(x, n_, n_);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    return m.trace() <= radius_ + tol && min_eigenvalue_dense(m) >= -tol;
  }
  Vector start() const override { return Vector::Zero(dim()); }
  std::string name() const override { return "spectrahedron"; }
  Eigen::Index side() const { return n_; }
  double radius() const { return radius_; }

 private:
  Eigen::Index n_;
  double radius_;
  EigConfig cfg_;
};

// ---------------------------------------------------------------------------
// Non-smooth terms

enum class TermKind { Lipschitz, Indicator };

class NonsmoothTerm {
 public:
  virtual ~NonsmoothTerm() = default;
  virtual TermKind kind() const = 0;
  /// prox_{beta g}(z)
  virtual Vector prox(const Vector& z, double beta) const = 0;
  /// g(z) for Lipschitz terms, dist(z, K) for indicator terms.
  virtual double value_or_distance(const Vector& z) const = 0;
  /// L_g; +inf for indicators.
  virtual double lipschitz() const { return std::numeric_limits<double>::infinity(); }
  /// Fenchel conjugate g*(y), +inf outside its domain (tolerance 1e-9).
  virtual double conjugate(const Vector& y) const = 0;
  /// prox_{t g*}(w)
  virtual Vector conjugate_prox(const Vector& w, double t) const = 0;
  virtual std::string name() const = 0;

  /// proj_K(z); only meaningful for indicator terms.
  virtual Vector project(const Vector& z) const {
    if (kind() != TermKind::Indicator) throw std::logic_error("project: not an indicator term");
    return prox(z, 1.0);
  }
};

inline constexpr double kConjugateTolerance = 1e-9;

/// g = 0.
class ZeroTerm final : public NonsmoothTerm {
 public:
  TermKind kind() const override { return TermKind::Lipschitz; }
  Vector prox(const Vector& z, double) const override { return z; }
  double value_or_distance(const Vector&) const override { return 0.0; }
  double lipschitz() const override { return 0.0; }
  double conjugate(const Vector& y) const override {
    return y.lpNorm<Eigen::Infinity>() <= kConjugateTolerance ? 0.0
                                                              : std::numeric_limits<double>::infinity();
  }
  Vector conjugate_prox(const Vector& w, double) const override { return Vector::Zero(w.size()); }
  std::string name() const override { return "zero"; }
};

/// Indicator of {b}; encodes the affine constraint Ax = b.
class PointIndicator final : public NonsmoothTerm {
 public:
  explicit PointIndicator(Vector b) : b_(std::move(b)) {}
  TermKind kind() const override { return TermKind::Indicator; }
  Vector prox(const Vector& z, double) const override { return prox_point_indicator(z, b_); }
  double value_or_distance(const Vector& z) const override { return (z - b_).norm(); }
  double conjugate(const Vector& y) const override { return b_.dot(y); }
  Vector conjugate_prox(const Vector& w, double t) const override { return w - t * b_; }
  std::string name() const override { return "point_indicator"; }
  const Vector& point() const { return b_; }

 private:
  Vector b_;
};

/// Indicator of {lower <= z <= upper}; infinite bounds allowed (orthant).
class BoxIndicator final : public NonsmoothTerm {
 public:
  BoxIndicator(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw std::invalid_argument("BoxIndicator: dimension mismatch");
  }
  TermKind kind() const override { return TermKind::Indicator; }
  Vector prox(const Vector& z, double) const override { return proj_box(z, lower_, upper_); }
  double value_or_distance(const Vector& z) const override {
    return (z - proj_box(z, lower_, upper_)).norm();
  }
  double conjugate(const Vector& y) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) > 0) {
        if (!std::isfinite(upper_(i))) return std::numeric_limits<double>::infinity();
        s += y(i) * upper_(i);
      } else if (y(i) < 0) {
        if (!std::isfinite(lower_(i))) return std::numeric_limits<double>::infinity();
        s += y(i) * lower_(i);
      }
    }
    return s;
  }
  Vector conjugate_prox(const Vector& w, double t) const override {
    return w - t * proj_box(w / t, lower_, upper_);
  }
  std::string name() const override { return "box_indicator"; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  Vector lower_, upper_;
};

/// g(z) = max_i z_i, the support function of the unit simplex. Also the
/// inner maximization of a bilinear game over the simplex.
class SimplexSupport final : public NonsmoothTerm {
 public:
  TermKind kind() const override { return TermKind::Lipschitz; }
  Vector prox(const Vector& z, double beta) const override { return prox_max(z, beta); }
  double value_or_distance(const Vector& z) const override { return z.maxCoeff(); }
  double lipschitz() const override { return 1.0; }
  double conjugate(const Vector& y) const override {
    const bool in_simplex = y.minCoeff() >= -kConjugateTolerance &&
                            std::abs(y.sum() - 1.0) <= kConjugateTolerance;
    return in_simplex ? 0.0 : std::numeric_limits<double>::infinity();
  }
  Vector conjugate_prox(const Vector& w, double) const override { return proj_simplex(w); }
  std::string name() const override { return "max"; }
};

/// g(z) = lambda * ||z - b||_1.
class L1Residual final : public NonsmoothTerm {
 public:
  L1Residual(Vector b, double lambda) : b_(std::move(b)), lambda_(lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("L1Residual: lambda must be > 0");
  }
  TermKind kind() const override { return TermKind::Lipschitz; }
  Vector prox(const Vector& z, double beta) const override {
    return prox_l1_residual(z, b_, lambda_, beta);
  }
  double value_or_distance(const Vector& z) const override { return lambda_ * (z - b_).lpNorm<1>(); }
  double lipschitz() const override { return lambda_ * std::sqrt(static_cast<double>(b_.size())); }
  double conjugate(const Vector& y) const override {
    if (y.size() > 0 && y.lpNorm<Eigen::Infinity>() > lambda_ + kConjugateTolerance)
      return std::numeric_limits<double>::infinity();
    return b_.dot(y);
  }
  Vector conjugate_prox(const Vector& w, double t) const override {
    return (w - t * b_).cwiseMax(-lambda_).cwiseMin(lambda_);
  }
  std::string name() const override { return "l1_residual"; }
  const Vector& target() const { return b_; }
  double weight() const { return lambda_; }

 private:
  Vector b_;
  double lambda_;
};

}  // namespace hcgm
