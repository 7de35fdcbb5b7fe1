#pragma once

// Dense vector/matrix helpers and the extreme eigen/singular solvers used by
// the spectral linear minimization oracles.
//
// Storage is Eigen. Matrix-valued decision variables are carried as
// column-major flattened vectors; see as_matrix() / flatten().

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hcgm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// y <- op(x). Callbacks must be reentrant.
using Operator = std::function<Vector(const Vector&)>;

inline Eigen::Map<const Matrix> as_matrix(const Vector& x, Eigen::Index rows,
                                          Eigen::Index cols) {
  if (x.size() != rows * cols)
    throw std::invalid_argument("as_matrix: size mismatch");
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

inline Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

/// max|M - M^T| <= 1e-12 * max|M|
inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

enum class EigMethod { Lanczos, ShiftedPower };

struct EigConfig {
  int max_iterations = 2000;  // matrix-vector product budget
  double tolerance = 1e-10;   // on ||Mq - lambda q|| / ||M||
  std::uint64_t seed = 0x5eed;
  EigMethod method = EigMethod::Lanczos;
  int krylov_dim = 48;

  void validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("EigConfig: tolerance must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("EigConfig: max_iterations must be >= 1");
    if (krylov_dim < 2) throw std::invalid_argument("EigConfig: krylov_dim must be >= 2");
  }
};

struct EigPair {
  double value = 0.0;
  Vector vector;
  double residual = 0.0;  // ||Mq - lambda q||, measured after the fact
  double scale = 0.0;     // estimate of ||M|| the residual is compared to
  int iterations = 0;     // matrix-vector products
  bool converged = false;
};

struct SingularTriplet {
  double sigma = 0.0;
  Vector u;
  Vector v;
  double residual = 0.0;  // ||M^T u - sigma v|| (M v = sigma u holds by construction)
  double scale = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline Vector random_unit(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = normal(gen);
  const double nrm = q.norm();
  if (nrm == 0.0) {
    q.setZero();
    q(0) = 1.0;
    return q;
  }
  return q / nrm;
}

// Smallest eigenpair of a symmetric operator by restarted Lanczos with full
// reorthogonalization. Restarts from the current best Ritz vector.
inline EigPair lanczos_min(const Operator& apply, Eigen::Index n, const EigConfig& cfg) {
  EigPair out;
  out.vector = random_unit(n, cfg.seed);
  const Eigen::Index m_max = std::min<Eigen::Index>(n, cfg.krylov_dim);
  double scale = 0.0;
  int matvecs = 0;
  Vector q0 = out.vector;
  double best_res = std::numeric_limits<double>::infinity();

  while (matvecs < cfg.max_iterations) {
    Matrix basis(n, m_max);
    Vector alpha(m_max), beta(m_max);
    basis.col(0) = q0;
    Eigen::Index m = 0;
    for (Eigen::Index j = 0; j < m_max && matvecs < cfg.max_iterations; ++j) {
      Vector w = apply(basis.col(j));
      ++matvecs;
      alpha(j) = basis.col(j).dot(w);
      w -= alpha(j) * basis.col(j);
      if (j > 0) w -= beta(j - 1) * basis.col(j - 1);
      for (int pass = 0; pass < 2; ++pass)
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      beta(j) = w.norm();
      m = j + 1;
      scale = std::max({scale, std::abs(alpha(j)), beta(j)});
      if (j + 1 == m_max) break;
      if (beta(j) <= 1e-14 * std::max(scale, 1e-300)) break;  // invariant subspace
      basis.col(j + 1) = w / beta(j);
    }
    if (m == 0) break;

    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    Vector sub = beta.head(std::max<Eigen::Index>(m - 1, 0));
    tri.computeFromTridiagonal(alpha.head(m), sub, Eigen::ComputeEigenvectors);
    const Vector& ritz = tri.eigenvalues();
    scale = std::max({scale, std::abs(ritz(0)), std::abs(ritz(m - 1))});
    Vector q = basis.leftCols(m) * tri.eigenvectors().col(0);
    q.normalize();
    const Vector mq = apply(q);
    ++matvecs;
    const double lambda = q.dot(mq);
    const double res = (mq - lambda * q).norm();
    if (res < best_res) {
      best_res = res;
      out.value = lambda;
      out.vector = q;
      out.residual = res;
    }
    if (res <= cfg.tolerance * scale) {
      out.converged = true;
      break;
    }
    q0 = q;
  }
  out.scale = scale;
  out.iterations = matvecs;
  if (scale == 0.0) out.converged = (out.residual == 0.0);
  return out;
}

// Power iteration on (shift*I - M), shift an upper bound on lambda_max(M).
inline EigPair power_min(const Operator& apply, Eigen::Index n, double shift,
                         const EigConfig& cfg) {
  EigPair out;
  Vector q = random_unit(n, cfg.seed);
  const double scale = std::max(std::abs(shift), 0.0);
  int matvecs = 0;
  while (matvecs < cfg.max_iterations) {
    const Vector mq = apply(q);
    ++matvecs;
    const double lambda = q.dot(mq);
    out.value = lambda;
    out.vector = q;
    out.residual = (mq - lambda * q).norm();
    if (out.residual <= cfg.tolerance * scale) {
      out.converged = true;
      break;
    }
    Vector next = shift * q - mq;
    const double nrm = next.norm();
    if (nrm == 0.0) {
      out.converged = true;
      break;
    }
    q = next / nrm;
  }
  out.scale = scale;
  out.iterations = matvecs;
  return out;
}

}  // namespace detail

/// Smallest eigenpair of a symmetric operator of dimension n. `norm_bound`
/// must bound ||M|| when the ShiftedPower method is selected.
inline EigPair min_eigpair(const Operator& apply, Eigen::Index n, const EigConfig& cfg,
                           double norm_bound = 0.0) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("min_eigpair: empty operator");
  if (cfg.method == EigMethod::ShiftedPower)
    return detail::power_min(apply, n, norm_bound, cfg);
  return detail::lanczos_min(apply, n, cfg);
}

/// Gershgorin bound on the spectral radius of a symmetric matrix.
inline double gershgorin_bound(const Matrix& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

inline EigPair min_eigpair(const Matrix& m, const EigConfig& cfg) {
  if (!is_symmetric(m)) throw std::invalid_argument("min_eigpair: matrix is not symmetric");
  const Operator apply = [&m](const Vector& x) -> Vector { return m * x; };
  EigPair p = min_eigpair(apply, m.rows(), cfg, gershgorin_bound(m));
  if (m.isZero(0.0)) {
    p.value = 0.0;
    p.residual = 0.0;
    p.converged = true;
  }
  return p;
}

/// Largest singular triplet via the smallest eigenpair of -M^T M.
inline SingularTriplet top_singular_pair(const Matrix& m, const EigConfig& cfg) {
  if (m.size() == 0) throw std::invalid_argument("top_singular_pair: empty matrix");
  SingularTriplet out;
  if (m.isZero(0.0)) throw std::invalid_argument("top_singular_pair: zero matrix");
  const Operator neg_gram = [&m](const Vector& x) -> Vector {
    return -(m.transpose() * (m * x));
  };
  const double bound = m.cwiseAbs().colwise().sum().maxCoeff() *
                       m.cwiseAbs().rowwise().sum().maxCoeff();
  EigConfig inner = cfg;
  // residual on M^T M scales as sigma^2, the singular residual as sigma
  EigPair p = min_eigpair(neg_gram, m.cols(), inner, bound);
  out.v = p.vector;
  Vector mv = m * out.v;
  out.sigma = mv.norm();
  out.u = mv / out.sigma;
  out.residual = (m.transpose() * out.u - out.sigma * out.v).norm();
  out.scale = out.sigma;
  out.iterations = p.iterations;
  out.converged = out.residual <= cfg.tolerance * std::max(out.sigma, 1e-300) ||
                  p.converged;
  return out;
}

struct NormEstimate {
  double value = 0.0;      // Rayleigh-quotient value, a certified lower bound
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// ||A|| for an operator-form map with the given adjoint.
inline NormEstimate spectral_norm(const Operator& apply, const Operator& adjoint,
                                  Eigen::Index dim_in, Eigen::Index /*dim_out*/,
                                  const EigConfig& cfg) {
  const Operator neg_gram = [&](const Vector& x) -> Vector { return -adjoint(apply(x)); };
  EigPair p = min_eigpair(neg_gram, dim_in, cfg);
  NormEstimate est;
  est.value = std::sqrt(std::max(0.0, -p.value));
  est.residual = p.residual;
  est.iterations = p.iterations;
  est.converged = p.converged;
  return est;
}

inline NormEstimate spectral_norm(const Matrix& a, const EigConfig& cfg) {
  const Operator apply = [&a](const Vector& x) -> Vector { return a * x; };
  const Operator adj = [&a](const Vector& y) -> Vector { return a.transpose() * y; };
  if (a.isZero(0.0)) return NormEstimate{0.0, 0.0, 0, true};
  return spectral_norm(apply, adj, a.cols(), a.rows(), cfg);
}

struct FullEig {
  Vector values;   // ascending
  Matrix vectors;  // columns
  int sweeps = 0;
};

/// Cyclic Jacobi rotations. Slow and exact; intended as a test reference.
inline FullEig jacobi_eig_full(const Matrix& m_in, int max_sweeps = 100) {
  const Eigen::Index n = m_in.rows();
  if (n != m_in.cols()) throw std::invalid_argument("jacobi_eig_full: matrix not square");
  if (n > 200) throw std::invalid_argument("jacobi_eig_full: dimension exceeds 200");
  if (!is_symmetric(m_in, 1e-10)) throw std::invalid_argument("jacobi_eig_full: matrix not symmetric");

  Matrix a = 0.5 * (m_in + m_in.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double fro = a.norm();
  FullEig out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * std::max(fro, 1e-300)) break;
    out.sweeps = sweep + 1;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Sum of singular values.
inline double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

/// Smallest eigenvalue by a dense direct solver; used for membership checks.
inline double min_eigenvalue_dense(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace hcgm
