#pragma once

// Benchmark instances: the max-over-the-ball counterexample, a quadratic over
// a box, k-means clustering SDP, robust matrix completion (least squares and
// least absolute deviations) and bilinear matrix games. Synthetic data
// generators replace the image/MNIST data at desk scale.

#include "hcgm/bounds.hpp"
#include "hcgm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcgm {

struct ProblemInstance {
  std::string name;
  CompositeProblem problem;
  BoundInputs bounds;  // measured constants; beta0 is the recommended value
  std::optional<double> known_optimum;  // F* (f* for indicator problems)
  std::vector<int> planted_labels;
  std::optional<Matrix> planted_matrix;
  std::map<std::string, std::string> metadata;
};

struct SelfCheck {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Dimension, adjoint and norm-estimate consistency, diameter probing and
/// start membership.
inline SelfCheck self_check(const ProblemInstance& inst, int probes = 8, std::uint64_t seed = 7) {
  SelfCheck out;
  auto fail = [&out](std::string msg) {
    out.ok = false;
    out.failures.push_back(std::move(msg));
  };
  try {
    inst.problem.validate();
  } catch (const std::exception& e) {
    fail(e.what());
    return out;
  }
  for (std::size_t j = 0; j < inst.problem.terms.size(); ++j) {
    const auto& m = inst.problem.terms[j].map;
    if (m.dim_in == 0 || m.dim_out == 0) continue;
    const MapProbe pr = probe_map(m, probes, seed + j);
    if (pr.adjoint_error > 1e-10) fail("term " + std::to_string(j) + ": adjoint mismatch");
    if (pr.max_ratio > m.norm_estimate * (1.0 + 1e-9) + 1e-12)
      fail("term " + std::to_string(j) + ": norm estimate below probed ratio");
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> atoms;
  for (int p = 0; p < probes; ++p) {
    Vector v(inst.problem.dim());
    for (auto& e : v) e = normal(gen);
    atoms.push_back(inst.problem.domain->lmo(v).point);
    if (!inst.problem.domain->contains(atoms.back(), 1e-8)) fail("lmo atom outside domain");
  }
  const double diam = inst.problem.domain->diameter();
  for (std::size_t a = 0; a < atoms.size(); ++a)
    for (std::size_t b = a + 1; b < atoms.size(); ++b)
      if ((atoms[a] - atoms[b]).norm() > diam * (1.0 + 1e-9) + 1e-12) fail("atoms farther apart than the diameter");
  if (std::abs(inst.bounds.diameter - diam) > 1e-12) fail("bound inputs diameter differs from domain");
  return out;
}

// ---------------------------------------------------------------------------
// Counterexample: min max{x1, x2} over the unit disc.

inline ProblemInstance build_counterexample() {
  ProblemInstance inst;
  inst.name = "counterexample";
  auto& p = inst.problem;
  p.f = zero_function();
  p.domain = std::make_shared<EuclideanBallDomain>(2, 1.0);
  p.terms.push_back({identity_map(2), std::make_shared<SimplexSupport>()});
  p.start = Vector::Unit(2, 0);
  inst.bounds = measure_bound_inputs(p, 1.0);
  inst.bounds.beta0 = optimal_beta0(inst.bounds);  // 2 D ||A|| / L_g = 4
  inst.known_optimum = -1.0 / std::sqrt(2.0);
  inst.bounds.f_star = inst.known_optimum;
  inst.bounds.initial_gap = p.terms[0].g->value_or_distance(p.start) - *inst.known_optimum;
  return inst;
}

struct ClassicalCgmTrace {
  std::vector<Vector> iterates;  // x_1 .. x_{K+1}
  std::vector<double> values;    // max{x1, x2} at each iterate
};

/// Classical conditional gradient on the counterexample driven by the
/// subgradient oracle e_argmax (ties to e_1) with eta_k = 2/(k+1).
inline ClassicalCgmTrace classical_cgm_counterexample(int iterations, Vector x1 = Vector::Unit(2, 0)) {
  ClassicalCgmTrace t;
  Vector x = std::move(x1);
  t.iterates.push_back(x);
  t.values.push_back(x.maxCoeff());
  for (int k = 1; k <= iterations; ++k) {
    const Vector sub = x(1) > x(0) ? Vector::Unit(2, 1) : Vector::Unit(2, 0);
    const Vector s = lmo_euclidean_ball(sub, 1.0);
    const double eta = 2.0 / (k + 1.0);
    x = x + eta * (s - x);
    t.iterates.push_back(x);
    t.values.push_back(x.maxCoeff());
  }
  return t;
}

// ---------------------------------------------------------------------------
// Quadratic over a box with an l1 penalty:
//   0.5 (x - c)^T H (x - c) + lambda ||x - b||_1,  lower <= x <= upper.

inline ProblemInstance build_quadratic_box(Matrix h, Vector center, Vector lower, Vector upper,
                                           std::optional<std::pair<Vector, double>> l1 = std::nullopt,
                                           bool compute_reference = true) {
  ProblemInstance inst;
  inst.name = "quadratic_box";
  auto& p = inst.problem;
  const Vector lin = -(h * center);
  const double offset = 0.5 * center.dot(h * center);
  const Eigen::Index n = center.size();
  p.f = quadratic_function(h, lin, offset);
  p.domain = std::make_shared<BoxDomain>(lower, upper);
  if (l1) p.terms.push_back({identity_map(n), std::make_shared<L1Residual>(l1->first, l1->second)});
  p.start = p.domain->start();
  inst.bounds = measure_bound_inputs(p, 1.0);
  if (compute_reference && n <= 3) {
    const auto objective = [&p](const Vector& x) { return *F_value(x, p).value; };
    const GridOptimum g = grid_reference_optimum(objective, lower, upper);
    inst.known_optimum = g.value;
    inst.bounds.f_star = g.value;
    inst.bounds.initial_gap = objective(p.start) - g.value;
    inst.metadata["reference"] = "nested grid search";
  }
  return inst;
}

/// The 2-D instance used in tests and the CLI.
inline ProblemInstance build_default_quadratic_box(bool compute_reference = true) {
  Matrix h(2, 2);
  h << 2.0, 0.5, 0.5, 1.0;
  Vector c(2), b(2);
  c << 1.5, -0.3;
  b << 0.2, 0.8;
  return build_quadratic_box(h, c, Vector::Zero(2), Vector::Ones(2), std::make_pair(b, 0.5), compute_reference);
}

// ---------------------------------------------------------------------------
// Synthetic data

struct MixtureData {
  Matrix points;  // n x dim
  std::vector<int> labels;
  Matrix centers;  // k x dim
};

/// n points in the plane from k unit-variance Gaussians whose adjacent
/// centers are `separation` apart; labels assigned round-robin.
inline MixtureData gen_mixture(int n, int k, double separation, std::uint64_t seed, int dim = 2) {
  if (n < 1 || k < 1 || dim < 2) throw std::invalid_argument("gen_mixture: bad parameters");
  MixtureData d;
  d.centers = Matrix::Zero(k, dim);
  const double pi = std::acos(-1.0);
  const double radius = k > 1 ? separation / (2.0 * std::sin(pi / k)) : 0.0;
  for (int c = 0; c < k; ++c) {
    d.centers(c, 0) = radius * std::cos(2.0 * pi * c / k);
    d.centers(c, 1) = radius * std::sin(2.0 * pi * c / k);
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  d.points.resize(n, dim);
  d.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = i % k;
    d.labels[static_cast<std::size_t>(i)] = c;
    for (int j = 0; j < dim; ++j) d.points(i, j) = d.centers(c, j) + normal(gen);
  }
  return d;
}

/// U V^T / rank with U, V uniform on [0, 1]: entries in [0, 1], rank `rank`.
inline Matrix gen_lowrank(int rows, int cols, int rank, std::uint64_t seed) {
  if (rows < 1 || cols < 1 || rank < 1) throw std::invalid_argument("gen_lowrank: bad parameters");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix u(rows, rank), v(cols, rank);
  for (auto& e : u.reshaped()) e = unif(gen);
  for (auto& e : v.reshaped()) e = unif(gen);
  return u * v.transpose() / static_cast<double>(rank);
}

struct Corruption {
  Matrix corrupted;
  std::vector<Eigen::Index> indices;  // flattened positions that were replaced
};

/// Salt-and-pepper noise: each entry independently replaced with
/// probability `density` by 0 or 1 (equally likely).
inline Corruption salt_pepper(const Matrix& clean, double density, std::uint64_t seed) {
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("salt_pepper: density must be in [0, 1]");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Corruption c;
  c.corrupted = clean;
  for (Eigen::Index i = 0; i < clean.size(); ++i) {
    if (unif(gen) < density) {
      c.corrupted.reshaped()(i) = unif(gen) < 0.5 ? 0.0 : 1.0;
      c.indices.push_back(i);
    }
  }
  return c;
}

/// Each flattened index observed independently with probability `fraction`.
inline std::vector<Eigen::Index> gen_mask(Eigen::Index size, double fraction, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < size; ++i)
    if (unif(gen) < fraction) idx.push_back(i);
  return idx;
}

inline Matrix gen_game(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix m(rows, cols);
  for (auto& e : m.reshaped()) e = unif(gen);
  return m;
}

// ---------------------------------------------------------------------------
// Clustering SDP: min <D, X> s.t. X 1 = 1, X >= 0, X psd, tr(X) <= k.

inline Matrix distance_matrix(const Matrix& points, bool squared = true) {
  const Eigen::Index n = points.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sq = (points.row(i) - points.row(j)).squaredNorm();
      d(i, j) = squared ? sq : std::sqrt(sq);
    }
  return d;
}

/// Scale applied to the distance matrix. Scaling changes neither the
/// minimizer nor the feasibility structure, only the balance between the
/// objective and the penalty terms.
enum class DistanceNormalization { Frobenius, MaxEntry, None };

struct ClusteringOptions {
  bool squared = true;
  DistanceNormalization normalization = DistanceNormalization::Frobenius;
  EigConfig eig{};
};

inline ProblemInstance build_clustering_sdp(const Matrix& points, int clusters, ClusteringOptions opt = {}) {
  if (clusters < 1 || points.rows() < 1) throw std::invalid_argument("build_clustering_sdp: bad parameters");
  const Eigen::Index n = points.rows();
  ProblemInstance inst;
  inst.name = "clustering";
  Matrix d = distance_matrix(points, opt.squared);
  double scale = 1.0;
  if (opt.normalization == DistanceNormalization::Frobenius) scale = d.norm();
  else if (opt.normalization == DistanceNormalization::MaxEntry) scale = d.maxCoeff();
  if (!(scale > 0.0)) scale = 1.0;
  d /= scale;
  inst.metadata["distance_scale"] = std::to_string(scale);
  inst.metadata["squared_distances"] = opt.squared ? "true" : "false";

  auto& p = inst.problem;
  p.f = linear_function(flatten(d));
  p.domain = std::make_shared<SpectrahedronDomain>(n, static_cast<double>(clusters), opt.eig);
  p.terms.push_back({row_sum_map(n), std::make_shared<PointIndicator>(Vector::Ones(n))});
  const double inf = std::numeric_limits<double>::infinity();
  p.terms.push_back({identity_map(n * n), std::make_shared<BoxIndicator>(Vector::Zero(n * n),
                                                                          Vector::Constant(n * n, inf))});
  p.start = p.domain->start();
  inst.bounds = measure_bound_inputs(p, 1.0);
  return inst;
}

/// Sum of within-cluster squared distances to cluster means.
inline double kmeans_cost(const Matrix& points, const std::vector<int>& labels, int clusters) {
  double cost = 0.0;
  for (int c = 0; c < clusters; ++c) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(points.cols());
    int count = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      if (labels[static_cast<std::size_t>(i)] == c) {
        mean += points.row(i);
        ++count;
      }
    if (count == 0) continue;
    mean /= count;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      if (labels[static_cast<std::size_t>(i)] == c) cost += (points.row(i) - mean).squaredNorm();
  }
  return cost;
}

/// Fraction of points labelled correctly under the best relabeling.
inline double clustering_accuracy(const std::vector<int>& labels, const std::vector<int>& truth, int clusters) {
  if (labels.size() != truth.size() || labels.empty()) throw std::invalid_argument("clustering_accuracy: size mismatch");
  std::vector<int> perm(static_cast<std::size_t>(clusters));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] >= 0 && labels[i] < clusters && perm[static_cast<std::size_t>(labels[i])] == truth[i]) ++hits;
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(labels.size());
}

struct Rounding {
  std::vector<int> labels;
  bool fallback_embedding = false;  // too few positive eigenvalues; rows of X used
  int lloyd_iterations = 0;
};

/// Spectral embedding by the top eigenvectors of sym(X), then Lloyd with
/// farthest-point initialization started from the point of largest
/// embedding norm. Labels are numbered in the order centers were chosen.
inline Rounding round_clustering(const Matrix& x, int clusters, std::uint64_t seed = 0) {
  const Eigen::Index n = x.rows();
  if (x.cols() != n || clusters < 1 || clusters > n) throw std::invalid_argument("round_clustering: bad parameters");
  Rounding r;
  const Matrix sym = 0.5 * (x + x.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector vals = es.eigenvalues();
  const double top = std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
  int positive = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (vals(i) > 1e-8 * top) ++positive;
  Matrix emb;
  if (positive >= clusters) {
    emb.resize(n, clusters);
    for (int c = 0; c < clusters; ++c) {
      const Eigen::Index col = n - 1 - c;
      emb.col(c) = es.eigenvectors().col(col) * std::sqrt(vals(col));
    }
  } else {
    r.fallback_embedding = true;
    emb = sym;
  }

  // farthest-point initialization
  std::vector<Eigen::Index> centers_idx;
  Eigen::Index first = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (emb.row(i).squaredNorm() > emb.row(first).squaredNorm() + 1e-15) first = i;
  centers_idx.push_back(first);
  Vector mind = Vector::Constant(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers_idx.size()) < clusters) {
    for (Eigen::Index i = 0; i < n; ++i)
      mind(i) = std::min(mind(i), (emb.row(i) - emb.row(centers_idx.back())).squaredNorm());
    Eigen::Index far = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (mind(i) > mind(far) + 1e-15) far = i;
    centers_idx.push_back(far);
  }
  Matrix centers(clusters, emb.cols());
  for (int c = 0; c < clusters; ++c) centers.row(c) = emb.row(centers_idx[static_cast<std::size_t>(c)]);

  std::mt19937_64 gen(seed);
  r.labels.assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < 100; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < clusters; ++c) {
        const double dd = (emb.row(i) - centers.row(c)).squaredNorm();
        if (dd < bd - 1e-15) {
          bd = dd;
          best = c;
        }
      }
      if (r.labels[static_cast<std::size_t>(i)] != best) {
        r.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    r.lloyd_iterations = it + 1;
    for (int c = 0; c < clusters; ++c) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(emb.cols());
      int count = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (r.labels[static_cast<std::size_t>(i)] == c) {
          mean += emb.row(i);
          ++count;
        }
      if (count > 0) {
        centers.row(c) = mean / count;
      } else {
        // empty cluster: reseed from a random point
        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        centers.row(c) = emb.row(pick(gen));
        changed = true;
      }
    }
    if (!changed) break;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Robust matrix completion

enum class RpcaLoss { LeastSquares, LeastAbsoluteDeviations };

/// observed: flattened indices of the rows x cols matrix; b: observed values.
inline ProblemInstance build_rpca(Eigen::Index rows, Eigen::Index cols, std::vector<Eigen::Index> observed,
                                  const Vector& b, double radius, RpcaLoss loss, EigConfig eig = {}) {
  if (static_cast<Eigen::Index>(observed.size()) != b.size()) throw std::invalid_argument("build_rpca: |mask| != |b|");
  ProblemInstance inst;
  inst.name = loss == RpcaLoss::LeastSquares ? "rpca_ls" : "rpca_lad";
  const Eigen::Index n = rows * cols;
  auto& p = inst.problem;
  p.domain = std::make_shared<NuclearBallDomain>(rows, cols, radius, eig);
  LinearMap mask = mask_map(n, std::move(observed));
  auto box = std::make_shared<BoxIndicator>(Vector::Zero(n), Vector::Ones(n));
  if (loss == RpcaLoss::LeastSquares) {
    p.f = least_squares(mask, b);
  } else {
    p.f = zero_function();
    if (mask.dim_out > 0) p.terms.push_back({mask, std::make_shared<L1Residual>(b, 1.0)});
  }
  p.terms.push_back({identity_map(n), box});
  p.start = p.domain->start();
  inst.bounds = measure_bound_inputs(p, 1.0);
  return inst;
}

struct RpcaData {
  Matrix clean;
  Matrix corrupted;
  std::vector<Eigen::Index> observed;
  Vector b;
  double radius = 0.0;  // ||clean||_{S1}
  double corrupted_fraction = 0.0;
};

inline RpcaData gen_rpca(int rows, int cols, int rank, double density, double observe_fraction,
                         std::uint64_t seed) {
  RpcaData d;
  d.clean = gen_lowrank(rows, cols, rank, seed);
  const Corruption c = salt_pepper(d.clean, density, seed ^ 0x9e3779b97f4a7c15ULL);
  d.corrupted = c.corrupted;
  d.corrupted_fraction = static_cast<double>(c.indices.size()) / static_cast<double>(d.clean.size());
  d.observed = gen_mask(d.clean.size(), observe_fraction, seed ^ 0xc2b2ae3d27d4eb4fULL);
  d.b.resize(static_cast<Eigen::Index>(d.observed.size()));
  for (std::size_t k = 0; k < d.observed.size(); ++k)
    d.b(static_cast<Eigen::Index>(k)) = d.corrupted.reshaped()(d.observed[k]);
  d.radius = nuclear_norm(d.clean);
  return d;
}

inline double relative_error(const Vector& x, const Matrix& truth) {
  return (x - flatten(truth)).norm() / flatten(truth).norm();
}

// ---------------------------------------------------------------------------
// Bilinear matrix game: min_{x in simplex} max_{y in simplex} <M x, y>.

/// Game value by enumerating vertices of the LP
///   min t  s.t.  M x <= t 1,  1^T x = 1,  x >= 0.
inline double matrix_game_value(const Matrix& m, Vector* x_opt = nullptr) {
  const Eigen::Index d = m.rows(), n = m.cols();
  if (d < 1 || n < 1 || d + n > 24) throw std::invalid_argument("matrix_game_value: size out of range");
  // unknowns (x, t); constraints i < d: (M x)_i - t <= 0, i >= d: -x_{i-d} <= 0
  const Eigen::Index total = d + n;
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(static_cast<std::size_t>(total), false);
  std::fill(pick.begin(), pick.begin() + n, true);
  do {
    Matrix a = Matrix::Zero(n + 1, n + 1);
    Vector rhs = Vector::Zero(n + 1);
    a.row(0).head(n).setOnes();
    rhs(0) = 1.0;
    Eigen::Index r = 1;
    for (Eigen::Index c = 0; c < total; ++c) {
      if (!pick[static_cast<std::size_t>(c)]) continue;
      if (c < d) {
        a.row(r).head(n) = m.row(c);
        a(r, n) = -1.0;
      } else {
        a(r, c - d) = 1.0;
      }
      ++r;
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (lu.rank() < n + 1) continue;
    const Vector sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    const double t = sol(n);
    if (x.minCoeff() < -1e-10) continue;
    if ((m * x).maxCoeff() > t + 1e-10) continue;
    if (t < best) {
      best = t;
      if (x_opt) *x_opt = x;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

inline ProblemInstance build_matrix_game(const Matrix& m, bool compute_value = true) {
  ProblemInstance inst;
  inst.name = "game";
  auto& p = inst.problem;
  p.f = zero_function();
  p.domain = std::make_shared<SimplexDomain>(m.cols());
  LinearMap a = m.isZero(0.0) ? LinearMap{} : dense_map(m);
  if (m.isZero(0.0)) {
    a.apply = [rows = m.rows()](const Vector&) -> Vector { return Vector::Zero(rows); };
    a.adjoint = [cols = m.cols()](const Vector&) -> Vector { return Vector::Zero(cols); };
    a.dim_in = m.cols();
    a.dim_out = m.rows();
    a.norm_estimate = 0.0;
    a.norm_is_upper_bound = true;
    a.name = "zero";
  }
  p.terms.push_back({a, std::make_shared<SimplexSupport>()});
  p.start = p.domain->start();
  inst.bounds = measure_bound_inputs(p, 1.0);
  if (inst.bounds.norm_a > 0.0) inst.bounds.beta0 = optimal_beta0(inst.bounds);
  if (compute_value && m.rows() + m.cols() <= 24) {
    inst.known_optimum = matrix_game_value(m);
    inst.bounds.f_star = inst.known_optimum;
    inst.bounds.initial_gap = (m * p.start).maxCoeff() - *inst.known_optimum;
  }
  return inst;
}

}  // namespace hcgm
