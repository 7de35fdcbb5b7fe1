#include "hcgm/oracles.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace hcgm;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

constexpr int kProbes = 1000;

}  // namespace

// LMO catalog -----------------------------------------------------------------

TEST(LmoSimplex, Examples) {
  EXPECT_EQ(lmo_simplex(vec({2, -1, 0})), vec({0, 1, 0}));
  EXPECT_EQ(lmo_simplex(vec({0, 0})), vec({1, 0}));
  EXPECT_THROW(lmo_simplex(Vector()), std::invalid_argument);
}

TEST(LmoL1Ball, Examples) {
  EXPECT_EQ(lmo_l1_ball(vec({1, -4}), 2.0), vec({0, 2}));
  EXPECT_EQ(lmo_l1_ball(vec({0, 0, 0}), 1.5), vec({1.5, 0, 0}));
  EXPECT_EQ(lmo_l1_ball(vec({3, -3}), 1.0), vec({-1, 0}));
}

TEST(LmoBox, Examples) {
  EXPECT_EQ(lmo_box(vec({1, -1}), Vector::Zero(2), Vector::Ones(2)), vec({0, 1}));
  EXPECT_EQ(lmo_box(Vector::Zero(3), vec({-1, -2, -3}), Vector::Ones(3)), vec({-1, -2, -3}));
}

TEST(LmoEuclideanBall, Examples) {
  EXPECT_EQ(lmo_euclidean_ball(vec({1, 0}), 1.0), vec({-1, 0}));
  EXPECT_LE((lmo_euclidean_ball(vec({3, 4}), 1.0) - vec({-0.6, -0.8})).norm(), 1e-15);
  EXPECT_EQ(lmo_euclidean_ball(Vector::Zero(3), 2.0), Vector::Zero(3));
  EXPECT_NEAR(lmo_euclidean_ball(vec({0.1, -7, 2}), 2.5).norm(), 2.5, 1e-14);
}

TEST(LmoCatalog, OptimalAgainstRandomFeasiblePoints) {
  std::mt19937_64 gen(101);
  const Eigen::Index n = 6;
  const Vector lo = vec({-1, 0, 2, -3, 0.5, -0.5}), hi = vec({1, 2, 3, -1, 0.75, 4});
  for (int trial = 0; trial < 5; ++trial) {
    const Vector v = oracle::gaussian(gen, n);
    const double simplex = v.dot(lmo_simplex(v));
    const double l1 = v.dot(lmo_l1_ball(v, 2.0));
    const double box = v.dot(lmo_box(v, lo, hi));
    const double ball = v.dot(lmo_euclidean_ball(v, 1.5));
    for (int p = 0; p < kProbes; ++p) {
      EXPECT_LE(simplex, v.dot(oracle::simplex_point(gen, n)) + 1e-9);
      EXPECT_LE(l1, v.dot(oracle::l1_ball_point(gen, n, 2.0)) + 1e-9);
      EXPECT_LE(box, v.dot(oracle::box_point(gen, lo, hi)) + 1e-9);
      EXPECT_LE(ball, v.dot(oracle::ball_point(gen, n, 1.5)) + 1e-9);
    }
  }
}

TEST(LmoCatalog, ScaleInvariant) {
  std::mt19937_64 gen(102);
  const EigConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v = oracle::gaussian(gen, 5);
    const double c = oracle::uniform(gen, 1e-3, 1e3);
    EXPECT_EQ(lmo_simplex(v), lmo_simplex(c * v));
    EXPECT_EQ(lmo_l1_ball(v, 1.0), lmo_l1_ball(c * v, 1.0));
    EXPECT_EQ(lmo_box(v, Vector::Zero(5), Vector::Ones(5)), lmo_box(c * v, Vector::Zero(5), Vector::Ones(5)));
    EXPECT_LE((lmo_euclidean_ball(v, 1.0) - lmo_euclidean_ball(c * v, 1.0)).norm(), 1e-14);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix m = oracle::random_symmetric(gen, 6);
    const double c = oracle::uniform(gen, 1e-2, 1e2);
    const Vector a = lmo_spectrahedron(m, 2.0, cfg).point, b = lmo_spectrahedron(Matrix(c * m), 2.0, cfg).point;
    EXPECT_LE((a - b).norm(), 1e-7);
    const Vector u = lmo_nuclear_ball(m, 2.0, cfg).point, w = lmo_nuclear_ball(Matrix(c * m), 2.0, cfg).point;
    EXPECT_LE((u - w).norm(), 1e-7);
  }
}

TEST(LmoNuclearBall, Examples) {
  Matrix v(2, 2);
  v << 3, 0, 0, 1;
  const Atom a = lmo_nuclear_ball(v, 2.0, EigConfig{});
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = -2.0;
  EXPECT_LE((a.point - flatten(expected)).norm(), 1e-9);
  const Atom z = lmo_nuclear_ball(Matrix::Zero(3, 2), 1.5, EigConfig{});
  Matrix e1 = Matrix::Zero(3, 2);
  e1(0, 0) = -1.5;
  EXPECT_EQ(z.point, flatten(e1));
}

TEST(LmoNuclearBall, RandomMatchesJacobiOracle) {
  std::mt19937_64 gen(103);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix v = oracle::gaussian_matrix(gen, 8, 8);
    const Atom a = lmo_nuclear_ball(v, 3.0, EigConfig{});
    const Matrix s = as_matrix(a.point, 8, 8);
    const FullEig g = jacobi_eig_full(v.transpose() * v);
    const double sigma1 = std::sqrt(g.values(7));
    EXPECT_NEAR(flatten(v).dot(a.point), -3.0 * sigma1, 1e-8);
    EXPECT_NEAR(nuclear_norm(s), 3.0, 1e-9);
    Eigen::JacobiSVD<Matrix> svd(s);
    EXPECT_LE(svd.singularValues()(1), 1e-9);
  }
}

TEST(LmoSpectrahedron, Examples) {
  Matrix v(2, 2);
  v << 1, 0, 0, -3;
  const Atom a = lmo_spectrahedron(v, 2.0, EigConfig{});
  Matrix expected = Matrix::Zero(2, 2);
  expected(1, 1) = 2.0;
  EXPECT_LE((a.point - flatten(expected)).norm(), 1e-9);
  EXPECT_EQ(lmo_spectrahedron(Matrix::Identity(3, 3), 2.0, EigConfig{}).point, Vector::Zero(9));
}

TEST(LmoSpectrahedron, RandomMatchesJacobiOracle) {
  std::mt19937_64 gen(104);
  const SpectrahedronDomain dom(10, 2.5);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix v = oracle::random_symmetric(gen, 10);
    if (trial % 3 == 0) v += 6.0 * Matrix::Identity(10, 10);  // some positive definite inputs
    const Atom a = dom.lmo(flatten(v));
    const double lmin = jacobi_eig_full(v).values(0);
    EXPECT_NEAR(flatten(v).dot(a.point), 2.5 * std::min(0.0, lmin), 1e-7);
    EXPECT_TRUE(dom.contains(a.point, 1e-9));
  }
}

TEST(Domains, AtomsInsideAndWithinDiameter) {
  std::mt19937_64 gen(105);
  std::vector<std::shared_ptr<Domain>> doms = {
      std::make_shared<SimplexDomain>(5), std::make_shared<L1BallDomain>(5, 2.0),
      std::make_shared<BoxDomain>(vec({0, -1, 2}), vec({1, 1, 5})), std::make_shared<EuclideanBallDomain>(4, 3.0),
      std::make_shared<NuclearBallDomain>(3, 4, 2.0), std::make_shared<SpectrahedronDomain>(4, 3.0)};
  for (const auto& d : doms) {
    std::vector<Vector> atoms;
    for (int p = 0; p < 40; ++p) {
      const Atom a = d->lmo(oracle::gaussian(gen, d->dim()));
      EXPECT_TRUE(d->contains(a.point, 1e-8)) << d->name();
      atoms.push_back(a.point);
    }
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = i + 1; j < atoms.size(); ++j)
        EXPECT_LE((atoms[i] - atoms[j]).norm(), d->diameter() * (1 + 1e-9)) << d->name();
    EXPECT_TRUE(d->contains(d->start(), 0.0)) << d->name();
  }
}

TEST(Domains, RejectBadParameters) {
  EXPECT_THROW(SimplexDomain(0), std::invalid_argument);
  EXPECT_THROW(L1BallDomain(3, 0.0), std::invalid_argument);
  EXPECT_THROW(BoxDomain(vec({0}), vec({-1})), std::invalid_argument);
  EXPECT_THROW(BoxDomain(vec({0}), vec({std::numeric_limits<double>::infinity()})), std::invalid_argument);
  EXPECT_THROW(SpectrahedronDomain(3, -1.0), std::invalid_argument);
}

// Projections and proxes ------------------------------------------------------

TEST(ProjSimplex, Examples) {
  EXPECT_LE((proj_simplex(vec({0.3, 0.3})) - vec({0.5, 0.5})).norm(), 1e-15);
  const Vector z = vec({1.2, 0.4});
  const Vector ref = oracle::simplex_projection_kkt(z);
  EXPECT_LE((ref - vec({0.9, 0.1})).norm(), 1e-12);
  EXPECT_LE((proj_simplex(z) - ref).norm(), 1e-12);
  const Vector on = vec({0.2, 0.5, 0.3});
  EXPECT_LE((proj_simplex(on) - on).norm(), 1e-15);
}

TEST(ProjSimplex, MatchesKktOracleAndIsOnSimplex) {
  std::mt19937_64 gen(106);
  for (int p = 0; p < kProbes; ++p) {
    const Vector z = oracle::gaussian(gen, 1 + p % 9, 2.0);
    const Vector x = proj_simplex(z);
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_NEAR(x.sum(), 1.0, 1e-10);
    EXPECT_LE((x - oracle::simplex_projection_kkt(z)).norm(), 1e-10);
    EXPECT_LE((proj_simplex(x) - x).norm(), 1e-12);
  }
}

TEST(ProjBox, Examples) {
  EXPECT_EQ(proj_box(vec({-1, 0.5, 2}), Vector::Zero(3), Vector::Ones(3)), vec({0, 0.5, 1}));
  EXPECT_EQ(proj_box(vec({0.25, 0.75}), Vector::Zero(2), Vector::Ones(2)), vec({0.25, 0.75}));
}

TEST(ProjBox, CoordinatewiseNearestPointOnGrid) {
  std::mt19937_64 gen(107);
  const Vector lo = vec({-1, 0, 2}), hi = vec({1, 0.5, 3});
  for (int p = 0; p < 200; ++p) {
    const Vector z = oracle::gaussian(gen, 3, 3.0);
    const Vector x = proj_box(z, lo, hi);
    for (Eigen::Index i = 0; i < 3; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int g = 0; g <= 1000; ++g) {
        const double c = lo(i) + (hi(i) - lo(i)) * g / 1000.0;
        best = std::min(best, std::abs(z(i) - c));
      }
      EXPECT_LE(std::abs(z(i) - x(i)), best + 1e-12);
    }
  }
}

TEST(ProxPointIndicator, Examples) {
  const Vector b = vec({1, -2});
  EXPECT_EQ(prox_point_indicator(vec({5, 5}), b), b);
  EXPECT_EQ(prox_point_indicator(b, b), b);
  EXPECT_DOUBLE_EQ(PointIndicator(b).value_or_distance(vec({4, 2})), 5.0);
}

TEST(ProxL1Residual, Examples) {
  EXPECT_EQ(prox_l1_residual(vec({4}), vec({1}), 0.5, 2.0), vec({3}));
  EXPECT_EQ(prox_l1_residual(vec({1.5, 0.2}), vec({1, 0}), 1.0, 1.0), vec({1, 0}));
}

TEST(ProxL1Residual, SubgradientOptimality) {
  std::mt19937_64 gen(108);
  for (int p = 0; p < kProbes; ++p) {
    const Vector z = oracle::gaussian(gen, 4, 2.0), b = oracle::gaussian(gen, 4);
    const double lambda = oracle::uniform(gen, 0.1, 2.0), beta = oracle::uniform(gen, 0.1, 2.0);
    const Vector u = prox_l1_residual(z, b, lambda, beta);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double r = (z(i) - u(i)) / beta;  // must lie in lambda * d|u - b|
      if (std::abs(u(i) - b(i)) > 1e-12) EXPECT_NEAR(r, lambda * (u(i) > b(i) ? 1.0 : -1.0), 1e-9);
      else EXPECT_LE(std::abs(r), lambda + 1e-9);
    }
  }
}

TEST(ProxMax, Examples) {
  EXPECT_LE((prox_max(vec({2, 0}), 1.0) - vec({1, 0})).norm(), 1e-15);
  EXPECT_LE((prox_max(vec({0.7, 0.7}), 0.4) - vec({0.5, 0.5})).norm(), 1e-15);
  EXPECT_THROW(prox_max(vec({1}), 0.0), std::invalid_argument);
}

TEST(ProxMax, MatchesOneDimensionalMinimization) {
  // prox solves min_u beta max(u) + 0.5||u - z||^2; check by the level form:
  // u = min(z, t) where t minimizes beta t + 0.5 sum (z_i - t)_+^2.
  std::mt19937_64 gen(109);
  for (int p = 0; p < 200; ++p) {
    const Vector z = oracle::gaussian(gen, 5);
    const double beta = oracle::uniform(gen, 0.05, 3.0);
    // phi'(t) = beta - sum (z_i - t)_+ is monotone; bisect on its sign
    double lo = z.minCoeff() - beta - 1.0, hi = z.maxCoeff();
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (beta - (z.array() - mid).max(0.0).sum() < 0.0) lo = mid;
      else hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    EXPECT_LE((prox_max(z, beta) - z.cwiseMin(t)).norm(), 1e-12);
  }
}

TEST(Moreau, DecompositionForCatalogPairs) {
  std::mt19937_64 gen(110);
  const SimplexSupport mx;
  for (int p = 0; p < kProbes; ++p) {
    const Eigen::Index d = 1 + p % 7;
    const Vector z = oracle::gaussian(gen, d, 3.0);
    const double beta = oracle::uniform(gen, 1e-2, 10.0);
    const Vector sum = mx.prox(z, beta) + beta * mx.conjugate_prox(z / beta, 1.0 / beta);
    EXPECT_LE((sum - z).norm(), 1e-9 * (1.0 + z.norm()));

    const L1Residual l1(oracle::gaussian(gen, d), oracle::uniform(gen, 0.1, 3.0));
    const Vector sum2 = l1.prox(z, beta) + beta * l1.conjugate_prox(z / beta, 1.0 / beta);
    EXPECT_LE((sum2 - z).norm(), 1e-9 * (1.0 + z.norm()));
  }
}

TEST(Projections, IdempotentAndFirmlyNonexpansive) {
  std::mt19937_64 gen(111);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::shared_ptr<NonsmoothTerm>> terms = {
      std::make_shared<PointIndicator>(vec({1, 2, 3})),
      std::make_shared<BoxIndicator>(vec({0, -1, -inf}), vec({1, inf, 0})),
      std::make_shared<SimplexSupport>(), std::make_shared<L1Residual>(vec({0.5, 0, -1}), 0.7),
      std::make_shared<ZeroTerm>()};
  for (const auto& g : terms) {
    for (int p = 0; p < kProbes; ++p) {
      const Vector z1 = oracle::gaussian(gen, 3, 2.0), z2 = oracle::gaussian(gen, 3, 2.0);
      const double beta = oracle::uniform(gen, 0.05, 5.0);
      const Vector p1 = g->prox(z1, beta), p2 = g->prox(z2, beta);
      EXPECT_LE((p1 - p2).squaredNorm(), (p1 - p2).dot(z1 - z2) + 1e-12) << g->name();
      if (g->kind() == TermKind::Indicator) {
        EXPECT_LE((g->prox(p1, beta) - p1).norm(), 1e-15) << g->name();
        EXPECT_EQ(p1, g->project(z1)) << g->name();
        EXPECT_EQ(p1, g->prox(z1, 2.0 * beta + 1.0)) << g->name();
      }
    }
  }
}

// Linear maps -----------------------------------------------------------------

TEST(LinearMaps, AdjointAndNormEstimates) {
  std::mt19937_64 gen(112);
  std::vector<Eigen::Index> observed = {0, 3, 4, 7, 11};
  const std::vector<LinearMap> maps = {identity_map(6), dense_map(oracle::gaussian_matrix(gen, 5, 7)),
                                       row_sum_map(4), mask_map(12, observed)};
  for (const auto& m : maps) {
    const MapProbe pr = probe_map(m, 200, 9);
    EXPECT_LE(pr.adjoint_error, 1e-10) << m.name;
    EXPECT_LE(pr.max_ratio, m.norm_estimate * (1 + 1e-12)) << m.name;
  }
  EXPECT_EQ(identity_map(6).norm_estimate, 1.0);
  EXPECT_NEAR(row_sum_map(4).norm_estimate, 2.0, 1e-15);
  EXPECT_EQ(mask_map(12, observed).norm_estimate, 1.0);
  EXPECT_EQ(mask_map(12, {}).norm_estimate, 0.0);
}

TEST(LinearMaps, RowSumActsOnFlattenedMatrix) {
  Matrix x(3, 3);
  x << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  EXPECT_EQ(row_sum_map(3).apply(flatten(x)), vec({6, 15, 24}));
}

TEST(NonsmoothTerms, ConjugateValues) {
  const SimplexSupport mx;
  EXPECT_EQ(mx.conjugate(vec({0.25, 0.75})), 0.0);
  EXPECT_TRUE(std::isinf(mx.conjugate(vec({0.5, 0.6}))));
  const L1Residual l1(vec({1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(l1.conjugate(vec({0.5, -1})), 0.5 - 2.0);
  EXPECT_TRUE(std::isinf(l1.conjugate(vec({1.1, 0}))));
  EXPECT_NEAR(l1.lipschitz(), std::sqrt(2.0), 1e-15);
  const double inf = std::numeric_limits<double>::infinity();
  const BoxIndicator orthant(Vector::Zero(2), Vector::Constant(2, inf));
  EXPECT_EQ(orthant.conjugate(vec({-1, -2})), 0.0);
  EXPECT_TRUE(std::isinf(orthant.conjugate(vec({1, -2}))));
  EXPECT_THROW(mx.project(vec({1, 2})), std::logic_error);
}
