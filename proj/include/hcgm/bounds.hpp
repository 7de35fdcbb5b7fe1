#pragma once

// Right-hand sides of the convergence guarantees, as functions of the
// iteration counter, plus empirical rate estimation from traces.
//
// Indexing follows the guarantees as stated: the smoothed-gap bound at
// counter k is about F_{beta_k}(x_{k+1}); the Lipschitz and indicator bounds
// at counter k are about x_k.

#include "hcgm/problem.hpp"
#include "hcgm/smoothing.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcgm {

enum class ErrorModel { Exact, Additive, Multiplicative };

struct BoundInputs {
  double diameter = 0.0;  // D_X
  double lf = 0.0;        // L_f
  double norm_a = 0.0;    // ||A||
  std::optional<double> lg;          // L_g
  double beta0 = 1.0;
  double delta = 0.0;                // 0 for the exact oracle
  ErrorModel model = ErrorModel::Exact;
  std::optional<double> y_star_norm;  // ||y*||
  std::optional<double> f_star;       // F* (or f* for indicator problems)
  std::optional<double> initial_gap;  // E = F(x_1) - F*

  double c0() const { return lf + norm_a * norm_a / beta0; }

  void validate() const {
    auto nonneg = [](double v, const char* what) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("BoundInputs: ") + what + " must be finite and >= 0");
    };
    nonneg(diameter, "diameter");
    nonneg(lf, "L_f");
    nonneg(norm_a, "||A||");
    if (lg) nonneg(*lg, "L_g");
    if (!(beta0 > 0.0)) throw std::invalid_argument("BoundInputs: beta0 must be > 0");
    nonneg(delta, "delta");
    if (model == ErrorModel::Multiplicative && !(delta > 0.0 && delta <= 1.0))
      throw std::invalid_argument("BoundInputs: multiplicative delta must be in (0, 1]");
    if (y_star_norm) nonneg(*y_star_norm, "||y*||");
    if (initial_gap && !std::isfinite(*initial_gap)) throw std::invalid_argument("BoundInputs: E must be finite");
  }

  double additive_factor() const { return model == ErrorModel::Additive ? 1.0 + delta : 1.0; }

  double require_e() const {
    if (!initial_gap) throw std::invalid_argument("BoundInputs: multiplicative bounds need E = F(x1) - F*");
    return *initial_gap;
  }
  double require_lg() const {
    if (!lg) throw std::invalid_argument("BoundInputs: Lipschitz bounds need L_g");
    return *lg;
  }
};

inline void require_counter(int k) {
  if (k < 1) throw std::invalid_argument("bound: iteration counter must be >= 1");
}

/// Bound on F_{beta_k}(x_{k+1}) - F*.
inline double smoothed_gap_bound(int k, const BoundInputs& in) {
  require_counter(k);
  const double d2 = in.diameter * in.diameter;
  const double a2 = in.norm_a * in.norm_a;
  const double kk = static_cast<double>(k);
  if (in.model == ErrorModel::Multiplicative) {
    const double dl = in.delta;
    const double e = in.require_e();
    return (2.0 / dl) * ((d2 * in.lf + dl * e) / (dl * kk + 2.0) + d2 * a2 / (in.beta0 * std::sqrt(dl * kk + 2.0)));
  }
  return 2.0 * d2 * (in.lf / (kk + 1.0) + a2 / (in.beta0 * std::sqrt(kk + 1.0))) * in.additive_factor();
}

/// Bound on F(x_k) - F* for an L_g-Lipschitz g.
inline double lipschitz_gap_bound(int k, const BoundInputs& in) {
  require_counter(k);
  const double d2 = in.diameter * in.diameter;
  const double a2 = in.norm_a * in.norm_a;
  const double lg = in.require_lg();
  const double kk = static_cast<double>(k);
  if (in.model == ErrorModel::Multiplicative) {
    const double dl = in.delta;
    const double e = in.require_e();
    const double root = std::sqrt(dl * kk + 1.0);
    return (2.0 / dl) * ((d2 * in.lf + dl * e) / (dl * kk + 1.0) + d2 * a2 / (in.beta0 * root)) +
           in.beta0 * lg * lg / (2.0 * root);
  }
  return 2.0 * d2 * (in.lf / kk + a2 / (in.beta0 * std::sqrt(kk))) * in.additive_factor() +
         in.beta0 * lg * lg / (2.0 * std::sqrt(kk));
}

/// beta_0 = 2 D ||A|| / L_g, which balances the two terms of the exact bound.
inline double optimal_beta0(const BoundInputs& in) {
  const double lg = in.require_lg();
  if (!(lg > 0.0)) throw std::invalid_argument("optimal_beta0: L_g must be > 0");
  return 2.0 * in.diameter * in.norm_a / lg;
}

/// 2 D^2 L_f / k + 2 D ||A|| L_g / sqrt(k)
inline double optimized_lipschitz_gap_bound(int k, const BoundInputs& in) {
  require_counter(k);
  const double kk = static_cast<double>(k);
  return 2.0 * in.diameter * in.diameter * in.lf / kk +
         2.0 * in.diameter * in.norm_a * in.require_lg() / std::sqrt(kk);
}

/// beta_0 minimizing lipschitz_gap_bound(k, .) numerically (golden section
/// on log beta_0 over [1e-6, 1e6]); used when no closed form is available.
inline double numerically_optimal_beta0(int k, BoundInputs in) {
  auto obj = [&](double logb) {
    in.beta0 = std::exp(logb);
    return lipschitz_gap_bound(k, in);
  };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(1e-6), b = std::log(1e6);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = obj(c), fd = obj(d);
  for (int it = 0; it < 200; ++it) {
    if (fc <= fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a); fc = obj(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a); fd = obj(d);
    }
  }
  return std::exp(0.5 * (a + b));
}

struct IndicatorBounds {
  double objective_upper = 0.0;     // f(x_k) - f* <= objective_upper
  double feasibility = 0.0;         // dist(A x_k, K) <= feasibility
  double lower_coefficient = 0.0;   // f(x_k) - f* >= -lower_coefficient * dist(A x_k, K)

  double objective_lower(double dist) const { return -lower_coefficient * dist; }
};

inline IndicatorBounds indicator_bounds(int k, const BoundInputs& in) {
  require_counter(k);
  if (!in.y_star_norm) throw std::invalid_argument("indicator_bounds: ||y*|| must be supplied");
  const double y = *in.y_star_norm;
  const double d2 = in.diameter * in.diameter;
  const double a2 = in.norm_a * in.norm_a;
  const double kk = static_cast<double>(k);
  IndicatorBounds b;
  b.lower_coefficient = y;
  if (in.model == ErrorModel::Multiplicative) {
    const double dl = in.delta;
    const double e = in.require_e();
    const double root = std::sqrt(dl * kk + 1.0);
    b.objective_upper = (2.0 / dl) * ((d2 * in.lf + dl * e) / (dl * kk + 1.0) + d2 * a2 / (in.beta0 * root));
    b.feasibility = (2.0 * in.beta0 / root) * (y + std::sqrt((d2 * in.c0() + dl * e) / (in.beta0 * dl)));
    return b;
  }
  const double fac = in.additive_factor();
  b.objective_upper = 2.0 * d2 * (in.lf / kk + a2 / (in.beta0 * std::sqrt(kk))) * fac;
  b.feasibility = (2.0 * in.beta0 / std::sqrt(kk)) * (y + in.diameter * std::sqrt(in.c0() / in.beta0 * fac));
  return b;
}

/// Least-squares slope of log(value) against log(k) over k > burn_in;
/// non-positive values are skipped.
inline double rate_slope(const std::vector<double>& ks, const std::vector<double>& values, double burn_in = 0.0) {
  if (ks.size() != values.size()) throw std::invalid_argument("rate_slope: length mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] <= burn_in || !(values[i] > 0.0) || !std::isfinite(values[i])) continue;
    const double x = std::log(ks[i]), y = std::log(values[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("rate_slope: need at least two usable points");
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("rate_slope: degenerate abscissae");
  return (nn * sxy - sx * sy) / denom;
}

/// Reference optimum over a box of dimension <= 3 by nested grid search
/// with zooming. Objective must be finite on the box. Returns (x, value).
struct GridOptimum {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
};

inline GridOptimum grid_reference_optimum(const std::function<double(const Vector&)>& objective,
                                          const Vector& lower, const Vector& upper, int points = 201,
                                          int levels = 30) {
  const Eigen::Index n = lower.size();
  if (n < 1 || n > 3 || upper.size() != n) throw std::invalid_argument("grid_reference_optimum: dimension must be 1..3");
  if (points < 3) throw std::invalid_argument("grid_reference_optimum: need >= 3 points per axis");
  Vector lo = lower, hi = upper;
  GridOptimum best;
  for (int level = 0; level < levels; ++level) {
    const Vector step = (hi - lo) / static_cast<double>(points - 1);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Vector x(n);
    while (true) {
      for (Eigen::Index i = 0; i < n; ++i) x(i) = lo(i) + step(i) * idx[static_cast<std::size_t>(i)];
      const double v = objective(x);
      if (v < best.value) {
        best.value = v;
        best.x = x;
      }
      Eigen::Index d = 0;
      while (d < n && ++idx[static_cast<std::size_t>(d)] == points) idx[static_cast<std::size_t>(d++)] = 0;
      if (d == n) break;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      lo(i) = std::max(lower(i), best.x(i) - 2.0 * step(i));
      hi(i) = std::min(upper(i), best.x(i) + 2.0 * step(i));
    }
    if ((hi - lo).maxCoeff() < 1e-14) break;
  }
  return best;
}

/// Inputs measured from a problem: D_X, L_f, stacked ||A||, and L_g summed
/// over Lipschitz terms (when there are no indicators).
inline BoundInputs measure_bound_inputs(const CompositeProblem& p, double beta0) {
  BoundInputs in;
  in.diameter = p.domain->diameter();
  in.lf = p.f.lipschitz;
  in.norm_a = p.stacked_norm();
  in.beta0 = beta0;
  if (!p.has_indicator()) {
    double lg2 = 0.0;
    for (const auto& t : p.terms) lg2 += t.g->lipschitz() * t.g->lipschitz();
    in.lg = std::sqrt(lg2);
  }
  return in;
}

}  // namespace hcgm
