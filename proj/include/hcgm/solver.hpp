#pragma once

// Homotopy conditional gradient method:
//
//   for k = 1, 2, ...
//     eta_k = 2/(k+1),  beta_k = beta_0/sqrt(k+1)
//     v_k   = beta_k grad f(x_k) + sum_j A_j^T (A_j x_k - prox_{beta_k g_j}(A_j x_k))
//     s_k   = lmo_X(v_k)
//     x_k+1 = x_k + eta_k (s_k - x_k)
//
// with optional line search on eta_k and simulated inexact oracles.

#include "hcgm/smoothing.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcgm {

enum class StepVariant { Fixed, LineSearch };
enum class OracleKind { Exact, Additive, Multiplicative };

/// How the additive-error oracle spends its budget.
enum class AdditiveStrategy {
  Exact,        // return the exact atom
  Lazy,         // reuse the previous atom while it meets the budget
  Adversarial,  // blend toward the worst atom until ~95% of the budget is used
};

struct OracleMode {
  OracleKind kind = OracleKind::Exact;
  double delta = 0.0;
  AdditiveStrategy strategy = AdditiveStrategy::Adversarial;

  static OracleMode exact() { return {}; }
  static OracleMode additive(double delta, AdditiveStrategy s = AdditiveStrategy::Adversarial) {
    return {OracleKind::Additive, delta, s};
  }
  static OracleMode multiplicative(double delta) { return {OracleKind::Multiplicative, delta, {}}; }
};

struct SolverConfig {
  double beta0 = 1.0;
  int max_iter = 1000;
  StepVariant step = StepVariant::Fixed;
  OracleMode oracle;
  std::uint64_t seed = 0;
  int trace_every = 1;
  bool record_time = false;  // wall-clock column; off keeps traces reproducible

  void validate() const {
    if (!(beta0 > 0.0) || !std::isfinite(beta0)) throw std::invalid_argument("SolverConfig: beta0 must be > 0");
    if (max_iter < 0) throw std::invalid_argument("SolverConfig: max_iter must be >= 0");
    if (trace_every < 1) throw std::invalid_argument("SolverConfig: trace_every must be >= 1");
    if (oracle.kind == OracleKind::Additive && !(oracle.delta >= 0.0))
      throw std::invalid_argument("SolverConfig: additive delta must be >= 0");
    if (oracle.kind == OracleKind::Multiplicative && !(oracle.delta > 0.0 && oracle.delta <= 1.0))
      throw std::invalid_argument("SolverConfig: multiplicative delta must be in (0, 1]");
  }
};

struct Schedule {
  double eta = 1.0;
  double beta = 1.0;
};

inline Schedule step_schedule(int k, double beta0) {
  if (k < 1) throw std::invalid_argument("step_schedule: k must be >= 1");
  const double kk = static_cast<double>(k);
  return {2.0 / (kk + 1.0), beta0 / std::sqrt(kk + 1.0)};
}

/// Schedule for a multiplicative-error oracle with factor delta.
inline Schedule step_schedule_mult(int k, double beta0, double delta) {
  if (k < 1) throw std::invalid_argument("step_schedule_mult: k must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("step_schedule_mult: delta must be in (0, 1]");
  const double kk = static_cast<double>(k);
  return {2.0 / (delta * (kk - 1.0) + 2.0), beta0 / std::sqrt(delta * kk + 1.0)};
}

inline Schedule schedule_for(int k, const SolverConfig& cfg) {
  if (cfg.oracle.kind == OracleKind::Multiplicative)
    return step_schedule_mult(k, cfg.beta0, cfg.oracle.delta);
  return step_schedule(k, cfg.beta0);
}

/// Additive budget on the gradient scale:
/// delta * (eta/2) * D^2 * (L_f + ||A||^2 / beta).
inline double additive_budget(double delta, const Schedule& s, double diameter, double lf,
                              double norm_a) {
  return delta * 0.5 * s.eta * diameter * diameter * (lf + norm_a * norm_a / s.beta);
}

struct OracleOutcome {
  Atom atom;            // the (possibly inexact) atom handed to the update
  Atom exact;           // exact atom for the same direction
  double excess = 0.0;  // <v, s~> - <v, s>
};

/// Returns s~ with <v, s~> <= <v, s> + budget, s~ in the domain.
inline OracleOutcome inexact_additive_oracle(const Vector& v, double budget, const Domain& domain,
                                             AdditiveStrategy strategy,
                                             const std::optional<Vector>& previous = std::nullopt) {
  OracleOutcome out;
  out.exact = domain.lmo(v);
  out.atom = out.exact;
  const double best = v.dot(out.exact.point);
  switch (strategy) {
    case AdditiveStrategy::Exact:
      break;
    case AdditiveStrategy::Lazy:
      if (previous && v.dot(*previous) <= best + budget) out.atom.point = *previous;
      break;
    case AdditiveStrategy::Adversarial: {
      if (budget <= 0.0) break;
      const Atom worst = domain.lmo(-v);
      out.atom.inner_iterations += worst.inner_iterations;
      const double spread = v.dot(worst.point) - best;
      if (spread <= 0.0) break;
      const double t = std::min(1.0, 0.95 * budget / spread);
      out.atom.point = out.exact.point + t * (worst.point - out.exact.point);
      break;
    }
  }
  out.excess = v.dot(out.atom.point) - best;
  return out;
}

/// Returns s~ with <v, s~ - x> <= delta <v, s - x>: the point x + delta (s - x),
/// or x itself when the exact atom makes no progress.
inline OracleOutcome inexact_multiplicative_oracle(const Vector& v, const Vector& x, double delta,
                                                   const Domain& domain) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("multiplicative oracle: delta must be in (0, 1]");
  OracleOutcome out;
  out.exact = domain.lmo(v);
  out.atom = out.exact;
  const double gap = v.dot(out.exact.point - x);
  if (gap >= 0.0)
    out.atom.point = x;
  else
    out.atom.point = x + delta * (out.exact.point - x);
  out.excess = v.dot(out.atom.point) - v.dot(out.exact.point);
  return out;
}

/// argmin_{eta in [0,1]} F_beta(x + eta d), golden section (60 steps) with
/// the endpoints compared explicitly.
inline double line_search_eta(const Vector& x, const Vector& s, const CompositeProblem& p, double beta) {
  const Vector d = s - x;
  if (d.squaredNorm() == 0.0) return 0.0;
  auto phi = [&](double eta) { return F_beta_value(x + eta * d, p, beta); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - invphi * (b - a), e = a + invphi * (b - a);
  double fc = phi(c), fe = phi(e);
  for (int it = 0; it < 60; ++it) {
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - invphi * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + invphi * (b - a);
      fe = phi(e);
    }
  }
  double eta = 0.5 * (a + b);
  double best = phi(eta);
  for (double cand : {0.0, 1.0}) {
    const double v = phi(cand);
    if (v < best) {
      best = v;
      eta = cand;
    }
  }
  return eta;
}

struct IterationRecord {
  int k = 0;
  double eta = 0.0;
  double beta = 0.0;
  // Evaluated at x_{k+1} with beta_k.
  double f_value = 0.0;
  double g_smoothed_total = 0.0;
  double F_beta = 0.0;
  double F_or_nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> feas_gaps;  // dist(A_j x_{k+1}, K_j); 0 for Lipschitz terms
  double lipschitz_total = 0.0;   // sum of g_j(A_j x_{k+1}) over Lipschitz terms
  int lmo_inner_iters = 0;
  double elapsed_ms = 0.0;
  bool oracle_converged = true;
  double oracle_excess = 0.0;  // <v_k, s~_k - s_k>
  double oracle_budget = 0.0;  // additive budget on the v_k scale
  double oracle_gap = 0.0;     // <v_k, s_k - x_k>

  double total_gap() const {
    double s = 0.0;
    for (double g : feas_gaps) s += g * g;
    return std::sqrt(s);
  }
};

enum class Termination { Budget, UserStop, NumericAbort };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Budget: return "budget";
    case Termination::UserStop: return "user_stop";
    case Termination::NumericAbort: return "numeric_abort";
  }
  return "unknown";
}

struct SolveResult {
  Vector x;
  std::vector<IterationRecord> trace;
  Termination reason = Termination::Budget;
  std::string diagnostic;
  double dual_norm = 0.0;  // ||(y*_j)_j|| over indicator terms at the last iterate
};

struct StepOutcome {
  Vector x_next;
  Vector atom;
  IterationRecord record;
};

/// One iteration from x_k. `previous_atom` feeds the lazy oracle.
inline StepOutcome hcgm_step(const Vector& x, const CompositeProblem& p, int k, const Schedule& sched,
                             const SolverConfig& cfg,
                             const std::optional<Vector>& previous_atom = std::nullopt) {
  StepOutcome out;
  const SmoothedState state = smoothed_state(x, p, sched.beta);
  const Vector v = lmo_direction(x, p, sched.beta, state);

  OracleOutcome oc;
  double budget = 0.0;
  switch (cfg.oracle.kind) {
    case OracleKind::Exact:
      oc.exact = p.domain->lmo(v);
      oc.atom = oc.exact;
      break;
    case OracleKind::Additive: {
      // v_k = beta_k grad F_beta, so the gradient-scale budget is rescaled.
      budget = sched.beta * additive_budget(cfg.oracle.delta, sched, p.domain->diameter(), p.f.lipschitz,
                                            p.stacked_norm());
      oc = inexact_additive_oracle(v, budget, *p.domain, cfg.oracle.strategy, previous_atom);
      break;
    }
    case OracleKind::Multiplicative:
      oc = inexact_multiplicative_oracle(v, x, cfg.oracle.delta, *p.domain);
      break;
  }

  double eta = sched.eta;
  if (cfg.step == StepVariant::LineSearch) eta = line_search_eta(x, oc.atom.point, p, sched.beta);
  out.x_next = (1.0 - eta) * x + eta * oc.atom.point;
  out.atom = oc.atom.point;

  IterationRecord& r = out.record;
  r.k = k;
  r.eta = eta;
  r.beta = sched.beta;
  r.lmo_inner_iters = oc.atom.inner_iterations;
  r.oracle_converged = oc.atom.converged;
  r.oracle_excess = oc.excess;
  r.oracle_budget = budget;
  r.oracle_gap = v.dot(oc.exact.point - x);

  const SmoothedState next = smoothed_state(out.x_next, p, sched.beta);
  r.f_value = p.f.value(out.x_next);
  r.g_smoothed_total = g_beta_total(p, next);
  r.F_beta = r.f_value + r.g_smoothed_total;
  bool feasible = true;
  r.feas_gaps.reserve(p.terms.size());
  for (std::size_t j = 0; j < p.terms.size(); ++j) {
    const auto& g = *p.terms[j].g;
    if (g.kind() == TermKind::Indicator) {
      const double d = (next.z[j] - next.prox[j]).norm();
      r.feas_gaps.push_back(d);
      if (d > 1e-12) feasible = false;
    } else {
      r.feas_gaps.push_back(0.0);
      r.lipschitz_total += g.value_or_distance(next.z[j]);
    }
  }
  if (feasible) r.F_or_nan = r.f_value + r.lipschitz_total;
  return out;
}

/// Optional per-iteration hook; return false to stop early.
using IterationCallback = std::function<bool(const IterationRecord&, const Vector&)>;

inline SolveResult solve(const CompositeProblem& p, const SolverConfig& cfg,
                         const IterationCallback& callback = {}) {
  cfg.validate();
  p.validate();
  SolveResult res;
  res.x = p.start;
  std::optional<Vector> previous;
  const auto t0 = std::chrono::steady_clock::now();
  double last_beta = cfg.beta0;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Schedule sched = schedule_for(k, cfg);
    StepOutcome step = hcgm_step(res.x, p, k, sched, cfg, previous);
    last_beta = sched.beta;
    if (cfg.record_time)
      step.record.elapsed_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    if (!std::isfinite(step.record.F_beta) || !step.x_next.allFinite()) {
      res.reason = Termination::NumericAbort;
      res.diagnostic = "non-finite objective at iteration " + std::to_string(k);
      res.trace.push_back(step.record);
      break;
    }
    res.x = std::move(step.x_next);
    previous = std::move(step.atom);
    if (k % cfg.trace_every == 0 || k == cfg.max_iter) res.trace.push_back(step.record);
    if (callback && !callback(step.record, res.x)) {
      res.reason = Termination::UserStop;
      break;
    }
  }

  if (cfg.max_iter > 0) {
    const SmoothedState s = smoothed_state(res.x, p, last_beta);
    double sq = 0.0;
    for (std::size_t j = 0; j < p.terms.size(); ++j)
      if (p.terms[j].g->kind() == TermKind::Indicator) sq += s.y[j].squaredNorm();
    res.dual_norm = std::sqrt(sq);
  }
  return res;
}

}  // namespace hcgm
