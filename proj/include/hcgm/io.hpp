#pragma once

// Run configuration (JSON) and iteration traces (CSV).

#include "hcgm/problems.hpp"
#include "hcgm/solver.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcgm {

inline constexpr int kSchemaVersion = 1;

/// Raised for malformed or inconsistent configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string builder;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
};

struct BoundOverrides {
  std::optional<double> diameter, lf, norm_a, lg, f_star, initial_gap, y_star_norm;
  bool estimate_y_star = false;
};

struct OutputSpec {
  std::string trace;
  int trace_every = 1;
  bool record_time = false;
};

struct RunConfig {
  ProblemSpec problem;
  SolverConfig solver;
  bool recommended_beta0 = true;
  BoundOverrides bounds;
  OutputSpec output;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline std::optional<double> opt_number(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::get_or;
  using detail::reject_unknown;
  reject_unknown(j, {"schema_version", "problem", "solver", "bounds", "output"}, "config");
  if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
  if (get_or<int>(j, "schema_version", 0, "config") != kSchemaVersion)
    throw ConfigError("config: unsupported schema_version");
  if (!j.contains("problem")) throw ConfigError("config: missing problem block");

  RunConfig rc;
  const auto& pb = j.at("problem");
  reject_unknown(pb, {"builder", "seed", "params"}, "problem");
  rc.problem.builder = get_or<std::string>(pb, "builder", "", "problem");
  if (rc.problem.builder.empty()) throw ConfigError("problem: missing builder");
  rc.problem.seed = get_or<std::uint64_t>(pb, "seed", 0, "problem");
  if (pb.contains("params")) {
    if (!pb.at("params").is_object()) throw ConfigError("problem.params: expected an object");
    rc.problem.params = pb.at("params");
  }

  if (j.contains("solver")) {
    const auto& sb = j.at("solver");
    reject_unknown(sb, {"beta0", "max_iter", "step", "oracle", "seed"}, "solver");
    if (sb.contains("beta0")) {
      const auto& b = sb.at("beta0");
      if (b.is_string()) {
        if (b.get<std::string>() != "recommended") throw ConfigError("solver.beta0: expected a number or \"recommended\"");
      } else if (b.is_number()) {
        rc.recommended_beta0 = false;
        rc.solver.beta0 = b.get<double>();
      } else {
        throw ConfigError("solver.beta0: expected a number or \"recommended\"");
      }
    }
    rc.solver.max_iter = get_or<int>(sb, "max_iter", rc.solver.max_iter, "solver");
    const std::string step = get_or<std::string>(sb, "step", "fixed", "solver");
    if (step == "fixed") rc.solver.step = StepVariant::Fixed;
    else if (step == "line_search") rc.solver.step = StepVariant::LineSearch;
    else throw ConfigError("solver.step: expected fixed or line_search");
    rc.solver.seed = get_or<std::uint64_t>(sb, "seed", 0, "solver");
    if (sb.contains("oracle")) {
      const auto& ob = sb.at("oracle");
      reject_unknown(ob, {"kind", "delta", "strategy"}, "solver.oracle");
      const std::string kind = get_or<std::string>(ob, "kind", "exact", "solver.oracle");
      const double delta = get_or<double>(ob, "delta", 0.0, "solver.oracle");
      const std::string strat = get_or<std::string>(ob, "strategy", "adversarial", "solver.oracle");
      AdditiveStrategy s;
      if (strat == "exact") s = AdditiveStrategy::Exact;
      else if (strat == "lazy") s = AdditiveStrategy::Lazy;
      else if (strat == "adversarial") s = AdditiveStrategy::Adversarial;
      else throw ConfigError("solver.oracle.strategy: expected exact, lazy or adversarial");
      if (kind == "exact") rc.solver.oracle = OracleMode::exact();
      else if (kind == "additive") rc.solver.oracle = OracleMode::additive(delta, s);
      else if (kind == "multiplicative") rc.solver.oracle = OracleMode::multiplicative(delta);
      else throw ConfigError("solver.oracle.kind: expected exact, additive or multiplicative");
    }
  }

  if (j.contains("bounds")) {
    const auto& bb = j.at("bounds");
    reject_unknown(bb, {"diameter", "lf", "norm_a", "lg", "f_star", "initial_gap", "y_star_norm"}, "bounds");
    auto& o = rc.bounds;
    o.diameter = detail::opt_number(bb, "diameter", "bounds");
    o.lf = detail::opt_number(bb, "lf", "bounds");
    o.norm_a = detail::opt_number(bb, "norm_a", "bounds");
    o.lg = detail::opt_number(bb, "lg", "bounds");
    o.f_star = detail::opt_number(bb, "f_star", "bounds");
    o.initial_gap = detail::opt_number(bb, "initial_gap", "bounds");
    if (bb.contains("y_star_norm")) {
      const auto& y = bb.at("y_star_norm");
      if (y.is_string() && y.get<std::string>() == "estimate") o.estimate_y_star = true;
      else if (y.is_number()) o.y_star_norm = y.get<double>();
      else throw ConfigError("bounds.y_star_norm: expected a number or \"estimate\"");
    }
  }

  if (j.contains("output")) {
    const auto& ob = j.at("output");
    reject_unknown(ob, {"trace", "trace_every", "record_time"}, "output");
    rc.output.trace = get_or<std::string>(ob, "trace", "", "output");
    rc.output.trace_every = get_or<int>(ob, "trace_every", 1, "output");
    rc.output.record_time = get_or<bool>(ob, "record_time", false, "output");
  }
  rc.solver.trace_every = rc.output.trace_every;
  rc.solver.record_time = rc.output.record_time;
  try {
    rc.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

/// Builds the instance named in the problem block. Parameters absent from
/// `params` take the documented defaults.
inline ProblemInstance build_instance(const ProblemSpec& spec) {
  using detail::get_or;
  using detail::reject_unknown;
  const auto& p = spec.params;
  const std::string where = "problem.params";
  try {
    if (spec.builder == "counterexample") {
      reject_unknown(p, {}, where);
      return build_counterexample();
    }
    if (spec.builder == "quadratic_box") {
      reject_unknown(p, {}, where);
      return build_default_quadratic_box();
    }
    if (spec.builder == "clustering") {
      reject_unknown(p, {"n", "clusters", "separation", "normalization", "squared"}, where);
      const int n = get_or<int>(p, "n", 40, where);
      const int k = get_or<int>(p, "clusters", 3, where);
      const double sep = get_or<double>(p, "separation", 6.0, where);
      ClusteringOptions opt;
      opt.squared = get_or<bool>(p, "squared", true, where);
      const std::string norm = get_or<std::string>(p, "normalization", "frobenius", where);
      if (norm == "frobenius") opt.normalization = DistanceNormalization::Frobenius;
      else if (norm == "max") opt.normalization = DistanceNormalization::MaxEntry;
      else if (norm == "none") opt.normalization = DistanceNormalization::None;
      else throw ConfigError(where + ".normalization: expected frobenius, max or none");
      const MixtureData data = gen_mixture(n, k, sep, spec.seed);
      ProblemInstance inst = build_clustering_sdp(data.points, k, opt);
      inst.planted_labels = data.labels;
      return inst;
    }
    if (spec.builder == "rpca") {
      reject_unknown(p, {"rows", "cols", "rank", "density", "observe_fraction", "loss"}, where);
      const int rows = get_or<int>(p, "rows", 50, where);
      const int cols = get_or<int>(p, "cols", 50, where);
      const int rank = get_or<int>(p, "rank", 3, where);
      const double density = get_or<double>(p, "density", 0.1, where);
      const double frac = get_or<double>(p, "observe_fraction", 0.6, where);
      const std::string loss = get_or<std::string>(p, "loss", "lad", where);
      RpcaLoss l;
      if (loss == "ls") l = RpcaLoss::LeastSquares;
      else if (loss == "lad") l = RpcaLoss::LeastAbsoluteDeviations;
      else throw ConfigError(where + ".loss: expected ls or lad");
      const RpcaData d = gen_rpca(rows, cols, rank, density, frac, spec.seed);
      ProblemInstance inst = build_rpca(rows, cols, d.observed, d.b, d.radius, l);
      inst.planted_matrix = d.clean;
      return inst;
    }
    if (spec.builder == "game") {
      reject_unknown(p, {"matrix", "rows", "cols"}, where);
      Matrix m;
      if (p.contains("matrix")) {
        const auto rows = p.at("matrix").get<std::vector<std::vector<double>>>();
        if (rows.empty() || rows[0].empty()) throw ConfigError(where + ".matrix: empty");
        m.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != rows[0].size()) throw ConfigError(where + ".matrix: ragged rows");
          for (std::size_t c = 0; c < rows[i].size(); ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
      } else {
        m = gen_game(get_or<int>(p, "rows", 3, where), get_or<int>(p, "cols", 3, where), spec.seed);
      }
      return build_matrix_game(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  throw ConfigError("problem.builder: unknown builder '" + spec.builder + "'");
}

/// Measured bound inputs with the configuration's overrides applied.
inline BoundInputs resolve_bound_inputs(const ProblemInstance& inst, const RunConfig& rc) {
  BoundInputs in = inst.bounds;
  const auto& o = rc.bounds;
  if (o.diameter) in.diameter = *o.diameter;
  if (o.lf) in.lf = *o.lf;
  if (o.norm_a) in.norm_a = *o.norm_a;
  if (o.lg) in.lg = *o.lg;
  if (o.f_star) in.f_star = *o.f_star;
  if (o.initial_gap) in.initial_gap = *o.initial_gap;
  if (o.y_star_norm) in.y_star_norm = *o.y_star_norm;
  in.beta0 = rc.solver.beta0;
  switch (rc.solver.oracle.kind) {
    case OracleKind::Exact: in.model = ErrorModel::Exact; in.delta = 0.0; break;
    case OracleKind::Additive: in.model = ErrorModel::Additive; in.delta = rc.solver.oracle.delta; break;
    case OracleKind::Multiplicative: in.model = ErrorModel::Multiplicative; in.delta = rc.solver.oracle.delta; break;
  }
  return in;
}

// ---------------------------------------------------------------------------
// Trace CSV

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> trace_header(std::size_t terms) {
  std::vector<std::string> h = {"k", "eta", "beta", "f_value", "g_smoothed_total", "F_beta", "F_or_nan"};
  for (std::size_t j = 1; j <= terms; ++j) h.push_back("feas_gap_" + std::to_string(j));
  h.push_back("lmo_inner_iters");
  h.push_back("elapsed_ms");
  return h;
}

inline void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace, std::size_t terms) {
  const auto header = trace_header(terms);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& r : trace) {
    out << r.k << ',' << format_double(r.eta) << ',' << format_double(r.beta) << ',' << format_double(r.f_value)
        << ',' << format_double(r.g_smoothed_total) << ',' << format_double(r.F_beta) << ','
        << format_double(r.F_or_nan);
    for (std::size_t j = 0; j < terms; ++j) out << ',' << format_double(r.feas_gaps[j]);
    out << ',' << r.lmo_inner_iters << ',' << format_double(r.elapsed_ms) << "\n";
  }
}

inline void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace, std::size_t terms) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  write_trace_csv(out, trace, terms);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number: " + s);
  return v;
}

/// Reads a trace written by write_trace_csv back into records.
inline std::vector<IterationRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace: empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 9) throw std::runtime_error("trace: header too short");
  const std::size_t terms = header.size() - 9;
  if (header != trace_header(terms)) throw std::runtime_error("trace: unexpected header");
  std::vector<IterationRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw std::runtime_error("trace: row width mismatch");
    IterationRecord r;
    try {
      r.k = std::stoi(cells[0]);
      r.eta = parse_double(cells[1]);
      r.beta = parse_double(cells[2]);
      r.f_value = parse_double(cells[3]);
      r.g_smoothed_total = parse_double(cells[4]);
      r.F_beta = parse_double(cells[5]);
      r.F_or_nan = parse_double(cells[6]);
      for (std::size_t j = 0; j < terms; ++j) r.feas_gaps.push_back(parse_double(cells[7 + j]));
      r.lmo_inner_iters = std::stoi(cells[7 + terms]);
      r.elapsed_ms = parse_double(cells[8 + terms]);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("trace: bad row: ") + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<IterationRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  return read_trace_csv(in);
}

}  // namespace hcgm
