#include "wpcn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "wpcn/errors.hpp"

namespace wpcn {

namespace {

// Keeps the departure rate p_t (1 - p_e) away from zero when the coupling
// saturates.
constexpr double kMaxWetProbability = 1.0 - 1e-12;
constexpr double kRescaleAbove = 1e200;

double clamp_wet_probability(double p_e) { return std::clamp(p_e, 0.0, kMaxWetProbability); }

StationaryDistribution normalized(std::vector<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
  return StationaryDistribution{std::move(v)};
}

// Device types: distinct harvest-unit values, in ascending order.
struct TypeLayout {
  std::vector<int> units;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> type_of;  // per device
};

TypeLayout layout_of(const NetworkConfig& config) {
  std::map<int, std::size_t> count_by_units;
  for (const auto& d : config.devices()) ++count_by_units[d.harvest_units];
  TypeLayout layout;
  std::map<int, std::size_t> index_of;
  for (const auto& [units, count] : count_by_units) {
    index_of[units] = layout.units.size();
    layout.units.push_back(units);
    layout.counts.push_back(count);
  }
  for (const auto& d : config.devices()) layout.type_of.push_back(index_of[d.harvest_units]);
  return layout;
}

// Type-level Psi: w[t] is the shared outage probability of type t.
class TypeMap {
 public:
  TypeMap(const NetworkConfig& config, TypeLayout layout)
      : capacity_(config.capacity()), p_t_(config.transmit_prob()), layout_(std::move(layout)) {}

  std::size_t size() const { return layout_.units.size(); }

  double wet_probability(std::size_t t, std::span<const double> w) const {
    double no_request = 1.0;
    for (std::size_t u = 0; u < w.size(); ++u) {
      const std::size_t others = layout_.counts[u] - (u == t ? 1 : 0);
      no_request *= std::pow(1.0 - w[u], static_cast<double>(others));
    }
    return clamp_wet_probability(1.0 - no_request);
  }

  double apply(std::size_t t, std::span<const double> w) const {
    return f_outage(ChainParams{layout_.units[t], capacity_, p_t_, wet_probability(t, w)});
  }

  const TypeLayout& layout() const { return layout_; }

 private:
  int capacity_;
  double p_t_;
  TypeLayout layout_;
};

// Each level bisects its own type's residual w_t - Psi_t(w) with the deeper
// types re-solved at every probe. At the innermost level the residual is
// strictly increasing in w_t, so the bracket [0, 1] always holds a sign change.
class NestedBisection {
 public:
  explicit NestedBisection(const TypeMap& map) : map_(map), w_(map.size(), 0.0) {}

  std::vector<double> solve() {
    solve_level(0);
    return w_;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  double residual_at(std::size_t level, double x) {
    w_[level] = x;
    if (level + 1 < w_.size()) solve_level(level + 1);
    ++evaluations_;
    return x - map_.apply(level, w_);
  }

  void solve_level(std::size_t level) {
    double lo = 0.0;
    double hi = 1.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-18; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (residual_at(level, mid) > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    residual_at(level, 0.5 * (lo + hi));
  }

  const TypeMap& map_;
  std::vector<double> w_;
  std::size_t evaluations_ = 0;
};

std::vector<double> expand_types(const TypeLayout& layout, std::span<const double> type_w) {
  std::vector<double> w(layout.type_of.size());
  for (std::size_t n = 0; n < w.size(); ++n) w[n] = type_w[layout.type_of[n]];
  return w;
}

}  // namespace

void validate(const ChainParams& params) {
  if (params.capacity < 2) {
    throw DomainError(fmt::format("capacity must be >= 2, got {}", params.capacity));
  }
  if (params.harvest_units < 1 || params.harvest_units >= params.capacity) {
    throw DomainError(fmt::format("harvest units {} outside [1, C) with C = {}",
                                  params.harvest_units, params.capacity));
  }
  if (!(params.p_t > 0.0 && params.p_t < 1.0)) {
    throw DomainError(fmt::format("p_t must lie in (0, 1), got {}", params.p_t));
  }
  if (!(params.p_e >= 0.0 && params.p_e < 1.0)) {
    throw DomainError(fmt::format("p_e must lie in [0, 1), got {}", params.p_e));
  }
}

StationaryDistribution bd_stationary_recursive(const ChainParams& params) {
  validate(params);
  const int e = params.harvest_units;
  const int capacity = params.capacity;
  const double alpha = params.departure_rate();
  const double p_e = params.p_e;

  // v[i] is proportional to w^i; v[0] starts at 1.
  std::vector<double> v(static_cast<std::size_t>(capacity) + 1, 0.0);
  v[0] = 1.0;
  double below = 0.0;  // sum of v[1..i-1]
  for (int i = 1; i <= capacity; ++i) {
    double inflow;
    if (i <= e) {
      // Empty battery jumps straight to e, so state 0 feeds every cut up to e.
      inflow = v[0] + p_e * below;
    } else {
      double window = 0.0;
      for (int j = i - e; j < i; ++j) window += v[j];
      inflow = p_e * window;
    }
    v[i] = inflow / alpha;
    below += v[i];
    if (v[i] > kRescaleAbove) {
      for (int j = 0; j <= i; ++j) v[j] /= kRescaleAbove;
      below /= kRescaleAbove;
    }
  }
  return normalized(std::move(v));
}

StationaryDistribution bd_stationary_matrix(const ChainParams& params) {
  validate(params);
  const int e = params.harvest_units;
  const int capacity = params.capacity;
  const int dim = capacity + 1;
  const double alpha = params.departure_rate();
  const double p_e = params.p_e;

  // Row i-1 balances the cut between states i-1 and i; the last row is the
  // total probability condition.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 1; i <= capacity; ++i) {
    const int row = i - 1;
    if (i <= e) {
      h(row, 0) = 1.0;
      for (int j = 1; j < i; ++j) h(row, j) = p_e;
    } else {
      for (int j = i - e; j < i; ++j) h(row, j) = p_e;
    }
    h(row, i) = -alpha;
  }
  h.row(capacity).setOnes();

  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  b(capacity) = 1.0;

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
  const Eigen::VectorXd w = lu.solve(b);
  if (!w.allFinite()) {
    throw SolverError(fmt::format("flow-conservation matrix is singular (e = {}, C = {}, alpha = {})",
                                  e, capacity, alpha));
  }

  std::vector<double> probs(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    double x = w(i);
    if (x < 0.0) {
      if (x < -1e-12) {
        throw SolverError(fmt::format("negative stationary probability {} at state {}", x, i));
      }
      x = 0.0;
    }
    probs[static_cast<std::size_t>(i)] = x;
  }
  return normalized(std::move(probs));
}

double f_outage(const ChainParams& params) { return bd_stationary_recursive(params).outage(); }

double g_wet_probability(std::span<const double> w0, std::size_t n) {
  double no_request = 1.0;
  for (std::size_t i = 0; i < w0.size(); ++i) {
    if (i != n) no_request *= 1.0 - w0[i];
  }
  return 1.0 - no_request;
}

std::vector<double> fixed_point_map(const NetworkConfig& config, std::span<const double> w0) {
  std::vector<double> out(w0.size());
  for (std::size_t n = 0; n < w0.size(); ++n) {
    const double p_e = clamp_wet_probability(g_wet_probability(w0, n));
    out[n] = f_outage(
        ChainParams{config.harvest_units(n), config.capacity(), config.transmit_prob(), p_e});
  }
  return out;
}

FixedPointSolution solve_fixed_point(const NetworkConfig& config, const FixedPointOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("fixed-point tolerance must be positive");

  const TypeMap map(config, layout_of(config));
  FixedPointSolution sol;
  std::vector<double> type_w;

  if (map.size() <= 3) {
    NestedBisection solver(map);
    type_w = solver.solve();
    sol.iterations = solver.evaluations();
    sol.method = map.size() == 1 ? FixedPointMethod::bisection : FixedPointMethod::nested_bisection;
  } else {
    // Psi is steep near the solution, so the step shrinks whenever the
    // residual grows.
    sol.method = FixedPointMethod::damped_iteration;
    type_w.assign(map.size(), 0.5);
    std::vector<double> next(map.size());
    double step = 0.5;
    double previous = std::numeric_limits<double>::infinity();
    for (sol.iterations = 0; sol.iterations < opts.max_iters; ++sol.iterations) {
      double residual = 0.0;
      for (std::size_t t = 0; t < map.size(); ++t) {
        next[t] = map.apply(t, type_w);
        residual = std::max(residual, std::abs(next[t] - type_w[t]));
      }
      if (residual <= opts.tol) break;
      if (residual > previous) step = std::max(step * 0.5, 1e-9);
      previous = residual;
      for (std::size_t t = 0; t < map.size(); ++t) {
        type_w[t] = (1.0 - step) * type_w[t] + step * next[t];
      }
    }
  }

  sol.w0 = expand_types(map.layout(), type_w);
  const auto image = fixed_point_map(config, sol.w0);
  for (std::size_t n = 0; n < sol.w0.size(); ++n) {
    sol.residual = std::max(sol.residual, std::abs(sol.w0[n] - image[n]));
  }
  sol.p_e.resize(sol.w0.size());
  for (std::size_t n = 0; n < sol.w0.size(); ++n) {
    sol.p_e[n] = g_wet_probability(sol.w0, n);
  }
  if (!(sol.residual <= opts.tol)) {
    throw ConvergenceError(
        fmt::format("fixed point did not converge: residual {:.3e} > tol {:.3e} after {} steps",
                    sol.residual, opts.tol, sol.iterations),
        sol.residual);
  }
  return sol;
}

SlotProbabilities slot_probabilities(std::span<const double> w0, double p_t) {
  const auto n = static_cast<double>(w0.size());
  double no_request = 1.0;
  for (double w : w0) no_request *= 1.0 - w;

  SlotProbabilities p;
  p.p_ene = 1.0 - no_request;
  p.p_suc = no_request * n * p_t * std::pow(1.0 - p_t, n - 1.0);
  p.p_idl = no_request * std::pow(1.0 - p_t, n);
  p.p_col = std::max(0.0, no_request - p.p_suc - p.p_idl);
  return p;
}

ThroughputReport throughput(const SlotProbabilities& probs, const SlotDurations& durations,
                            std::size_t num_devices) {
  const double useful = probs.p_suc * durations.t_suc;
  const double air_time = useful + probs.p_col * durations.t_col + probs.p_idl * durations.t_idl +
                          probs.p_ene * durations.t_ene;
  if (!(air_time > 0.0)) throw DomainError("throughput undefined: expected air time is zero");
  if (num_devices == 0) throw DomainError("throughput needs at least one device");

  ThroughputReport report;
  report.slot_probs = probs;
  report.durations = durations;
  report.psi = useful / air_time;
  report.per_user_rate = report.psi / static_cast<double>(num_devices);
  return report;
}

ThroughputReport benchmark_unlimited(std::size_t num_devices, double p_t,
                                     const SlotDurations& durations) {
  if (num_devices == 0) throw DomainError("benchmark needs at least one device");
  if (!(p_t > 0.0 && p_t < 1.0)) {
    throw DomainError(fmt::format("p_t must lie in (0, 1), got {}", p_t));
  }
  const std::vector<double> never_empty(num_devices, 0.0);
  return throughput(slot_probabilities(never_empty, p_t), durations, num_devices);
}

AnalysisResult analyze(const NetworkConfig& config, const SlotDurations& durations,
                       const FixedPointOptions& opts) {
  AnalysisResult result;
  result.fixed_point = solve_fixed_point(config, opts);
  result.report = throughput(slot_probabilities(result.fixed_point.w0, config.transmit_prob()),
                             durations, config.size());
  return result;
}

}  // namespace wpcn
