#pragma once

// Analytical throughput model. Each device's battery is a birth-death chain
// on {0..C}: one unit leaves per transmission, e_n units arrive per energy
// transfer slot. Under the energy decoupling approximation every device sees
// a constant probability p_e of an energy transfer slot, which couples the
// devices only through their outage probabilities w^0. The coupled system is
// solved as a fixed point w^0 = f(g(w^0)).

#include <cstddef>
#include <span>
#include <vector>

#include "wpcn/model.hpp"

namespace wpcn {

/// Parameters of a single device's energy queue.
struct ChainParams {
  int harvest_units = 1;  ///< e_n, 1 <= e_n < C
  int capacity = 2;       ///< C
  double p_t = 0.5;       ///< transmit probability, (0, 1)
  double p_e = 0.0;       ///< probability of observing a WET slot, [0, 1)

  /// p_t (1 - p_e): probability of a one-unit departure from a non-empty state.
  double departure_rate() const { return p_t * (1.0 - p_e); }
};

void validate(const ChainParams& params);

/// Limiting probabilities of battery levels 0..C.
struct StationaryDistribution {
  std::vector<double> probs;

  double outage() const { return probs.front(); }
  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

struct SlotProbabilities {
  double p_ene = 0.0;
  double p_suc = 0.0;
  double p_idl = 0.0;
  double p_col = 0.0;

  double sum() const { return p_ene + p_suc + p_idl + p_col; }
};

struct ThroughputReport {
  SlotProbabilities slot_probs;
  SlotDurations durations;
  double psi = 0.0;            ///< fraction of air time carrying successful payloads
  double per_user_rate = 0.0;  ///< psi / N
};

/// Forward substitution through the cut (flow-conservation) equations,
/// O(C * e_n). Rescales on the fly so extreme parameters cannot overflow.
StationaryDistribution bd_stationary_recursive(const ChainParams& params);

/// Dense (C+1)x(C+1) solve of the same cut equations plus the normalization
/// row, by LU with partial pivoting. Independent cross-check of the recursion.
StationaryDistribution bd_stationary_matrix(const ChainParams& params);

/// Outage probability w^0 as a function of the queue parameters.
double f_outage(const ChainParams& params);

/// Probability that device `n` observes an energy request from some other
/// device: 1 - prod_{i != n} (1 - w0[i]).
double g_wet_probability(std::span<const double> w0, std::size_t n);

enum class FixedPointMethod {
  bisection,         ///< one device type, scalar bisection on w - Psi(w)
  nested_bisection,  ///< two or three device types, one bisection per type
  damped_iteration,  ///< many types, w <- (1 - lambda) w + lambda Psi(w)
};

struct FixedPointOptions {
  double tol = 1e-10;
  std::size_t max_iters = 100000;
};

struct FixedPointSolution {
  std::vector<double> w0;   ///< per device outage probability
  std::vector<double> p_e;  ///< per device WET probability g_n(w0)
  double residual = 0.0;    ///< max_n |w0[n] - Psi(w0)[n]|
  std::size_t iterations = 0;
  FixedPointMethod method = FixedPointMethod::bisection;
};

/// Psi(w0): per device f_n(g_n(w0)).
std::vector<double> fixed_point_map(const NetworkConfig& config, std::span<const double> w0);

/// Solves w0 = Psi(w0). Devices with equal harvest units are exchangeable and
/// share a value. Throws ConvergenceError when the residual exceeds `tol`.
FixedPointSolution solve_fixed_point(const NetworkConfig& config, const FixedPointOptions& opts = {});

SlotProbabilities slot_probabilities(std::span<const double> w0, double p_t);

ThroughputReport throughput(const SlotProbabilities& probs, const SlotDurations& durations,
                            std::size_t num_devices);

/// Same population with an unlimited energy supply: no energy transfer slots.
ThroughputReport benchmark_unlimited(std::size_t num_devices, double p_t,
                                     const SlotDurations& durations);

struct AnalysisResult {
  FixedPointSolution fixed_point;
  ThroughputReport report;
};

/// Fixed point, slot probabilities and throughput in one call.
AnalysisResult analyze(const NetworkConfig& config, const SlotDurations& durations,
                       const FixedPointOptions& opts = {});

}  // namespace wpcn
