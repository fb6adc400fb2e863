#pragma once

// Exact reference for small networks: the joint Markov chain over all N
// battery levels, with no decoupling approximation. Only practical while
// (C+1)^N stays small.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wpcn/analysis.hpp"
#include "wpcn/model.hpp"

namespace wpcn {

inline constexpr std::size_t kJointStateGuard = 1'000'000;

/// Mixed-radix encoding of a battery vector: device 0 is the least
/// significant digit, base C+1.
class JointStateCodec {
 public:
  JointStateCodec(std::size_t num_devices, int capacity);

  std::size_t num_states() const { return num_states_; }
  std::size_t encode(const std::vector<int>& batteries) const;
  std::vector<int> decode(std::size_t index) const;

 private:
  std::size_t num_devices_;
  std::size_t base_;
  std::size_t num_states_;
};

/// Row-compressed transition matrix of the joint chain.
struct JointChain {
  JointStateCodec codec;
  std::vector<std::size_t> row_start;  ///< size num_states + 1
  std::vector<std::size_t> target;
  std::vector<double> prob;

  std::size_t num_states() const { return codec.num_states(); }
};

/// Throws SizeError when (C+1)^N exceeds kJointStateGuard.
JointChain build_joint_chain(const NetworkConfig& config);

struct StationaryOptions {
  double tol = 1e-12;                 ///< L1 change between power-iteration sweeps
  std::size_t max_iters = 10'000'000;
  std::size_t direct_solve_limit = 4096;  ///< fallback dense solve up to this many states
};

struct ExactResult {
  std::vector<double> stationary;  ///< over joint states, codec order
  SlotProbabilities slot_probs;
  ThroughputReport report;
  /// marginals[n][i]: probability that device n holds i units.
  std::vector<std::vector<double>> marginals;
  /// wet_given[n][i]: P(some other battery empty | device n holds i), i >= 1.
  std::vector<std::vector<double>> wet_given;
  double balance_residual = 0.0;  ///< max |pi P - pi|
  std::size_t iterations = 0;
  bool direct_solve = false;
};

ExactResult exact_analysis(const NetworkConfig& config, const SlotDurations& durations,
                           const StationaryOptions& opts = {});

}  // namespace wpcn
