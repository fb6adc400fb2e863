#include "wpcn/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "wpcn/errors.hpp"

namespace wpcn {

namespace {

// pi_next = pi P
void propagate(const JointChain& chain, const std::vector<double>& pi, std::vector<double>& next) {
  std::fill(next.begin(), next.end(), 0.0);
  for (std::size_t s = 0; s < pi.size(); ++s) {
    const double mass = pi[s];
    if (mass == 0.0) continue;
    for (std::size_t k = chain.row_start[s]; k < chain.row_start[s + 1]; ++k) {
      next[chain.target[k]] += mass * chain.prob[k];
    }
  }
}

std::vector<double> direct_stationary(const JointChain& chain) {
  const auto dim = static_cast<Eigen::Index>(chain.num_states());
  // Rows of (P^T - I), the last one swapped for the normalization condition.
  Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(dim, dim);
  for (std::size_t s = 0; s < chain.num_states(); ++s) {
    for (std::size_t k = chain.row_start[s]; k < chain.row_start[s + 1]; ++k) {
      a(static_cast<Eigen::Index>(chain.target[k]), static_cast<Eigen::Index>(s)) += chain.prob[k];
    }
  }
  a.row(dim - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  b(dim - 1) = 1.0;
  const Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(b);
  if (!x.allFinite()) throw SolverError("joint chain balance system is singular");
  std::vector<double> pi(chain.num_states());
  for (Eigen::Index i = 0; i < dim; ++i) pi[static_cast<std::size_t>(i)] = std::max(0.0, x(i));
  double total = 0.0;
  for (double p : pi) total += p;
  for (double& p : pi) p /= total;
  return pi;
}

}  // namespace

JointStateCodec::JointStateCodec(std::size_t num_devices, int capacity)
    : num_devices_(num_devices), base_(static_cast<std::size_t>(capacity) + 1), num_states_(1) {
  for (std::size_t n = 0; n < num_devices_; ++n) {
    if (num_states_ > std::numeric_limits<std::size_t>::max() / base_) {
      throw SizeError("joint state space overflows the index type");
    }
    num_states_ *= base_;
  }
}

std::size_t JointStateCodec::encode(const std::vector<int>& batteries) const {
  std::size_t index = 0;
  for (std::size_t n = num_devices_; n-- > 0;) {
    index = index * base_ + static_cast<std::size_t>(batteries[n]);
  }
  return index;
}

std::vector<int> JointStateCodec::decode(std::size_t index) const {
  std::vector<int> batteries(num_devices_);
  for (std::size_t n = 0; n < num_devices_; ++n) {
    batteries[n] = static_cast<int>(index % base_);
    index /= base_;
  }
  return batteries;
}

JointChain build_joint_chain(const NetworkConfig& config) {
  const std::size_t num_devices = config.size();
  const int capacity = config.capacity();

  // Check the guard before the codec multiplies out a huge product.
  double states = 1.0;
  for (std::size_t n = 0; n < num_devices; ++n) states *= capacity + 1;
  if (states > static_cast<double>(kJointStateGuard)) {
    throw SizeError(fmt::format(
        "joint chain has (C+1)^N = {}^{} = {:.3g} states, above the guard of {}; "
        "use the simulator for networks of this size",
        capacity + 1, num_devices, states, kJointStateGuard));
  }

  JointChain chain{JointStateCodec(num_devices, capacity), {}, {}, {}};
  const std::size_t n_states = chain.num_states();
  chain.row_start.reserve(n_states + 1);
  chain.row_start.push_back(0);

  const double p_t = config.transmit_prob();
  const std::size_t subsets = std::size_t{1} << num_devices;
  std::vector<double> subset_prob(subsets);
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    const auto k = static_cast<double>(std::popcount(mask));
    subset_prob[mask] = std::pow(p_t, k) * std::pow(1.0 - p_t, static_cast<double>(num_devices) - k);
  }

  std::vector<int> next(num_devices);
  for (std::size_t s = 0; s < n_states; ++s) {
    const auto batteries = chain.codec.decode(s);
    const bool request = std::find(batteries.begin(), batteries.end(), 0) != batteries.end();
    if (request) {
      for (std::size_t n = 0; n < num_devices; ++n) {
        next[n] = std::min(batteries[n] + config.harvest_units(n), capacity);
      }
      chain.target.push_back(chain.codec.encode(next));
      chain.prob.push_back(1.0);
    } else {
      // Every battery is >= 1, so all N devices contend.
      for (std::size_t mask = 0; mask < subsets; ++mask) {
        for (std::size_t n = 0; n < num_devices; ++n) {
          next[n] = batteries[n] - static_cast<int>((mask >> n) & 1U);
        }
        chain.target.push_back(chain.codec.encode(next));
        chain.prob.push_back(subset_prob[mask]);
      }
    }
    chain.row_start.push_back(chain.target.size());
  }
  return chain;
}

ExactResult exact_analysis(const NetworkConfig& config, const SlotDurations& durations,
                           const StationaryOptions& opts) {
  const JointChain chain = build_joint_chain(config);
  const std::size_t num_devices = config.size();
  const int capacity = config.capacity();
  const std::size_t n_states = chain.num_states();

  ExactResult result;
  std::vector<double> pi(n_states, 0.0);
  std::vector<double> next(n_states, 0.0);
  pi[chain.codec.encode(std::vector<int>(num_devices, capacity))] = 1.0;

  bool converged = false;
  double change = 0.0;
  for (result.iterations = 0; result.iterations < opts.max_iters; ++result.iterations) {
    propagate(chain, pi, next);
    change = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) change += std::abs(next[s] - pi[s]);
    pi.swap(next);
    if (change < opts.tol) {
      converged = true;
      ++result.iterations;
      break;
    }
  }
  if (!converged) {
    if (n_states > opts.direct_solve_limit) {
      throw ConvergenceError(
          fmt::format("power iteration on the joint chain stalled at L1 change {:.3e} after {} sweeps",
                      change, result.iterations),
          change);
    }
    pi = direct_stationary(chain);
    result.direct_solve = true;
  }

  propagate(chain, pi, next);
  for (std::size_t s = 0; s < n_states; ++s) {
    result.balance_residual = std::max(result.balance_residual, std::abs(next[s] - pi[s]));
  }

  const auto levels = static_cast<std::size_t>(capacity) + 1;
  result.marginals.assign(num_devices, std::vector<double>(levels, 0.0));
  std::vector<std::vector<double>> wet_mass(num_devices, std::vector<double>(levels, 0.0));
  double p_ene = 0.0;
  for (std::size_t s = 0; s < n_states; ++s) {
    const double mass = pi[s];
    if (mass == 0.0) continue;
    const auto batteries = chain.codec.decode(s);
    const auto empty = static_cast<std::size_t>(std::count(batteries.begin(), batteries.end(), 0));
    if (empty > 0) p_ene += mass;
    for (std::size_t n = 0; n < num_devices; ++n) {
      const auto level = static_cast<std::size_t>(batteries[n]);
      result.marginals[n][level] += mass;
      // Another device is empty iff the empty count excludes this one.
      if (empty > (level == 0 ? 1U : 0U)) wet_mass[n][level] += mass;
    }
  }

  result.wet_given.assign(num_devices, std::vector<double>(levels, 0.0));
  for (std::size_t n = 0; n < num_devices; ++n) {
    for (std::size_t i = 1; i < levels; ++i) {
      if (result.marginals[n][i] > 0.0) {
        result.wet_given[n][i] = wet_mass[n][i] / result.marginals[n][i];
      }
    }
  }

  // With no empty battery all N devices contend independently.
  const double p_t = config.transmit_prob();
  const auto n = static_cast<double>(num_devices);
  const double p_it = 1.0 - p_ene;
  auto& sp = result.slot_probs;
  sp.p_ene = p_ene;
  sp.p_suc = p_it * n * p_t * std::pow(1.0 - p_t, n - 1.0);
  sp.p_idl = p_it * std::pow(1.0 - p_t, n);
  sp.p_col = std::max(0.0, p_it - sp.p_suc - sp.p_idl);
  result.report = throughput(sp, durations, num_devices);
  result.stationary = std::move(pi);
  return result;
}

}  // namespace wpcn
