#pragma once

// Slot-level simulation of the distributed energy/information scheduling
// protocol. Each slot is classified at its start: any empty battery raises an
// energy request (PIFS beats DIFS) and the slot becomes an energy transfer
// slot in which every device harvests; otherwise every device transmits
// independently with probability p_t.

#include <cstddef>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "wpcn/model.hpp"

namespace wpcn {

/// Bernoulli source with a bit-exact definition on every platform:
/// std::mt19937_64 output mapped to [0, 1) through its top 53 bits.
class SlotRng {
 public:
  explicit SlotRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

struct SimState {
  std::vector<int> batteries;
  std::uint64_t slot_index = 0;
};

namespace outcome {
struct Wet {
  bool operator==(const Wet&) const = default;
};
struct Success {
  std::size_t device = 0;
  bool operator==(const Success&) const = default;
};
struct Collision {
  std::vector<std::size_t> devices;  ///< at least two, ascending
  bool operator==(const Collision&) const = default;
};
struct Idle {
  bool operator==(const Idle&) const = default;
};
}  // namespace outcome

using SlotOutcome = std::variant<outcome::Wet, outcome::Success, outcome::Collision, outcome::Idle>;

enum class SlotKind : std::uint8_t { wet, success, collision, idle };

SlotKind kind_of(const SlotOutcome& o);

struct SlotTally {
  std::uint64_t wet = 0;
  std::uint64_t success = 0;
  std::uint64_t collision = 0;
  std::uint64_t idle = 0;
  std::vector<std::uint64_t> device_success;
  double air_time = 0.0;          ///< seconds
  double success_air_time = 0.0;  ///< seconds

  std::uint64_t total() const { return wet + success + collision + idle; }
  double frequency(SlotKind kind) const;
  /// Empirical throughput: successful air time over total air time.
  double throughput() const;

  SlotTally& operator+=(const SlotTally& other);
};

/// Per device and battery level i (index 0 unused): how often a slot started
/// with the device at level i, and how many of those slots were energy
/// transfer slots.
struct EdaEstimate {
  std::vector<std::vector<std::uint64_t>> occurrences;
  std::vector<std::vector<std::uint64_t>> wet_given;

  EdaEstimate() = default;
  EdaEstimate(std::size_t num_devices, int capacity);

  std::size_t num_devices() const { return occurrences.size(); }
  int capacity() const { return occurrences.empty() ? 0 : static_cast<int>(occurrences[0].size()) - 1; }
  /// wet_given / occurrences, 0 when the state was never visited.
  double ratio(std::size_t device, int state) const;

  /// Sums the counts of the devices in each group into one row per group.
  EdaEstimate pooled(const std::vector<std::vector<std::size_t>>& groups) const;

  EdaEstimate& operator+=(const EdaEstimate& other);
};

struct EdaFlatness {
  bool empty = true;              ///< no state met the sample threshold
  double mean_ratio = 0.0;
  double max_rel_deviation = 0.0; ///< max |ratio - mean| / mean over used states
  std::vector<int> used_states;
  std::vector<int> excluded_states;  ///< i >= 2 with fewer than min_samples visits
};

/// Flatness of the observed WET probability across battery levels i >= 2
/// (level 1 sits next to the forced-recharge state and is always excluded).
std::vector<EdaFlatness> measure_eda(const EdaEstimate& eda, std::uint64_t min_samples);

/// Advances one slot in place. Random draws happen only in WIT slots, one per
/// eligible device in ascending index order.
SlotOutcome step(SimState& state, const NetworkConfig& config, SlotRng& rng);

struct RunOptions {
  std::uint64_t seed = 1;
  std::uint64_t num_slots = 1000000;
  std::uint64_t burn_in = 10000;
  /// Empty means every battery starts full.
  std::vector<int> initial_batteries;
};

struct RunResult {
  SlotTally tally;
  EdaEstimate eda;
  /// histogram[n][i]: slot starts with device n at level i.
  std::vector<std::vector<std::uint64_t>> battery_histogram;
  SimState final_state;
};

/// Runs burn_in untallied slots, then num_slots tallied ones. Deterministic in
/// (config, durations, options).
RunResult run(const NetworkConfig& config, const SlotDurations& durations, const RunOptions& options);

}  // namespace wpcn
