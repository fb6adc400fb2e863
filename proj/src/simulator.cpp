#include "wpcn/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wpcn/errors.hpp"

namespace wpcn {

namespace {

// Shared by step() and run(); fills `transmitters` without allocating once
// its capacity has grown to N.
SlotKind advance(std::vector<int>& batteries, const NetworkConfig& config, SlotRng& rng,
                 std::vector<std::size_t>& transmitters) {
  transmitters.clear();
  const bool request = std::any_of(batteries.begin(), batteries.end(), [](int b) { return b == 0; });
  if (request) {
    const int capacity = config.capacity();
    for (std::size_t n = 0; n < batteries.size(); ++n) {
      batteries[n] = std::min(batteries[n] + config.harvest_units(n), capacity);
    }
    return SlotKind::wet;
  }

  const double p_t = config.transmit_prob();
  for (std::size_t n = 0; n < batteries.size(); ++n) {
    if (rng.bernoulli(p_t)) transmitters.push_back(n);
  }
  for (std::size_t n : transmitters) --batteries[n];
  switch (transmitters.size()) {
    case 0:
      return SlotKind::idle;
    case 1:
      return SlotKind::success;
    default:
      return SlotKind::collision;
  }
}

}  // namespace

SlotKind kind_of(const SlotOutcome& o) {
  return static_cast<SlotKind>(o.index());
}

double SlotTally::frequency(SlotKind kind) const {
  const auto n = total();
  if (n == 0) return 0.0;
  std::uint64_t count = 0;
  switch (kind) {
    case SlotKind::wet:
      count = wet;
      break;
    case SlotKind::success:
      count = success;
      break;
    case SlotKind::collision:
      count = collision;
      break;
    case SlotKind::idle:
      count = idle;
      break;
  }
  return static_cast<double>(count) / static_cast<double>(n);
}

double SlotTally::throughput() const { return air_time > 0.0 ? success_air_time / air_time : 0.0; }

SlotTally& SlotTally::operator+=(const SlotTally& other) {
  wet += other.wet;
  success += other.success;
  collision += other.collision;
  idle += other.idle;
  if (device_success.size() < other.device_success.size()) {
    device_success.resize(other.device_success.size(), 0);
  }
  for (std::size_t n = 0; n < other.device_success.size(); ++n) {
    device_success[n] += other.device_success[n];
  }
  air_time += other.air_time;
  success_air_time += other.success_air_time;
  return *this;
}

EdaEstimate::EdaEstimate(std::size_t num_devices, int capacity)
    : occurrences(num_devices, std::vector<std::uint64_t>(static_cast<std::size_t>(capacity) + 1, 0)),
      wet_given(occurrences) {}

double EdaEstimate::ratio(std::size_t device, int state) const {
  const auto i = static_cast<std::size_t>(state);
  const auto seen = occurrences[device][i];
  return seen == 0 ? 0.0 : static_cast<double>(wet_given[device][i]) / static_cast<double>(seen);
}

EdaEstimate EdaEstimate::pooled(const std::vector<std::vector<std::size_t>>& groups) const {
  EdaEstimate out(groups.size(), capacity());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t n : groups[g]) {
      for (std::size_t i = 0; i < occurrences[n].size(); ++i) {
        out.occurrences[g][i] += occurrences[n][i];
        out.wet_given[g][i] += wet_given[n][i];
      }
    }
  }
  return out;
}

EdaEstimate& EdaEstimate::operator+=(const EdaEstimate& other) {
  if (occurrences.empty()) {
    *this = other;
    return *this;
  }
  for (std::size_t n = 0; n < occurrences.size(); ++n) {
    for (std::size_t i = 0; i < occurrences[n].size(); ++i) {
      occurrences[n][i] += other.occurrences[n][i];
      wet_given[n][i] += other.wet_given[n][i];
    }
  }
  return *this;
}

std::vector<EdaFlatness> measure_eda(const EdaEstimate& eda, std::uint64_t min_samples) {
  if (min_samples == 0) throw DomainError("min_samples must be >= 1");
  std::vector<EdaFlatness> reports(eda.num_devices());
  const int capacity = eda.capacity();
  for (std::size_t n = 0; n < eda.num_devices(); ++n) {
    auto& r = reports[n];
    double sum = 0.0;
    for (int i = 2; i <= capacity; ++i) {
      if (eda.occurrences[n][static_cast<std::size_t>(i)] >= min_samples) {
        r.used_states.push_back(i);
        sum += eda.ratio(n, i);
      } else {
        r.excluded_states.push_back(i);
      }
    }
    if (r.used_states.empty()) continue;
    r.empty = false;
    r.mean_ratio = sum / static_cast<double>(r.used_states.size());
    if (r.mean_ratio > 0.0) {
      for (int i : r.used_states) {
        r.max_rel_deviation =
            std::max(r.max_rel_deviation, std::abs(eda.ratio(n, i) - r.mean_ratio) / r.mean_ratio);
      }
    }
  }
  return reports;
}

SlotOutcome step(SimState& state, const NetworkConfig& config, SlotRng& rng) {
  std::vector<std::size_t> transmitters;
  const SlotKind kind = advance(state.batteries, config, rng, transmitters);
  ++state.slot_index;
  switch (kind) {
    case SlotKind::wet:
      return outcome::Wet{};
    case SlotKind::success:
      return outcome::Success{transmitters.front()};
    case SlotKind::collision:
      return outcome::Collision{std::move(transmitters)};
    case SlotKind::idle:
      break;
  }
  return outcome::Idle{};
}

RunResult run(const NetworkConfig& config, const SlotDurations& durations, const RunOptions& options) {
  const std::size_t num_devices = config.size();
  const int capacity = config.capacity();
  if (options.num_slots == 0) throw ConfigError("slots", "number of slots must be >= 1");

  SimState state;
  if (options.initial_batteries.empty()) {
    state.batteries.assign(num_devices, capacity);
  } else {
    if (options.initial_batteries.size() != num_devices) {
      throw ConfigError("initial_batteries",
                        fmt::format("expected {} entries, got {}", num_devices,
                                    options.initial_batteries.size()));
    }
    for (int b : options.initial_batteries) {
      if (b < 0 || b > capacity) {
        throw ConfigError("initial_batteries",
                          fmt::format("battery level {} outside [0, {}]", b, capacity));
      }
    }
    state.batteries = options.initial_batteries;
  }

  SlotRng rng(options.seed);
  std::vector<std::size_t> transmitters;
  transmitters.reserve(num_devices);

  for (std::uint64_t s = 0; s < options.burn_in; ++s) {
    advance(state.batteries, config, rng, transmitters);
  }

  RunResult result;
  result.tally.device_success.assign(num_devices, 0);
  result.eda = EdaEstimate(num_devices, capacity);
  result.battery_histogram.assign(num_devices,
                                  std::vector<std::uint64_t>(static_cast<std::size_t>(capacity) + 1, 0));

  std::vector<int> at_start(num_devices);
  auto& tally = result.tally;
  for (std::uint64_t s = 0; s < options.num_slots; ++s) {
    at_start = state.batteries;
    const SlotKind kind = advance(state.batteries, config, rng, transmitters);
    const bool wet = kind == SlotKind::wet;
    for (std::size_t n = 0; n < num_devices; ++n) {
      const auto level = static_cast<std::size_t>(at_start[n]);
      ++result.battery_histogram[n][level];
      if (level > 0) {
        ++result.eda.occurrences[n][level];
        if (wet) ++result.eda.wet_given[n][level];
      }
    }
    switch (kind) {
      case SlotKind::wet:
        ++tally.wet;
        break;
      case SlotKind::success:
        ++tally.success;
        ++tally.device_success[transmitters.front()];
        break;
      case SlotKind::collision:
        ++tally.collision;
        break;
      case SlotKind::idle:
        ++tally.idle;
        break;
    }
  }
  // Summing per kind keeps the air time independent of slot order.
  tally.success_air_time = static_cast<double>(tally.success) * durations.t_suc;
  tally.air_time = static_cast<double>(tally.wet) * durations.t_ene + tally.success_air_time +
                   static_cast<double>(tally.collision) * durations.t_col +
                   static_cast<double>(tally.idle) * durations.t_idl;
  state.slot_index = options.burn_in + options.num_slots;
  result.final_state = std::move(state);
  return result;
}

}  // namespace wpcn
