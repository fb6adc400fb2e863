#pragma once

// Experiment description files. The format is INI-style `key = value` with
// sections; values are in the units people write down (ms, mW, MHz, m) and
// are converted to SI when the network is materialized:
//
//   [experiment]  name, output
//   [radio]       harvest_efficiency, tx_antenna_gain, rx_antenna_gain,
//                 hap_power_w, wd_tx_power_mw, carrier_freq_mhz, pathloss_exp
//   [timing]      difs_ms, pifs_ms, sifs_ms, erb_ms, ack_ms, sigma_ms,
//                 payload_ms, energy_transfer_ms
//   [network]     capacity, n (list), p_t (number | 1/N | 1/m), m (list), benchmark
//   [group NAME]  count | share (a/b of N), distance_m | harvest_units
//   [simulation]  seed, slots, burn_in, min_samples
//
// Omitted radio/timing keys default to the baseline parameter set. Lists accept
// comma-separated values and inclusive ranges: `12..30, 40`.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wpcn/model.hpp"

namespace wpcn {

struct RadioTable {
  double harvest_efficiency = 0.51;
  double tx_antenna_gain = 2.5;
  double rx_antenna_gain = 2.0;
  double hap_power_w = 3.0;
  double wd_tx_power_mw = 2.0;
  double carrier_freq_mhz = 915.0;
  double pathloss_exp = 2.0;

  RadioParams to_params() const;
  bool operator==(const RadioTable&) const = default;
};

struct TimingTable {
  double difs_ms = 50.0;
  double pifs_ms = 30.0;
  double sifs_ms = 10.0;
  double erb_ms = 30.0;
  double ack_ms = 20.0;
  double sigma_ms = 50.0;
  double payload_ms = 420.0;
  double energy_transfer_ms = 2430.0;

  ProtocolTiming to_timing() const;
  bool operator==(const TimingTable&) const = default;
};

struct Share {
  long num = 1;
  long den = 1;
  bool operator==(const Share&) const = default;
};

struct DeviceGroup {
  std::string name;
  std::optional<std::size_t> count;
  std::optional<Share> share;
  std::optional<double> distance_m;
  std::optional<int> harvest_units;

  bool operator==(const DeviceGroup&) const = default;
};

enum class TransmitRule {
  fixed,       ///< one explicit p_t
  per_device,  ///< p_t = 1/N
  sweep_m,     ///< p_t = 1/m for every m in the list
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string output;
  RadioTable radio;
  TimingTable timing;
  int capacity = 30;
  std::vector<DeviceGroup> groups;
  std::vector<std::size_t> sizes;  ///< population sizes; required with shares
  TransmitRule rule = TransmitRule::per_device;
  double p_t = 0.0;                ///< used by TransmitRule::fixed
  std::vector<int> m_values;       ///< used by TransmitRule::sweep_m
  bool benchmark = false;
  std::uint64_t seed = 1;
  std::uint64_t slots = 1'000'000;
  std::uint64_t burn_in = 10'000;
  std::uint64_t min_samples = 100;

  bool operator==(const ExperimentConfig&) const = default;
};

/// One concrete network drawn from an experiment grid.
struct ExperimentPoint {
  std::size_t index = 0;
  std::size_t num_devices = 0;
  double p_t = 0.0;
  int m = 0;  ///< 0 unless the rule is sweep_m
  NetworkConfig network;
  std::vector<std::string> group_names;
  std::vector<std::vector<std::size_t>> group_members;  ///< device indices per group
  std::vector<int> group_units;
};

/// Parses and validates. Errors carry the section/key or line that failed.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text: every field spelled out, parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

/// Grid points in stable order: population sizes outer, m values inner.
std::vector<ExperimentPoint> expand(const ExperimentConfig& config);

/// Built-in configurations: baseline, population, access-sweep, access-sweep-wide, eda, small.
std::string preset_text(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace wpcn
