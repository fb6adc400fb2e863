#pragma once

// Domain types shared by the analytical model, the slot simulator and the
// exact joint-chain oracle: radio link budget, protocol timing, device
// population, and the arithmetic that turns them into energy units and
// slot durations.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace wpcn {

/// Link-budget parameters of the RF energy transfer from the access point.
struct RadioParams {
  double harvest_efficiency = 0.51;  ///< RF-to-DC conversion efficiency, in (0, 1)
  double tx_antenna_gain = 2.5;
  double rx_antenna_gain = 2.0;
  double hap_power_w = 3.0;          ///< energy transmitter power
  double wd_tx_power_w = 2e-3;       ///< device data transmit power
  double carrier_freq_hz = 915e6;
  double pathloss_exp = 2.0;         ///< >= 2

  double antenna_gain() const { return tx_antenna_gain * rx_antenna_gain; }

  bool operator==(const RadioParams&) const = default;
};

/// Inter-frame spacings and frame lengths, all in seconds.
struct ProtocolTiming {
  double difs = 0.050;
  double pifs = 0.030;
  double sifs = 0.010;
  double erb = 0.030;
  double ack = 0.020;
  double mini_slot = 0.050;
  double payload = 0.420;
  double energy_transfer = 2.430;

  bool operator==(const ProtocolTiming&) const = default;
};

struct SlotDurations {
  double t_suc = 0.0;
  double t_col = 0.0;
  double t_idl = 0.0;
  double t_ene = 0.0;

  bool operator==(const SlotDurations&) const = default;
};

/// One wireless device: harvests `harvest_units` per energy-transfer slot and
/// spends one unit per payload. The distance is informational once the unit
/// count has been fixed.
struct DeviceProfile {
  int harvest_units = 1;
  std::optional<double> distance_m;

  bool operator==(const DeviceProfile&) const = default;
};

/// Device population sharing one battery capacity and one transmit probability.
/// Construction validates every invariant; instances are immutable afterwards.
class NetworkConfig {
 public:
  NetworkConfig(std::vector<DeviceProfile> devices, int capacity, double transmit_prob);

  const std::vector<DeviceProfile>& devices() const { return devices_; }
  std::size_t size() const { return devices_.size(); }
  int capacity() const { return capacity_; }
  double transmit_prob() const { return transmit_prob_; }
  int harvest_units(std::size_t n) const { return devices_[n].harvest_units; }
  std::vector<int> harvest_unit_vector() const;

  /// Same population and capacity, different transmit probability.
  NetworkConfig with_transmit_prob(double p_t) const;

  bool operator==(const NetworkConfig&) const = default;

 private:
  std::vector<DeviceProfile> devices_;
  int capacity_;
  double transmit_prob_;
};

/// Baseline deployment: 3 W access point at 915 MHz, 2 mW devices, 420 ms
/// payloads, 2.43 s energy transfer.
RadioParams baseline_radio();
ProtocolTiming baseline_timing();

void validate(const RadioParams& radio);
void validate(const ProtocolTiming& timing);

/// Energy (J) collected by a device at `distance_m` during one energy-transfer
/// period of `t_et` seconds, Friis free-space form with exponent `pathloss_exp`.
double harvested_energy(const RadioParams& radio, double t_et, double distance_m);

enum class Quantization {
  ceiling,  ///< any started unit counts; default for configs
  nearest,  ///< round half away from zero
};

/// Integer battery units worth `harvested` joules, never less than one.
int energy_units(double harvested, double unit_energy,
                 Quantization rule = Quantization::ceiling);

/// Energy drawn by one payload transmission: P_w * T_pl.
double payload_energy(const RadioParams& radio, const ProtocolTiming& timing);

/// Harvest units for a device at `distance_m` under the given radio and timing.
int harvest_units_at(const RadioParams& radio, const ProtocolTiming& timing, double distance_m,
                     Quantization rule = Quantization::ceiling);

SlotDurations slot_durations(const ProtocolTiming& timing);

}  // namespace wpcn
