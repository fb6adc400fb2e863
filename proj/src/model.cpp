#include "wpcn/model.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "wpcn/errors.hpp"

namespace wpcn {

namespace {

constexpr double kSpeedOfLight = 3e8;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(fmt::format("{} must be a positive finite number, got {}", name, value));
  }
}

}  // namespace

NetworkConfig::NetworkConfig(std::vector<DeviceProfile> devices, int capacity, double transmit_prob)
    : devices_(std::move(devices)), capacity_(capacity), transmit_prob_(transmit_prob) {
  if (devices_.empty()) {
    throw DomainError("network needs at least one device");
  }
  if (capacity_ < 2) {
    throw DomainError(fmt::format("battery capacity must be >= 2, got {}", capacity_));
  }
  if (!(transmit_prob_ > 0.0 && transmit_prob_ < 1.0)) {
    throw DomainError(fmt::format("transmit probability must lie in (0, 1), got {}", transmit_prob_));
  }
  for (std::size_t n = 0; n < devices_.size(); ++n) {
    const auto& d = devices_[n];
    if (d.harvest_units < 1 || d.harvest_units >= capacity_) {
      throw DomainError(fmt::format("device {}: harvest units {} outside [1, C) with C = {}", n,
                                    d.harvest_units, capacity_));
    }
    if (d.distance_m && !(*d.distance_m > 0.0)) {
      throw DomainError(fmt::format("device {}: distance must be positive", n));
    }
  }
}

std::vector<int> NetworkConfig::harvest_unit_vector() const {
  std::vector<int> units;
  units.reserve(devices_.size());
  for (const auto& d : devices_) units.push_back(d.harvest_units);
  return units;
}

NetworkConfig NetworkConfig::with_transmit_prob(double p_t) const {
  return NetworkConfig(devices_, capacity_, p_t);
}

RadioParams baseline_radio() { return RadioParams{}; }

ProtocolTiming baseline_timing() { return ProtocolTiming{}; }

void validate(const RadioParams& radio) {
  if (!(radio.harvest_efficiency > 0.0 && radio.harvest_efficiency < 1.0)) {
    throw DomainError(
        fmt::format("harvest efficiency must lie in (0, 1), got {}", radio.harvest_efficiency));
  }
  require_positive(radio.tx_antenna_gain, "tx antenna gain");
  require_positive(radio.rx_antenna_gain, "rx antenna gain");
  require_positive(radio.hap_power_w, "HAP power");
  require_positive(radio.wd_tx_power_w, "device transmit power");
  require_positive(radio.carrier_freq_hz, "carrier frequency");
  if (!(radio.pathloss_exp >= 2.0)) {
    throw DomainError(fmt::format("path-loss exponent must be >= 2, got {}", radio.pathloss_exp));
  }
}

void validate(const ProtocolTiming& timing) {
  require_positive(timing.difs, "DIFS");
  require_positive(timing.pifs, "PIFS");
  require_positive(timing.sifs, "SIFS");
  require_positive(timing.erb, "ERB");
  require_positive(timing.ack, "ACK");
  require_positive(timing.mini_slot, "mini slot");
  require_positive(timing.payload, "payload");
  require_positive(timing.energy_transfer, "energy transfer");
  // ACK/NAK must preempt energy requests, which must preempt data.
  if (!(timing.sifs < timing.pifs && timing.pifs < timing.difs)) {
    throw DomainError(fmt::format("spacings must satisfy SIFS < PIFS < DIFS, got {} / {} / {}",
                                  timing.sifs, timing.pifs, timing.difs));
  }
}

double harvested_energy(const RadioParams& radio, double t_et, double distance_m) {
  if (!(distance_m > 0.0)) {
    throw DomainError(fmt::format("distance must be positive, got {}", distance_m));
  }
  const double ratio = kSpeedOfLight / (4.0 * std::numbers::pi * radio.carrier_freq_hz * distance_m);
  return radio.harvest_efficiency * radio.antenna_gain() * radio.hap_power_w * t_et *
         std::pow(ratio, radio.pathloss_exp);
}

int energy_units(double harvested, double unit_energy, Quantization rule) {
  if (!(unit_energy > 0.0)) {
    throw DomainError(fmt::format("unit energy must be positive, got {}", unit_energy));
  }
  const double units = harvested / unit_energy;
  const double q = rule == Quantization::ceiling ? std::ceil(units) : std::round(units);
  return q < 1.0 ? 1 : static_cast<int>(q);
}

double payload_energy(const RadioParams& radio, const ProtocolTiming& timing) {
  return radio.wd_tx_power_w * timing.payload;
}

int harvest_units_at(const RadioParams& radio, const ProtocolTiming& timing, double distance_m,
                     Quantization rule) {
  return energy_units(harvested_energy(radio, timing.energy_transfer, distance_m),
                      payload_energy(radio, timing), rule);
}

SlotDurations slot_durations(const ProtocolTiming& timing) {
  SlotDurations d;
  d.t_suc = timing.difs + timing.payload + timing.sifs + timing.ack;
  d.t_col = d.t_suc;
  d.t_idl = timing.mini_slot;
  d.t_ene = timing.pifs + timing.erb + timing.sifs + timing.energy_transfer;
  return d;
}

}  // namespace wpcn
