#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reference.hpp"
#include "wpcn/errors.hpp"
#include "wpcn/model.hpp"

using namespace wpcn;

TEST_CASE("harvested energy at the reference distances") {
  const auto radio = baseline_radio();
  const double t_et = baseline_timing().energy_transfer;
  CHECK(harvested_energy(radio, t_et, 5.0) == doctest::Approx(ref::kHarvestAt5m).epsilon(1e-12));
  CHECK(harvested_energy(radio, t_et, 3.5) == doctest::Approx(ref::kHarvestAt3p5m).epsilon(1e-12));
}

TEST_CASE("free-space harvest falls with the square of distance") {
  const auto radio = baseline_radio();
  for (double d : {0.5, 1.0, 3.0, 5.0, 12.0}) {
    const double near = harvested_energy(radio, 2.43, d);
    const double far = harvested_energy(radio, 2.43, 2.0 * d);
    CHECK(far / near == doctest::Approx(0.25).epsilon(1e-14));
  }
}

TEST_CASE("path loss exponent above two") {
  auto radio = baseline_radio();
  radio.pathloss_exp = 3.0;
  const double e1 = harvested_energy(radio, 1.0, 2.0);
  const double e2 = harvested_energy(radio, 1.0, 4.0);
  CHECK(e2 / e1 == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("zero transmit power harvests nothing") {
  auto radio = baseline_radio();
  radio.hap_power_w = 0.0;
  CHECK(harvested_energy(radio, 2.43, 5.0) == 0.0);
}

TEST_CASE("non-positive distance is rejected") {
  const auto radio = baseline_radio();
  CHECK_THROWS_AS(harvested_energy(radio, 2.43, 0.0), DomainError);
  CHECK_THROWS_AS(harvested_energy(radio, 2.43, -1.0), DomainError);
}

TEST_CASE("energy unit quantization") {
  const double u = 1.0;
  CHECK(energy_units(2.1, u, Quantization::nearest) == 2);
  CHECK(energy_units(2.1, u, Quantization::ceiling) == 3);
  CHECK(energy_units(2.5, u, Quantization::nearest) == 3);
  CHECK(energy_units(3.0, u, Quantization::ceiling) == 3);
  // never below one unit
  CHECK(energy_units(0.1, u, Quantization::nearest) == 1);
  CHECK(energy_units(0.1, u, Quantization::ceiling) == 1);
  CHECK(energy_units(0.0, u) == 1);
  CHECK_THROWS_AS(energy_units(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(energy_units(1.0, -2.0), DomainError);
}

TEST_CASE("reference devices harvest one and two units") {
  const auto radio = baseline_radio();
  const auto timing = baseline_timing();
  CHECK(payload_energy(radio, timing) == doctest::Approx(ref::kUnitEnergy).epsilon(1e-15));
  CHECK(harvest_units_at(radio, timing, 5.0) == 1);
  CHECK(harvest_units_at(radio, timing, 3.5) == 2);
  // 1.23 units rounds down to 1 under the nearest rule
  CHECK(harvest_units_at(radio, timing, 3.5, Quantization::nearest) == 1);
}

TEST_CASE("baseline slot durations") {
  const auto d = slot_durations(baseline_timing());
  CHECK(d.t_suc == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.t_col == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.t_idl == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(d.t_ene == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("timing validation enforces spacing order") {
  CHECK_NOTHROW(validate(baseline_timing()));
  auto t = baseline_timing();
  t.pifs = t.difs;
  CHECK_THROWS(validate(t));
  t = baseline_timing();
  t.sifs = 0.04;
  CHECK_THROWS(validate(t));
  CHECK_NOTHROW(validate(baseline_radio()));
  auto r = baseline_radio();
  r.harvest_efficiency = 1.5;
  CHECK_THROWS(validate(r));
}

TEST_CASE("network config invariants") {
  std::vector<DeviceProfile> two{{1, 5.0}, {2, 3.5}};
  const NetworkConfig ok(two, 30, 1.0 / 18);
  CHECK(ok.size() == 2);
  CHECK(ok.harvest_unit_vector() == std::vector<int>{1, 2});
  CHECK(ok.with_transmit_prob(0.2).transmit_prob() == 0.2);
  CHECK(ok.with_transmit_prob(0.2).devices() == ok.devices());

  CHECK_THROWS(NetworkConfig({}, 30, 0.1));
  CHECK_THROWS(NetworkConfig(two, 1, 0.1));
  CHECK_THROWS(NetworkConfig(two, 30, 0.0));
  CHECK_THROWS(NetworkConfig(two, 30, 1.0));
  CHECK_THROWS(NetworkConfig({{0, {}}}, 30, 0.1));
  CHECK_THROWS(NetworkConfig({{30, {}}}, 30, 0.1));
  CHECK_THROWS(NetworkConfig({{1, -3.0}}, 30, 0.1));
}
