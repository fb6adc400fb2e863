#include "wpcn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "wpcn/errors.hpp"

namespace wpcn {

namespace {

namespace pt = boost::property_tree;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  text = trim(text);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(where, fmt::format("cannot parse '{}' as a number", text));
  }
  return value;
}

bool parse_bool(std::string_view text, const std::string& where) {
  text = trim(text);
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(where, fmt::format("expected true/false, got '{}'", text));
}

// "12..30, 40" -> 12, 13, ..., 30, 40
template <typename T>
std::vector<T> parse_list(std::string_view text, const std::string& where) {
  std::vector<T> values;
  for (auto item : split(text, ',')) {
    if (item.empty()) throw ConfigError(where, "empty list item");
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      values.push_back(parse_number<T>(item, where));
      continue;
    }
    const T lo = parse_number<T>(item.substr(0, dots), where);
    const T hi = parse_number<T>(item.substr(dots + 2), where);
    if (hi < lo) throw ConfigError(where, fmt::format("range '{}' runs backwards", item));
    for (T v = lo; v <= hi; ++v) values.push_back(v);
  }
  return values;
}

Share parse_share(std::string_view text, const std::string& where) {
  const auto parts = split(text, '/');
  Share s;
  if (parts.size() == 1) {
    s.num = parse_number<long>(parts[0], where);
    s.den = 1;
  } else if (parts.size() == 2) {
    s.num = parse_number<long>(parts[0], where);
    s.den = parse_number<long>(parts[1], where);
  } else {
    throw ConfigError(where, fmt::format("expected a fraction a/b, got '{}'", text));
  }
  if (s.num <= 0 || s.den <= 0 || s.num > s.den) {
    throw ConfigError(where, fmt::format("share must lie in (0, 1], got '{}'", text));
  }
  const long g = std::gcd(s.num, s.den);
  s.num /= g;
  s.den /= g;
  return s;
}

void parse_radio_key(RadioTable& r, const std::string& key, std::string_view value,
                     const std::string& where) {
  static const std::map<std::string, double RadioTable::*> fields = {
      {"harvest_efficiency", &RadioTable::harvest_efficiency},
      {"tx_antenna_gain", &RadioTable::tx_antenna_gain},
      {"rx_antenna_gain", &RadioTable::rx_antenna_gain},
      {"hap_power_w", &RadioTable::hap_power_w},
      {"wd_tx_power_mw", &RadioTable::wd_tx_power_mw},
      {"carrier_freq_mhz", &RadioTable::carrier_freq_mhz},
      {"pathloss_exp", &RadioTable::pathloss_exp},
  };
  const auto it = fields.find(key);
  if (it == fields.end()) throw ConfigError(where, "unknown key");
  r.*(it->second) = parse_number<double>(value, where);
}

void parse_timing_key(TimingTable& t, const std::string& key, std::string_view value,
                      const std::string& where) {
  static const std::map<std::string, double TimingTable::*> fields = {
      {"difs_ms", &TimingTable::difs_ms},
      {"pifs_ms", &TimingTable::pifs_ms},
      {"sifs_ms", &TimingTable::sifs_ms},
      {"erb_ms", &TimingTable::erb_ms},
      {"ack_ms", &TimingTable::ack_ms},
      {"sigma_ms", &TimingTable::sigma_ms},
      {"payload_ms", &TimingTable::payload_ms},
      {"energy_transfer_ms", &TimingTable::energy_transfer_ms},
  };
  const auto it = fields.find(key);
  if (it == fields.end()) throw ConfigError(where, "unknown key");
  t.*(it->second) = parse_number<double>(value, where);
}

void parse_network_key(ExperimentConfig& c, const std::string& key, std::string_view value,
                       const std::string& where) {
  if (key == "capacity") {
    c.capacity = parse_number<int>(value, where);
  } else if (key == "n") {
    c.sizes = parse_list<std::size_t>(value, where);
  } else if (key == "p_t") {
    const auto v = trim(value);
    if (v == "1/N") {
      c.rule = TransmitRule::per_device;
    } else if (v == "1/m") {
      c.rule = TransmitRule::sweep_m;
    } else {
      c.rule = TransmitRule::fixed;
      c.p_t = parse_number<double>(v, where);
    }
  } else if (key == "m") {
    c.m_values = parse_list<int>(value, where);
  } else if (key == "benchmark") {
    c.benchmark = parse_bool(value, where);
  } else {
    throw ConfigError(where, "unknown key");
  }
}

void parse_group_key(DeviceGroup& g, const std::string& key, std::string_view value,
                     const std::string& where) {
  if (key == "count") {
    g.count = parse_number<std::size_t>(value, where);
  } else if (key == "share") {
    g.share = parse_share(value, where);
  } else if (key == "distance_m") {
    g.distance_m = parse_number<double>(value, where);
  } else if (key == "harvest_units") {
    g.harvest_units = parse_number<int>(value, where);
  } else {
    throw ConfigError(where, "unknown key");
  }
}

void parse_simulation_key(ExperimentConfig& c, const std::string& key, std::string_view value,
                          const std::string& where) {
  if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(value, where);
  } else if (key == "slots") {
    c.slots = parse_number<std::uint64_t>(value, where);
  } else if (key == "burn_in") {
    c.burn_in = parse_number<std::uint64_t>(value, where);
  } else if (key == "min_samples") {
    c.min_samples = parse_number<std::uint64_t>(value, where);
  } else {
    throw ConfigError(where, "unknown key");
  }
}

std::size_t group_size(const DeviceGroup& g, std::size_t n) {
  if (g.count) return *g.count;
  return n * static_cast<std::size_t>(g.share->num) / static_cast<std::size_t>(g.share->den);
}

std::vector<std::size_t> population_sizes(const ExperimentConfig& c) {
  if (!c.sizes.empty()) return c.sizes;
  std::size_t total = 0;
  for (const auto& g : c.groups) total += *g.count;
  return {total};
}

}  // namespace

RadioParams RadioTable::to_params() const {
  RadioParams r;
  r.harvest_efficiency = harvest_efficiency;
  r.tx_antenna_gain = tx_antenna_gain;
  r.rx_antenna_gain = rx_antenna_gain;
  r.hap_power_w = hap_power_w;
  r.wd_tx_power_w = wd_tx_power_mw / 1e3;
  r.carrier_freq_hz = carrier_freq_mhz * 1e6;
  r.pathloss_exp = pathloss_exp;
  return r;
}

ProtocolTiming TimingTable::to_timing() const {
  ProtocolTiming t;
  t.difs = difs_ms / 1e3;
  t.pifs = pifs_ms / 1e3;
  t.sifs = sifs_ms / 1e3;
  t.erb = erb_ms / 1e3;
  t.ack = ack_ms / 1e3;
  t.mini_slot = sigma_ms / 1e3;
  t.payload = payload_ms / 1e3;
  t.energy_transfer = energy_transfer_ms / 1e3;
  return t;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}", e.line()), e.message());
  }

  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "keys must appear inside a [section]");
    }
    std::optional<DeviceGroup> group;
    if (section.rfind("group", 0) == 0) {
      const auto name = std::string(trim(std::string_view(section).substr(5)));
      if (name.empty()) throw ConfigError(fmt::format("[{}]", section), "group needs a name");
      group = DeviceGroup{name, {}, {}, {}, {}};
    }
    for (const auto& [key, node] : body) {
      const auto where = fmt::format("[{}] {}", section, key);
      const auto value = node.get_value<std::string>();
      if (section == "experiment") {
        if (key == "name") {
          c.name = std::string(trim(value));
        } else if (key == "output") {
          c.output = std::string(trim(value));
        } else {
          throw ConfigError(where, "unknown key");
        }
      } else if (section == "radio") {
        parse_radio_key(c.radio, key, value, where);
      } else if (section == "timing") {
        parse_timing_key(c.timing, key, value, where);
      } else if (section == "network") {
        parse_network_key(c, key, value, where);
      } else if (section == "simulation") {
        parse_simulation_key(c, key, value, where);
      } else if (group) {
        parse_group_key(*group, key, value, where);
      } else {
        throw ConfigError(fmt::format("[{}]", section), "unknown section");
      }
    }
    if (group) c.groups.push_back(std::move(*group));
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(const ExperimentConfig& c) {
  try {
    validate(c.radio.to_params());
  } catch (const DomainError& e) {
    throw ConfigError("[radio]", e.what());
  }
  try {
    validate(c.timing.to_timing());
  } catch (const DomainError& e) {
    throw ConfigError("[timing]", e.what());
  }
  if (c.capacity < 2) throw ConfigError("[network] capacity", "capacity must be >= 2");
  if (c.groups.empty()) throw ConfigError("[group]", "at least one device group is required");

  std::set<std::string> names;
  bool any_share = false;
  bool any_count = false;
  for (const auto& g : c.groups) {
    const auto where = fmt::format("[group {}]", g.name);
    if (!names.insert(g.name).second) throw ConfigError(where, "duplicate group name");
    if (g.count.has_value() == g.share.has_value()) {
      throw ConfigError(where, "give exactly one of count or share");
    }
    if (g.distance_m.has_value() == g.harvest_units.has_value()) {
      throw ConfigError(where, "give exactly one of distance_m or harvest_units");
    }
    if (g.distance_m && !(*g.distance_m > 0.0)) throw ConfigError(where + " distance_m", "must be positive");
    if (g.harvest_units && *g.harvest_units < 1) throw ConfigError(where + " harvest_units", "must be >= 1");
    if (g.count && *g.count == 0) throw ConfigError(where + " count", "must be >= 1");
    any_share = any_share || g.share.has_value();
    any_count = any_count || g.count.has_value();
  }
  if (any_share && any_count) {
    throw ConfigError("[group]", "groups must all use count or all use share");
  }

  if (any_share) {
    if (c.sizes.empty()) throw ConfigError("[network] n", "shares need population sizes");
    long num = 0;
    long den = 1;
    for (const auto& g : c.groups) {
      num = num * g.share->den + g.share->num * den;
      den *= g.share->den;
      const long d = std::gcd(num, den);
      num /= d;
      den /= d;
    }
    if (num != den) throw ConfigError("[group]", "shares must sum to 1");
    for (std::size_t n : c.sizes) {
      for (const auto& g : c.groups) {
        if ((n * static_cast<std::size_t>(g.share->num)) % static_cast<std::size_t>(g.share->den) != 0) {
          throw ConfigError(fmt::format("[group {}] share", g.name),
                            fmt::format("{}/{} of N = {} is not a whole number of devices",
                                        g.share->num, g.share->den, n));
        }
      }
    }
  } else {
    std::size_t total = 0;
    for (const auto& g : c.groups) total += *g.count;
    for (std::size_t n : c.sizes) {
      if (n != total) {
        throw ConfigError("[network] n", fmt::format("n = {} disagrees with group counts summing to {}", n, total));
      }
    }
  }
  for (std::size_t n : c.sizes) {
    if (n == 0) throw ConfigError("[network] n", "population size must be >= 1");
  }

  switch (c.rule) {
    case TransmitRule::fixed:
      if (!(c.p_t > 0.0 && c.p_t < 1.0)) throw ConfigError("[network] p_t", "p_t must lie in (0, 1)");
      break;
    case TransmitRule::per_device:
      for (std::size_t n : population_sizes(c)) {
        if (n < 2) throw ConfigError("[network] p_t", "p_t = 1/N needs N >= 2");
      }
      break;
    case TransmitRule::sweep_m:
      if (c.m_values.empty()) throw ConfigError("[network] m", "p_t = 1/m needs a non-empty m list");
      for (int m : c.m_values) {
        if (m < 2) throw ConfigError("[network] m", fmt::format("m must be >= 2, got {}", m));
      }
      break;
  }
  if (c.rule != TransmitRule::sweep_m && !c.m_values.empty()) {
    throw ConfigError("[network] m", "m list given but p_t is not 1/m");
  }
  if (c.slots == 0) throw ConfigError("[simulation] slots", "number of slots must be >= 1");
  if (c.min_samples == 0) throw ConfigError("[simulation] min_samples", "must be >= 1");
}

std::string to_text(const ExperimentConfig& c) {
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  out += "[experiment]\n";
  line("name", c.name);
  if (!c.output.empty()) line("output", c.output);

  out += "\n[radio]\n";
  line("harvest_efficiency", c.radio.harvest_efficiency);
  line("tx_antenna_gain", c.radio.tx_antenna_gain);
  line("rx_antenna_gain", c.radio.rx_antenna_gain);
  line("hap_power_w", c.radio.hap_power_w);
  line("wd_tx_power_mw", c.radio.wd_tx_power_mw);
  line("carrier_freq_mhz", c.radio.carrier_freq_mhz);
  line("pathloss_exp", c.radio.pathloss_exp);

  out += "\n[timing]\n";
  line("difs_ms", c.timing.difs_ms);
  line("pifs_ms", c.timing.pifs_ms);
  line("sifs_ms", c.timing.sifs_ms);
  line("erb_ms", c.timing.erb_ms);
  line("ack_ms", c.timing.ack_ms);
  line("sigma_ms", c.timing.sigma_ms);
  line("payload_ms", c.timing.payload_ms);
  line("energy_transfer_ms", c.timing.energy_transfer_ms);

  out += "\n[network]\n";
  line("capacity", c.capacity);
  if (!c.sizes.empty()) line("n", fmt::format("{}", fmt::join(c.sizes, ", ")));
  switch (c.rule) {
    case TransmitRule::fixed:
      line("p_t", c.p_t);
      break;
    case TransmitRule::per_device:
      line("p_t", "1/N");
      break;
    case TransmitRule::sweep_m:
      line("p_t", "1/m");
      line("m", fmt::format("{}", fmt::join(c.m_values, ", ")));
      break;
  }
  line("benchmark", c.benchmark ? "true" : "false");

  for (const auto& g : c.groups) {
    out += fmt::format("\n[group {}]\n", g.name);
    if (g.count) line("count", *g.count);
    if (g.share) line("share", fmt::format("{}/{}", g.share->num, g.share->den));
    if (g.distance_m) line("distance_m", *g.distance_m);
    if (g.harvest_units) line("harvest_units", *g.harvest_units);
  }

  out += "\n[simulation]\n";
  line("seed", c.seed);
  line("slots", c.slots);
  line("burn_in", c.burn_in);
  line("min_samples", c.min_samples);
  return out;
}

std::vector<ExperimentPoint> expand(const ExperimentConfig& c) {
  validate(c);
  const RadioParams radio = c.radio.to_params();
  const ProtocolTiming timing = c.timing.to_timing();

  std::vector<int> units;
  for (const auto& g : c.groups) {
    units.push_back(g.harvest_units ? *g.harvest_units : harvest_units_at(radio, timing, *g.distance_m));
  }

  std::vector<ExperimentPoint> points;
  for (std::size_t n : population_sizes(c)) {
    std::vector<DeviceProfile> devices;
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t k = 0; k < c.groups.size(); ++k) {
      const auto& g = c.groups[k];
      names.push_back(g.name);
      members.emplace_back();
      for (std::size_t i = 0; i < group_size(g, n); ++i) {
        members.back().push_back(devices.size());
        devices.push_back(DeviceProfile{units[k], g.distance_m});
      }
    }

    std::vector<std::pair<double, int>> rates;
    switch (c.rule) {
      case TransmitRule::fixed:
        rates.emplace_back(c.p_t, 0);
        break;
      case TransmitRule::per_device:
        rates.emplace_back(1.0 / static_cast<double>(n), 0);
        break;
      case TransmitRule::sweep_m:
        for (int m : c.m_values) rates.emplace_back(1.0 / m, m);
        break;
    }
    for (const auto& [p_t, m] : rates) {
      NetworkConfig network = [&] {
        try {
          return NetworkConfig(devices, c.capacity, p_t);
        } catch (const DomainError& e) {
          throw ConfigError("[network]", e.what());
        }
      }();
      points.push_back(ExperimentPoint{points.size(), n, p_t, m, std::move(network), names, members, units});
    }
  }
  return points;
}

std::vector<std::string> preset_names() {
  return {"baseline", "population", "access-sweep", "access-sweep-wide", "eda", "small"};
}

std::string preset_text(const std::string& name) {
  // Two device types: ~5 m from the access point (1 unit per WET slot) and
  // ~3.5 m (2 units).
  static const std::string two_types_counts =
      "[group typeI]\ncount = 12\ndistance_m = 5\n\n"
      "[group typeII]\ncount = 6\ndistance_m = 3.5\n";
  static const std::string two_types_shares =
      "[group typeI]\nshare = 1/3\ndistance_m = 5\n\n"
      "[group typeII]\nshare = 2/3\ndistance_m = 3.5\n";

  if (name == "baseline") {
    return "[experiment]\nname = baseline\n\n[network]\ncapacity = 30\np_t = 1/N\n\n" + two_types_counts;
  }
  if (name == "population") {
    return "[experiment]\nname = population\n\n[network]\ncapacity = 30\n"
           "n = 6, 12, 18, 24, 30, 36, 42, 48\np_t = 1/N\n\n" +
           two_types_shares +
           "\n[simulation]\nseed = 1\nslots = 10000000\nburn_in = 10000\n";
  }
  if (name == "access-sweep") {
    return "[experiment]\nname = access-sweep\n\n[network]\ncapacity = 30\np_t = 1/m\nm = 12..30\n"
           "benchmark = true\n\n" +
           two_types_counts;
  }
  if (name == "access-sweep-wide") {
    return "[experiment]\nname = access-sweep-wide\n\n[network]\ncapacity = 30\np_t = 1/m\nm = 30..70\n"
           "benchmark = true\n\n" +
           two_types_counts;
  }
  if (name == "eda") {
    return "[experiment]\nname = eda\n\n[network]\ncapacity = 30\np_t = 1/N\n\n" + two_types_counts +
           "\n[simulation]\nseed = 1\nslots = 10000000\nburn_in = 10000\nmin_samples = 100\n";
  }
  if (name == "small") {
    return "[experiment]\nname = small\n\n[network]\ncapacity = 4\np_t = 0.3\n\n"
           "[group a]\ncount = 1\nharvest_units = 1\n\n"
           "[group b]\ncount = 1\nharvest_units = 2\n\n"
           "[simulation]\nseed = 1\nslots = 1000000\nburn_in = 10000\n";
  }
  throw ConfigError("preset", fmt::format("unknown preset '{}' (known: {})", name,
                                          fmt::join(preset_names(), ", ")));
}

}  // namespace wpcn
