#include "wpcn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <optional>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "wpcn/errors.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/simulator.hpp"

namespace wpcn {

namespace {

// Evaluates fn(0..count-1) on a small worker pool; results keep index order
// and the lowest-index failure is the one rethrown.
template <typename F>
auto parallel_map(std::size_t count, F fn) -> std::vector<decltype(fn(std::size_t{0}))> {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1U, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Result> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

ResultRow make_row(const ExperimentConfig& config, const ExperimentPoint& point, Source source,
                   const ThroughputReport& report) {
  return ResultRow{config.name, source, point.num_devices, point.p_t, config.capacity, point.m, report};
}

std::string type_label(const ExperimentPoint& point, std::size_t group, std::size_t num_points) {
  if (num_points == 1) return point.group_names[group];
  if (point.m != 0) return fmt::format("{}@N{}_m{}", point.group_names[group], point.num_devices, point.m);
  return fmt::format("{}@N{}", point.group_names[group], point.num_devices);
}

ResultRow analysis_row(const ExperimentConfig& config, const ExperimentPoint& point) {
  const auto durations = slot_durations(config.timing.to_timing());
  return make_row(config, point, Source::analysis, analyze(point.network, durations).report);
}

ResultRow benchmark_row(const ExperimentConfig& config, const ExperimentPoint& point) {
  const auto durations = slot_durations(config.timing.to_timing());
  return make_row(config, point, Source::benchmark,
                  benchmark_unlimited(point.num_devices, point.p_t, durations));
}

struct SimulatedPoint {
  ResultRow row;
  std::vector<EdaRow> eda;
  std::vector<FlatnessRow> flatness;
  TallyRow tally;
};

SimulatedPoint simulate_point(const ExperimentConfig& config, const ExperimentPoint& point,
                              std::size_t num_points) {
  const auto durations = slot_durations(config.timing.to_timing());
  RunOptions options;
  options.seed = point_seed(config.seed, point.index);
  options.num_slots = config.slots;
  options.burn_in = config.burn_in;
  const RunResult run_result = run(point.network, durations, options);
  const SlotTally& t = run_result.tally;

  ThroughputReport report;
  report.slot_probs = SlotProbabilities{t.frequency(SlotKind::wet), t.frequency(SlotKind::success),
                                        t.frequency(SlotKind::idle), t.frequency(SlotKind::collision)};
  report.durations = durations;
  report.psi = t.throughput();
  report.per_user_rate = report.psi / static_cast<double>(point.num_devices);

  SimulatedPoint out{make_row(config, point, Source::simulation, report), {}, {}, {}};
  out.tally = TallyRow{config.name, point.num_devices, point.p_t, t.total(), t.wet, t.success,
                       t.collision, t.idle, t.air_time, t.throughput()};

  const EdaEstimate pooled = run_result.eda.pooled(point.group_members);
  const auto flat = measure_eda(pooled, config.min_samples);
  for (std::size_t g = 0; g < point.group_members.size(); ++g) {
    const auto label = type_label(point, g, num_points);
    const int units = point.group_units[g];
    for (int i = 1; i <= config.capacity; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      out.eda.push_back(EdaRow{label, units, i, pooled.occurrences[g][idx], pooled.wet_given[g][idx],
                               pooled.ratio(g, i)});
    }
    out.flatness.push_back(FlatnessRow{label, units, flat[g].mean_ratio, flat[g].max_rel_deviation,
                                       flat[g].used_states.size(), flat[g].excluded_states});
  }
  return out;
}

struct ExactPoint {
  ResultRow row;
  std::vector<OracleEdaRow> conditionals;
};

ExactPoint oracle_point(const ExperimentConfig& config, const ExperimentPoint& point,
                        std::size_t num_points) {
  const auto durations = slot_durations(config.timing.to_timing());
  const ExactResult exact = exact_analysis(point.network, durations);
  ExactPoint out{make_row(config, point, Source::oracle, exact.report), {}};
  for (std::size_t g = 0; g < point.group_members.size(); ++g) {
    const auto& members = point.group_members[g];
    const auto label = type_label(point, g, num_points);
    for (int i = 1; i <= config.capacity; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      double probability = 0.0;
      double conditional = 0.0;
      for (std::size_t n : members) {
        probability += exact.marginals[n][idx];
        conditional += exact.wet_given[n][idx];
      }
      const auto k = static_cast<double>(members.size());
      out.conditionals.push_back(
          OracleEdaRow{label, point.group_units[g], i, probability / k, conditional / k});
    }
  }
  return out;
}

bool under_guard(const ExperimentPoint& point) {
  const double states = std::pow(point.network.capacity() + 1.0, static_cast<double>(point.num_devices));
  return states <= static_cast<double>(kJointStateGuard);
}

ErrorRow error_row(const ResultRow& row, const ResultRow& ref) {
  return ErrorRow{row.experiment,
                  row.num_devices,
                  row.p_t,
                  row.capacity,
                  row.source,
                  ref.source,
                  relative_error(row.report.slot_probs.p_ene, ref.report.slot_probs.p_ene),
                  relative_error(row.report.slot_probs.p_suc, ref.report.slot_probs.p_suc),
                  relative_error(row.report.psi, ref.report.psi)};
}

}  // namespace

const char* to_string(Source s) {
  switch (s) {
    case Source::analysis:
      return "analysis";
    case Source::simulation:
      return "simulation";
    case Source::oracle:
      return "oracle";
    case Source::benchmark:
      return "benchmark";
  }
  return "unknown";
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index);
}

double relative_error(double value, double reference) {
  const double diff = std::abs(value - reference);
  return reference == 0.0 ? diff : diff / std::abs(reference);
}

AnalyzeOutput run_analyze(const ExperimentConfig& config) {
  const auto points = expand(config);
  auto per_point = parallel_map(points.size(), [&](std::size_t i) {
    std::vector<ResultRow> rows{analysis_row(config, points[i])};
    if (config.benchmark) rows.push_back(benchmark_row(config, points[i]));
    return rows;
  });
  AnalyzeOutput out;
  for (auto& rows : per_point) {
    for (auto& r : rows) out.rows.push_back(std::move(r));
  }
  return out;
}

SimulateOutput run_simulate(const ExperimentConfig& config) {
  const auto points = expand(config);
  auto per_point = parallel_map(points.size(), [&](std::size_t i) {
    return simulate_point(config, points[i], points.size());
  });
  SimulateOutput out;
  for (auto& p : per_point) {
    out.rows.push_back(std::move(p.row));
    out.tallies.push_back(std::move(p.tally));
    for (auto& r : p.eda) out.eda.push_back(std::move(r));
    for (auto& r : p.flatness) out.flatness.push_back(std::move(r));
  }
  return out;
}

OracleOutput run_oracle(const ExperimentConfig& config) {
  const auto points = expand(config);
  for (const auto& p : points) {
    if (!under_guard(p)) {
      // Let the chain builder produce the size diagnostic.
      build_joint_chain(p.network);
    }
  }
  auto per_point = parallel_map(points.size(), [&](std::size_t i) {
    return oracle_point(config, points[i], points.size());
  });
  OracleOutput out;
  for (auto& p : per_point) {
    out.rows.push_back(std::move(p.row));
    for (auto& r : p.conditionals) out.conditionals.push_back(std::move(r));
  }
  return out;
}

CompareOutput run_compare(const ExperimentConfig& config) {
  const auto points = expand(config);
  struct Bundle {
    ResultRow analysis;
    std::optional<ResultRow> benchmark;
    ResultRow simulation;
    std::optional<ResultRow> oracle;
  };
  auto bundles = parallel_map(points.size(), [&](std::size_t i) {
    const auto& p = points[i];
    std::optional<ResultRow> bench;
    if (config.benchmark) bench = benchmark_row(config, p);
    std::optional<ResultRow> exact;
    if (under_guard(p)) exact = oracle_point(config, p, points.size()).row;
    return Bundle{analysis_row(config, p), bench, simulate_point(config, p, points.size()).row, exact};
  });

  CompareOutput out;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    auto& b = bundles[i];
    out.rows.push_back(b.analysis);
    if (b.benchmark) out.rows.push_back(*b.benchmark);
    out.rows.push_back(b.simulation);
    if (b.oracle) {
      out.rows.push_back(*b.oracle);
    } else {
      out.skipped_oracle.push_back(fmt::format("N={} p_t={:.10f}", points[i].num_devices, points[i].p_t));
    }
    out.errors.push_back(error_row(b.simulation, b.analysis));
    if (b.oracle) {
      out.errors.push_back(error_row(*b.oracle, b.analysis));
      out.errors.push_back(error_row(b.simulation, *b.oracle));
    }
  }
  out.summary = summarize(out.rows);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  // Keyed by first appearance so the output order follows the grid.
  std::vector<std::vector<const ResultRow*>> series;
  std::map<std::tuple<std::string, Source, std::size_t>, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.experiment, r.source, r.num_devices);
    auto [it, inserted] = index.try_emplace(key, series.size());
    if (inserted) series.emplace_back();
    series[it->second].push_back(&r);
  }

  std::vector<SummaryRow> out;
  for (const auto& s : series) {
    if (s.size() < 2) continue;
    const auto by_suc = std::max_element(s.begin(), s.end(), [](const auto* a, const auto* b) {
      return a->report.slot_probs.p_suc < b->report.slot_probs.p_suc;
    });
    const auto by_psi = std::max_element(s.begin(), s.end(), [](const auto* a, const auto* b) {
      return a->report.psi < b->report.psi;
    });
    const ResultRow& suc = **by_suc;
    const ResultRow& psi = **by_psi;
    out.push_back(SummaryRow{suc.experiment, suc.source, "P_suc", suc.num_devices, suc.m, suc.p_t,
                             suc.report.slot_probs.p_suc});
    out.push_back(SummaryRow{psi.experiment, psi.source, "psi", psi.num_devices, psi.m, psi.p_t,
                             psi.report.psi});
  }
  return out;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultHeader) + "\n";
  for (const auto& r : rows) {
    const auto& p = r.report.slot_probs;
    out += fmt::format("{},{},{},{:.10f},{},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f}\n",
                       r.experiment, to_string(r.source), r.num_devices, r.p_t, r.capacity, p.p_ene,
                       p.p_suc, p.p_idl, p.p_col, r.report.psi, r.report.per_user_rate);
  }
  return out;
}

std::string to_csv(const std::vector<EdaRow>& rows) {
  std::string out = std::string(kEdaHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{:.12f}\n", r.device_type, r.harvest_units, r.state,
                       r.occurrences, r.wet_count, r.p_e_hat);
  }
  return out;
}

std::string to_csv(const std::vector<FlatnessRow>& rows) {
  std::string out = std::string(kFlatnessHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.12f},{:.12f},{},{}\n", r.device_type, r.harvest_units, r.mean_p_e,
                       r.max_rel_deviation, r.states_used, fmt::join(r.excluded_states, ";"));
  }
  return out;
}

std::string to_csv(const std::vector<TallyRow>& rows) {
  std::string out = std::string(kTallyHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.10f},{},{},{},{},{},{:.3f},{:.12f}\n", r.experiment, r.num_devices,
                       r.p_t, r.slots, r.wet, r.success, r.collision, r.idle, r.air_time, r.throughput);
  }
  return out;
}

std::string to_csv(const std::vector<OracleEdaRow>& rows) {
  std::string out = std::string(kOracleEdaHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{:.15f},{:.15f}\n", r.device_type, r.harvest_units, r.state,
                       r.probability, r.p_e_exact);
  }
  return out;
}

std::string to_csv(const std::vector<ErrorRow>& rows) {
  std::string out = std::string(kErrorHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.10f},{},{},{},{:.8f},{:.8f},{:.8f}\n", r.experiment, r.num_devices,
                       r.p_t, r.capacity, to_string(r.source), to_string(r.reference), r.rel_p_ene,
                       r.rel_p_suc, r.rel_psi);
  }
  return out;
}

std::string to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{:.10f},{:.12f}\n", r.experiment, to_string(r.source), r.metric,
                       r.num_devices, r.m, r.p_t, r.peak);
  }
  return out;
}

}  // namespace wpcn
