#pragma once

// Runs an ExperimentConfig grid through the analytical model, the simulator
// and the exact oracle, and renders the results as CSV. Grid points are
// evaluated in parallel; output order always follows the grid.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wpcn/analysis.hpp"
#include "wpcn/config.hpp"

namespace wpcn {

inline constexpr const char* kResultHeader =
    "experiment,source,N,p_t,C,P_ene,P_suc,P_idl,P_col,psi,per_user_rate";
inline constexpr const char* kEdaHeader = "device_type,e_n,state,occurrences,wet_count,p_e_hat";
inline constexpr const char* kFlatnessHeader =
    "device_type,e_n,mean_p_e,max_rel_deviation,states_used,excluded_states";
inline constexpr const char* kTallyHeader =
    "experiment,N,p_t,slots,wet,success,collision,idle,air_time_s,throughput";
inline constexpr const char* kOracleEdaHeader = "device_type,e_n,state,probability,p_e_exact";
inline constexpr const char* kErrorHeader =
    "experiment,N,p_t,C,source,reference,rel_err_P_ene,rel_err_P_suc,rel_err_psi";
inline constexpr const char* kSummaryHeader = "experiment,source,metric,N,m,p_t,peak";

enum class Source { analysis, simulation, oracle, benchmark };

const char* to_string(Source s);

struct ResultRow {
  std::string experiment;
  Source source = Source::analysis;
  std::size_t num_devices = 0;
  double p_t = 0.0;
  int capacity = 0;
  int m = 0;  ///< sweep parameter, 0 when not swept; not part of the CSV
  ThroughputReport report;
};

struct EdaRow {
  std::string device_type;
  int harvest_units = 0;
  int state = 0;
  std::uint64_t occurrences = 0;
  std::uint64_t wet_count = 0;
  double p_e_hat = 0.0;
};

struct FlatnessRow {
  std::string device_type;
  int harvest_units = 0;
  double mean_p_e = 0.0;
  double max_rel_deviation = 0.0;
  std::size_t states_used = 0;
  std::vector<int> excluded_states;
};

struct TallyRow {
  std::string experiment;
  std::size_t num_devices = 0;
  double p_t = 0.0;
  std::uint64_t slots = 0;
  std::uint64_t wet = 0;
  std::uint64_t success = 0;
  std::uint64_t collision = 0;
  std::uint64_t idle = 0;
  double air_time = 0.0;
  double throughput = 0.0;
};

struct OracleEdaRow {
  std::string device_type;
  int harvest_units = 0;
  int state = 0;
  double probability = 0.0;
  double p_e_exact = 0.0;
};

struct ErrorRow {
  std::string experiment;
  std::size_t num_devices = 0;
  double p_t = 0.0;
  int capacity = 0;
  Source source = Source::simulation;
  Source reference = Source::analysis;
  double rel_p_ene = 0.0;
  double rel_p_suc = 0.0;
  double rel_psi = 0.0;
};

struct SummaryRow {
  std::string experiment;
  Source source = Source::analysis;
  std::string metric;  ///< "P_suc" or "psi"
  std::size_t num_devices = 0;
  int m = 0;
  double p_t = 0.0;
  double peak = 0.0;
};

struct AnalyzeOutput {
  std::vector<ResultRow> rows;
};

struct SimulateOutput {
  std::vector<ResultRow> rows;
  std::vector<EdaRow> eda;
  std::vector<FlatnessRow> flatness;
  std::vector<TallyRow> tallies;
};

struct OracleOutput {
  std::vector<ResultRow> rows;
  std::vector<OracleEdaRow> conditionals;
};

struct CompareOutput {
  std::vector<ResultRow> rows;
  std::vector<ErrorRow> errors;
  std::vector<SummaryRow> summary;
  std::vector<std::string> skipped_oracle;  ///< points over the joint-chain guard
};

AnalyzeOutput run_analyze(const ExperimentConfig& config);
SimulateOutput run_simulate(const ExperimentConfig& config);
/// Throws SizeError when any grid point exceeds the joint-chain guard.
OracleOutput run_oracle(const ExperimentConfig& config);
/// Oracle rows are included only for points under the guard.
CompareOutput run_compare(const ExperimentConfig& config);

/// Argmax of P_suc and psi per (experiment, source, N) over the swept p_t.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

double relative_error(double value, double reference);

std::string to_csv(const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<EdaRow>& rows);
std::string to_csv(const std::vector<FlatnessRow>& rows);
std::string to_csv(const std::vector<TallyRow>& rows);
std::string to_csv(const std::vector<OracleEdaRow>& rows);
std::string to_csv(const std::vector<ErrorRow>& rows);
std::string to_csv(const std::vector<SummaryRow>& rows);

/// Seed used for grid point `index`; point 0 uses the configured seed.
std::uint64_t point_seed(std::uint64_t seed, std::size_t index);

}  // namespace wpcn
