#pragma once

// Run output files: rounds CSV, regret-curve CSV, metrics key/value
// document, and the multi-run comparison table.

#include "olcp/config.hpp"
#include "olcp/selector.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace olcp {

inline constexpr int kRoundsSchemaVersion = 1;
inline constexpr int kMetricsSchemaVersion = 1;

/// Shortest decimal that round-trips; "nan" for NaN.
std::string format_number(double value);

/// Header columns: t, arm, reward, regret, then f_hat_k, L_k, U_k, B_k, s_k
/// for each arm, then J, j, fallback_k for each arm, n_k (window length
/// after the round's update) for each arm. Arm indices are 1-based.
std::vector<std::string> rounds_header(std::size_t arms);

/// Preceded by a "# olcp-rounds v<N> key=value ..." stamp line.
void write_rounds_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<RoundRecord>& records);

/// t, regret, average_regret.
void write_regret_csv(std::ostream& out, const std::vector<RoundRecord>& records);

/// "# olcp-metrics v<N>" then sorted key=value lines.
void write_metrics(std::ostream& out, const std::map<std::string, double>& metrics);
std::map<std::string, double> read_metrics(std::istream& in);

struct RoundsFile {
  std::string source;
  int schema_version = 0;
  std::map<std::string, std::string> stamp;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t arms() const;
  double alpha() const;
  std::size_t column(const std::string& name) const;  // throws if absent
};

RoundsFile read_rounds_csv(const std::filesystem::path& path);

/// One row per input, sorted by alpha then source. Inputs must share schema
/// version and arm count.
std::string comparison_table(const std::vector<RoundsFile>& inputs);

/// Summary metrics shared by every run kind.
std::map<std::string, double> run_summary(const ExperimentResult& result);

}  // namespace olcp
