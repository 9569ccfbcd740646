#pragma once

// PSV clinical records, imputation, cohort splits and synthetic streams.

#include "olcp/core.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace olcp {

/// Malformed input data. `where()` names the file (when known) and line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kLabelColumn = "SepsisLabel";
inline constexpr std::string_view kMissingToken = "NaN";

/// One patient's hourly table. Missing values are quiet NaNs in `values`;
/// `values` also holds the SepsisLabel column so records round-trip.
struct PatientRecord {
  std::string id;
  std::vector<std::string> columns;
  Matrix values;            // hours x columns
  std::vector<int> labels;  // SepsisLabel per hour
  std::size_t label_column = 0;

  Eigen::Index hours() const { return values.rows(); }
  bool septic() const;
  int column_index(std::string_view name) const;  // -1 when absent
};

PatientRecord parse_psv(std::string_view text, std::string id = {});
std::string serialize_psv(const PatientRecord& record);
PatientRecord read_psv(const std::filesystem::path& path);
void write_psv(const PatientRecord& record, const std::filesystem::path& path);

struct Cohort {
  std::vector<PatientRecord> patients;

  std::size_t septic_count() const;
};

/// Every *.psv file in `dir`, in lexicographic filename order.
Cohort read_cohort(const std::filesystem::path& dir);

/// Forward fill within each patient; leading gaps take the cohort mean of
/// the column's observed values; columns never observed become 0.
Cohort impute(const Cohort& cohort);

struct CohortSplit {
  Cohort train;
  Cohort test;
};

/// Disjoint uniform samples per class, deterministic given rng.
CohortSplit split_cohort(const Cohort& cohort, std::size_t train_septic, std::size_t train_nonseptic,
                         std::size_t test_septic, std::size_t test_nonseptic, RngSeed rng);

enum class NoiseKind { gaussian, uniform };
enum class ContextKind { standard_normal, uniform_cube };

/// f_k(x) = intercept + coefficients . x, plus zero-mean noise with the
/// given standard deviation (uniform noise spans [-sqrt(3) sd, sqrt(3) sd]).
struct SynthArm {
  Vector coefficients;
  double intercept = 0.0;
  NoiseKind noise = NoiseKind::gaussian;
  double noise_sd = 0.0;
};

struct SynthSpec {
  Eigen::Index dimension = 1;
  std::vector<SynthArm> arms;
  std::size_t horizon = 0;
  ContextKind context = ContextKind::standard_normal;  // uniform cube is [-1, 1]^d
};

std::vector<std::string> synth_violations(const SynthSpec& spec);

struct SynthRound {
  Vector x;
  std::vector<double> means;    // noiseless f_k(x)
  std::vector<double> rewards;  // f_k(x) + noise
};

/// Round t draws from derive_substream(rng, {synth, t}).
std::vector<SynthRound> synth_stream(const SynthSpec& spec, RngSeed rng);

/// Labelled synthetic cohort in PSV shape: `features` columns plus
/// SepsisLabel. Septic patients get a positive label from a random hour
/// onwards; feature j shifts by signal[j] on positive hours.
struct SynthCohortSpec {
  std::size_t septic = 20;
  std::size_t nonseptic = 20;
  std::size_t min_hours = 20;
  std::size_t max_hours = 40;
  std::vector<std::string> features{"HR", "O2Sat", "Temp", "Resp"};
  std::vector<double> signal{1.5, 0.5, 0.0, 0.0};
  double missing_rate = 0.1;
};

Cohort synth_cohort(const SynthCohortSpec& spec, RngSeed rng);

}  // namespace olcp
