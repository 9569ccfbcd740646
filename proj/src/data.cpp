#include "olcp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace olcp {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

double parse_number(std::string_view token, std::size_t line) {
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw DataError(line_error(line, "unparseable value '" + std::string(token) + "'"));
  }
  return value;
}

void append_number(std::string& out, double value) {
  if (std::isnan(value)) {
    out.append(kMissingToken);
    return;
  }
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

bool PatientRecord::septic() const { return std::find(labels.begin(), labels.end(), 1) != labels.end(); }

int PatientRecord::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

PatientRecord parse_psv(std::string_view text, std::string id) {
  std::vector<std::string_view> lines = split(text, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front().empty()) throw DataError(line_error(1, "missing header"));

  PatientRecord rec;
  rec.id = std::move(id);
  for (auto name : split(lines.front(), '|')) rec.columns.emplace_back(name);
  const int label = rec.column_index(kLabelColumn);
  if (label < 0) throw DataError(line_error(1, "missing SepsisLabel column"));
  rec.label_column = static_cast<std::size_t>(label);

  const auto width = static_cast<Eigen::Index>(rec.columns.size());
  const auto hours = static_cast<Eigen::Index>(lines.size() - 1);
  rec.values.resize(hours, width);
  rec.labels.resize(static_cast<std::size_t>(hours));
  for (Eigen::Index h = 0; h < hours; ++h) {
    const std::size_t line_no = static_cast<std::size_t>(h) + 2;
    const auto fields = split(lines[static_cast<std::size_t>(h) + 1], '|');
    if (static_cast<Eigen::Index>(fields.size()) != width) {
      throw DataError(line_error(line_no, "ragged row: expected " + std::to_string(width) + " fields, got " +
                                              std::to_string(fields.size())));
    }
    for (Eigen::Index c = 0; c < width; ++c) {
      const auto token = fields[static_cast<std::size_t>(c)];
      rec.values(h, c) = token == kMissingToken ? kMissing : parse_number(token, line_no);
    }
    const double y = rec.values(h, label);
    if (y != 0.0 && y != 1.0) throw DataError(line_error(line_no, "SepsisLabel must be 0 or 1"));
    rec.labels[static_cast<std::size_t>(h)] = static_cast<int>(y);
  }
  return rec;
}

std::string serialize_psv(const PatientRecord& record) {
  std::string out;
  for (std::size_t c = 0; c < record.columns.size(); ++c) {
    if (c) out.push_back('|');
    out.append(record.columns[c]);
  }
  out.push_back('\n');
  for (Eigen::Index h = 0; h < record.values.rows(); ++h) {
    for (Eigen::Index c = 0; c < record.values.cols(); ++c) {
      if (c) out.push_back('|');
      append_number(out, record.values(h, c));
    }
    out.push_back('\n');
  }
  return out;
}

PatientRecord read_psv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_psv(buf.str(), path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_psv(const PatientRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot write");
  out << serialize_psv(record);
}

std::size_t Cohort::septic_count() const {
  return static_cast<std::size_t>(
      std::count_if(patients.begin(), patients.end(), [](const PatientRecord& p) { return p.septic(); }));
}

Cohort read_cohort(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError(dir.string() + ": not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".psv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError(dir.string() + ": no .psv files");
  Cohort cohort;
  for (const auto& f : files) cohort.patients.push_back(read_psv(f));
  const auto& header = cohort.patients.front().columns;
  for (std::size_t i = 1; i < cohort.patients.size(); ++i) {
    if (cohort.patients[i].columns != header) throw DataError(files[i].string() + ": header differs from " + files[0].string());
  }
  return cohort;
}

Cohort impute(const Cohort& cohort) {
  Cohort out = cohort;
  if (out.patients.empty()) return out;
  const Eigen::Index width = out.patients.front().values.cols();

  Vector column_mean = Vector::Zero(width);
  for (Eigen::Index c = 0; c < width; ++c) {
    double sum = 0.0;
    double count = 0.0;
    for (const auto& p : cohort.patients) {
      for (Eigen::Index h = 0; h < p.values.rows(); ++h) {
        if (!std::isnan(p.values(h, c))) {
          sum += p.values(h, c);
          count += 1.0;
        }
      }
    }
    column_mean(c) = count > 0 ? sum / count : 0.0;
  }

  for (auto& p : out.patients) {
    for (Eigen::Index c = 0; c < p.values.cols(); ++c) {
      double last = column_mean(c);
      for (Eigen::Index h = 0; h < p.values.rows(); ++h) {
        if (std::isnan(p.values(h, c))) p.values(h, c) = last;
        else last = p.values(h, c);
      }
    }
  }
  return out;
}

CohortSplit split_cohort(const Cohort& cohort, std::size_t train_septic, std::size_t train_nonseptic,
                         std::size_t test_septic, std::size_t test_nonseptic, RngSeed rng) {
  std::vector<std::size_t> septic;
  std::vector<std::size_t> nonseptic;
  for (std::size_t i = 0; i < cohort.patients.size(); ++i) {
    (cohort.patients[i].septic() ? septic : nonseptic).push_back(i);
  }
  if (train_septic + test_septic > septic.size()) {
    throw DataError("split_cohort: requested " + std::to_string(train_septic + test_septic) +
                    " septic patients, cohort has " + std::to_string(septic.size()));
  }
  if (train_nonseptic + test_nonseptic > nonseptic.size()) {
    throw DataError("split_cohort: requested " + std::to_string(train_nonseptic + test_nonseptic) +
                    " non-septic patients, cohort has " + std::to_string(nonseptic.size()));
  }

  auto shuffle = [](std::vector<std::size_t>& v, RngSeed seed) {
    Rng gen = make_rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(gen, i)]);
  };
  shuffle(septic, derive_substream(rng, {{StreamTag::split, 1}}));
  shuffle(nonseptic, derive_substream(rng, {{StreamTag::split, 0}}));

  // Patients keep cohort order within each side.
  std::vector<std::size_t> train(septic.begin(), septic.begin() + static_cast<std::ptrdiff_t>(train_septic));
  train.insert(train.end(), nonseptic.begin(), nonseptic.begin() + static_cast<std::ptrdiff_t>(train_nonseptic));
  std::vector<std::size_t> test(septic.begin() + static_cast<std::ptrdiff_t>(train_septic),
                                septic.begin() + static_cast<std::ptrdiff_t>(train_septic + test_septic));
  test.insert(test.end(), nonseptic.begin() + static_cast<std::ptrdiff_t>(train_nonseptic),
              nonseptic.begin() + static_cast<std::ptrdiff_t>(train_nonseptic + test_nonseptic));
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  CohortSplit out;
  for (auto i : train) out.train.patients.push_back(cohort.patients[i]);
  for (auto i : test) out.test.patients.push_back(cohort.patients[i]);
  return out;
}

std::vector<std::string> synth_violations(const SynthSpec& spec) {
  std::vector<std::string> v;
  if (spec.dimension < 1) v.emplace_back("synth: dimension must be >= 1");
  if (spec.arms.empty()) v.emplace_back("synth: need at least one arm");
  for (std::size_t k = 0; k < spec.arms.size(); ++k) {
    const auto& arm = spec.arms[k];
    if (arm.coefficients.size() != spec.dimension)
      v.push_back("synth: arm " + std::to_string(k + 1) + " coefficient length differs from dimension");
    if (!(arm.noise_sd >= 0.0)) v.push_back("synth: arm " + std::to_string(k + 1) + " noise sd must be >= 0");
  }
  return v;
}

std::vector<SynthRound> synth_stream(const SynthSpec& spec, RngSeed rng) {
  if (auto v = synth_violations(spec); !v.empty()) throw InvalidArgument(v.front());
  std::vector<SynthRound> rounds(spec.horizon);
  for (std::size_t t = 0; t < spec.horizon; ++t) {
    Rng gen = make_rng(derive_substream(rng, {{StreamTag::synth, t}}));
    SynthRound& r = rounds[t];
    r.x.resize(spec.dimension);
    for (Eigen::Index j = 0; j < spec.dimension; ++j) {
      r.x(j) = spec.context == ContextKind::standard_normal ? standard_normal(gen) : 2.0 * uniform01(gen) - 1.0;
    }
    for (const auto& arm : spec.arms) {
      const double mean = arm.intercept + arm.coefficients.dot(r.x);
      double noise = 0.0;
      if (arm.noise_sd > 0.0) {
        noise = arm.noise == NoiseKind::gaussian ? arm.noise_sd * standard_normal(gen)
                                                 : arm.noise_sd * std::sqrt(3.0) * (2.0 * uniform01(gen) - 1.0);
      }
      r.means.push_back(mean);
      r.rewards.push_back(mean + noise);
    }
  }
  return rounds;
}

Cohort synth_cohort(const SynthCohortSpec& spec, RngSeed rng) {
  if (spec.features.size() != spec.signal.size()) throw InvalidArgument("synth_cohort: one signal per feature");
  if (spec.min_hours < 1 || spec.max_hours < spec.min_hours) throw InvalidArgument("synth_cohort: bad hour range");

  const std::size_t total = spec.septic + spec.nonseptic;
  const auto width = static_cast<Eigen::Index>(spec.features.size() + 1);
  // Class order is shuffled so file order does not sort by outcome.
  std::vector<bool> is_septic(total, false);
  std::fill_n(is_septic.begin(), spec.septic, true);
  {
    Rng gen = make_rng(derive_substream(rng, {{StreamTag::cohort, 1}}));
    for (std::size_t i = total; i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(gen, i));
      const bool tmp = is_septic[i - 1];
      is_septic[i - 1] = is_septic[j];
      is_septic[j] = tmp;
    }
  }

  Cohort cohort;
  for (std::size_t p = 0; p < total; ++p) {
    Rng gen = make_rng(derive_substream(rng, {{StreamTag::cohort, 0}, {StreamTag::patient, p}}));
    const bool septic = is_septic[p];
    const auto hours = static_cast<Eigen::Index>(spec.min_hours + uniform_index(gen, spec.max_hours - spec.min_hours + 1));
    Eigen::Index onset = hours;
    if (septic) onset = hours / 2 + static_cast<Eigen::Index>(uniform_index(gen, static_cast<std::uint64_t>(hours - hours / 2)));

    PatientRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "p%05zu", p + 1);
    rec.id = id;
    rec.columns = spec.features;
    rec.columns.emplace_back(kLabelColumn);
    rec.label_column = spec.features.size();
    rec.values.resize(hours, width);
    rec.labels.resize(static_cast<std::size_t>(hours));

    std::vector<double> baseline(spec.features.size());
    for (auto& b : baseline) b = 0.5 * standard_normal(gen);
    for (Eigen::Index h = 0; h < hours; ++h) {
      const int y = h >= onset ? 1 : 0;
      rec.labels[static_cast<std::size_t>(h)] = y;
      for (std::size_t j = 0; j < spec.features.size(); ++j) {
        const double v = baseline[j] + spec.signal[j] * y + standard_normal(gen);
        const bool missing = uniform01(gen) < spec.missing_rate;
        rec.values(h, static_cast<Eigen::Index>(j)) = missing ? kMissing : v;
      }
      rec.values(h, width - 1) = y;
    }
    cohort.patients.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace olcp
