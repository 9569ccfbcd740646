#include "olcp/report.hpp"

#include "olcp/data.hpp"
#include "olcp/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace olcp {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::string> rounds_header(std::size_t arms) {
  std::vector<std::string> h{"t", "arm", "reward", "regret"};
  for (std::size_t k = 1; k <= arms; ++k) {
    for (const char* name : {"f_hat_", "L_", "U_", "B_", "s_"}) h.push_back(name + std::to_string(k));
  }
  h.emplace_back("J");
  h.emplace_back("j");
  for (std::size_t k = 1; k <= arms; ++k) h.push_back("fallback_" + std::to_string(k));
  for (std::size_t k = 1; k <= arms; ++k) h.push_back("n_" + std::to_string(k));
  return h;
}

void write_rounds_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<RoundRecord>& records) {
  const auto arms = static_cast<std::size_t>(config.num_arms);
  out << "# olcp-rounds v" << kRoundsSchemaVersion << " alpha=" << format_number(config.alpha) << " arms=" << arms
      << " feedback=" << to_string(config.feedback_mode) << " seed=" << config.seed << '\n';
  const auto header = rounds_header(arms);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& rec : records) {
    std::string line = std::to_string(rec.t) + ',' + std::to_string(rec.chosen + 1) + ',' + format_number(rec.reward) +
                       ',' + format_number(rec.regret);
    for (const auto& a : rec.arms) {
      for (double v : {a.f_hat, a.lower, a.upper, a.gap, a.width}) line += ',' + format_number(v);
    }
    line += ',' + std::to_string(rec.leader + 1) + ',' + std::to_string(rec.runner_up + 1);
    for (const auto& a : rec.arms) line += a.fallback ? ",1" : ",0";
    for (const auto& a : rec.arms) line += ',' + std::to_string(a.window);
    out << line << '\n';
  }
}

void write_regret_csv(std::ostream& out, const std::vector<RoundRecord>& records) {
  std::vector<double> regret;
  std::vector<double> zero(records.size(), 0.0);
  for (const auto& r : records) regret.push_back(r.regret);
  const RegretSeries series = average_regret(zero, regret);
  out << "t,regret,average_regret\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << records[i].t << ',' << format_number(series.instantaneous[i]) << ','
        << format_number(series.running_average[i]) << '\n';
  }
}

void write_metrics(std::ostream& out, const std::map<std::string, double>& metrics) {
  out << "# olcp-metrics v" << kMetricsSchemaVersion << '\n';
  for (const auto& [key, value] : metrics) out << key << '=' << format_number(value) << '\n';
}

std::map<std::string, double> read_metrics(std::istream& in) {
  std::map<std::string, double> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("metrics line without '=': " + line);
    const std::string value = line.substr(eq + 1);
    out[line.substr(0, eq)] = value == "nan" ? std::nan("") : std::stod(value);
  }
  return out;
}

std::size_t RoundsFile::arms() const { return static_cast<std::size_t>(std::stoul(stamp.at("arms"))); }

double RoundsFile::alpha() const { return std::stod(stamp.at("alpha")); }

std::size_t RoundsFile::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError(source + ": missing column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

RoundsFile read_rounds_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");
  RoundsFile file;
  file.source = path.string();

  std::string line;
  if (!std::getline(in, line) || line.rfind("# olcp-rounds v", 0) != 0)
    throw DataError(file.source + ": missing olcp-rounds schema stamp");
  {
    std::istringstream stamp(line.substr(2));
    std::string token;
    stamp >> token;  // olcp-rounds
    stamp >> token;  // vN
    try {
      file.schema_version = std::stoi(token.substr(1));
    } catch (const std::exception&) {
      throw DataError(file.source + ": bad schema version '" + token + "'");
    }
    while (stamp >> token) {
      const auto eq = token.find('=');
      if (eq != std::string::npos) file.stamp[token.substr(0, eq)] = token.substr(eq + 1);
    }
  }
  if (!file.stamp.count("alpha") || !file.stamp.count("arms")) throw DataError(file.source + ": incomplete stamp");
  if (!std::getline(in, line)) throw DataError(file.source + ": missing header");
  {
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) file.header.push_back(col);
  }
  if (file.schema_version == kRoundsSchemaVersion && file.header != rounds_header(file.arms()))
    throw DataError(file.source + ": header does not match schema v" + std::to_string(kRoundsSchemaVersion));

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      row.push_back(cell == "nan" ? std::nan("") : std::stod(cell));
    }
    if (row.size() != file.header.size())
      throw DataError(file.source + ": line " + std::to_string(line_no) + ": ragged row");
    file.rows.push_back(std::move(row));
  }
  return file;
}

std::string comparison_table(const std::vector<RoundsFile>& inputs) {
  if (inputs.empty()) throw InvalidArgument("report: no inputs");
  for (const auto& f : inputs) {
    if (f.schema_version != inputs.front().schema_version)
      throw DataError("report: schema version mismatch between " + inputs.front().source + " and " + f.source);
    if (f.schema_version != kRoundsSchemaVersion)
      throw DataError("report: unsupported schema version in " + f.source);
    if (f.arms() != inputs.front().arms())
      throw DataError("report: arm count mismatch between " + inputs.front().source + " and " + f.source);
  }
  std::vector<const RoundsFile*> sorted;
  for (const auto& f : inputs) sorted.push_back(&f);
  std::stable_sort(sorted.begin(), sorted.end(), [](const RoundsFile* a, const RoundsFile* b) {
    return a->alpha() != b->alpha() ? a->alpha() < b->alpha() : a->source < b->source;
  });

  const std::size_t arms = inputs.front().arms();
  std::ostringstream out;
  out << "alpha,source,rounds,mean_reward,average_regret,mean_width,coverage_chosen,recommendation";
  for (std::size_t k = 1; k <= arms; ++k) out << ",share_" << k;
  out << '\n';
  for (const RoundsFile* f : sorted) {
    const std::size_t c_arm = f->column("arm");
    const std::size_t c_reward = f->column("reward");
    const std::size_t c_regret = f->column("regret");
    const std::size_t c_t = f->column("t");
    const std::size_t c_leader = f->column("J");
    double reward = 0.0, regret = 0.0, width = 0.0, covered = 0.0;
    std::vector<double> share(arms, 0.0);
    std::vector<GapRecord> gaps;
    for (const auto& row : f->rows) {
      const auto a = static_cast<std::size_t>(row[c_arm]);
      reward += row[c_reward];
      regret += row[c_regret];
      const double lo = row[f->column("L_" + std::to_string(a))];
      const double hi = row[f->column("U_" + std::to_string(a))];
      width += hi - lo;
      if (lo <= row[c_reward] && row[c_reward] <= hi) covered += 1.0;
      share[a - 1] += 1.0;
      const auto leader = static_cast<std::size_t>(row[c_leader]);
      const double gap = arms > 1 ? row[f->column("B_" + std::to_string(leader))] : 0.0;
      gaps.push_back(GapRecord{static_cast<std::int64_t>(row[c_t]), leader, gap});
    }
    const auto n = static_cast<double>(f->rows.size());
    out << format_number(f->alpha()) << ',' << f->source << ',' << f->rows.size();
    if (f->rows.empty()) {
      out << ",nan,nan,nan,nan,nan";
      for (std::size_t k = 0; k < arms; ++k) out << ",nan";
    } else {
      out << ',' << format_number(reward / n) << ',' << format_number(regret / n) << ',' << format_number(width / n)
          << ',' << format_number(covered / n) << ',' << recommend(gaps);
      for (double s : share) out << ',' << format_number(s / n);
    }
    out << '\n';
  }
  return out.str();
}

std::map<std::string, double> run_summary(const ExperimentResult& result) {
  std::map<std::string, double> m;
  const auto n = static_cast<double>(result.records.size());
  double regret = 0.0, reward = 0.0, width = 0.0, covered = 0.0;
  std::size_t contained = 0;
  for (const auto& rec : result.records) {
    regret += rec.regret;
    reward += rec.reward;
    const auto& a = rec.arms[rec.chosen];
    width += a.width;
    if (a.lower <= a.reward && a.reward <= a.upper) covered += 1.0;
    if (rec.contained()) ++contained;
  }
  m["rounds"] = n;
  m["average_regret"] = n > 0 ? regret / n : std::nan("");
  m["mean_reward"] = n > 0 ? reward / n : std::nan("");
  m["mean_width"] = n > 0 ? width / n : std::nan("");
  m["coverage_chosen"] = n > 0 ? covered / n : std::nan("");
  m["containment_rate"] = n > 0 ? static_cast<double>(contained) / n : std::nan("");
  m["recommendation"] = static_cast<double>(result.recommendation + 1);
  m["lemma_violations"] = static_cast<double>(count_lemma_violations(result.records));
  std::vector<double> chosen(result.pull_counts.size(), 0.0);
  for (const auto& rec : result.records) chosen[rec.chosen] += 1.0;
  for (std::size_t k = 0; k < result.pull_counts.size(); ++k) {
    m["chosen_" + std::to_string(k + 1)] = chosen[k];
    m["updates_" + std::to_string(k + 1)] = static_cast<double>(result.pull_counts[k]);
  }
  return m;
}

}  // namespace olcp
