#include "olcp/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace olcp {

using nlohmann::json;

std::string to_string(FeedbackMode mode) { return mode == FeedbackMode::full ? "full" : "bandit"; }

std::string to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::neg_abs_error: return "neg-abs-error";
    case RewardMode::utility_increment: return "utility-increment";
    case RewardMode::external: return "external";
  }
  return "unknown";
}

FeedbackMode parse_feedback_mode(const std::string& text) {
  if (text == "full") return FeedbackMode::full;
  if (text == "bandit") return FeedbackMode::bandit;
  throw InvalidArgument("unknown feedback mode '" + text + "'");
}

RewardMode parse_reward_mode(const std::string& text) {
  if (text == "neg-abs-error") return RewardMode::neg_abs_error;
  if (text == "utility-increment") return RewardMode::utility_increment;
  if (text == "external") return RewardMode::external;
  throw InvalidArgument("unknown reward mode '" + text + "'");
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> v;
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) v.emplace_back("alpha out of (0,1)");
  if (c.num_arms < 1) v.emplace_back("num_arms must be >= 1");
  if (c.budget < 1) v.emplace_back("budget must be >= 1");
  if (c.bootstrap_count < 1) v.emplace_back("bootstrap_count must be >= 1");
  if (c.window_size < 2) v.emplace_back("window_size must be >= 2");
  if (c.refit_step < 1) v.emplace_back("refit_step must be >= 1");
  if (!(c.beta_grid_step > 0.0) || !std::isfinite(c.beta_grid_step)) v.emplace_back("beta_grid_step must be > 0");
  if (c.num_arms >= 1 && static_cast<int>(c.learners.size()) != c.num_arms) {
    v.emplace_back("learners must list exactly num_arms specs (got " + std::to_string(c.learners.size()) + ")");
  }
  for (std::size_t k = 0; k < c.learners.size(); ++k) {
    for (const auto& msg : spec_violations(c.learners[k])) v.push_back("arm " + std::to_string(k + 1) + ": " + msg);
  }
  if (c.threads < 1) v.emplace_back("threads must be >= 1");
  return v;
}

namespace {

PredictorSpec learner_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("learner entries must be objects");
  PredictorSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      const auto kind = value.get<std::string>();
      spec = parse_predictor_spec(kind);
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    if (key == "lambda") spec.lambda = value.get<double>();
    else if (key == "fit_intercept") spec.fit_intercept = value.get<bool>();
    else if (key == "k") spec.k = value.get<int>();
    else if (key == "max_depth") spec.max_depth = value.get<int>();
    else throw InvalidArgument("unknown learner key '" + key + "'");
  }
  if (!j.contains("kind")) throw InvalidArgument("learner entry missing 'kind'");
  return spec;
}

json learner_to_json(const PredictorSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  switch (spec.kind) {
    case PredictorKind::ridge:
      j["lambda"] = spec.lambda;
      j["fit_intercept"] = spec.fit_intercept;
      break;
    case PredictorKind::knn: j["k"] = spec.k; break;
    case PredictorKind::tree: j["max_depth"] = spec.max_depth; break;
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");

  ExperimentConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "num_arms") c.num_arms = value.get<int>();
      else if (key == "budget") c.budget = value.get<int>();
      else if (key == "bootstrap_count") c.bootstrap_count = value.get<int>();
      else if (key == "window_size") c.window_size = value.get<int>();
      else if (key == "refit_step") c.refit_step = value.get<int>();
      else if (key == "is_refit") c.is_refit = value.get<bool>();
      else if (key == "feedback_mode") c.feedback_mode = parse_feedback_mode(value.get<std::string>());
      else if (key == "beta_grid_step") c.beta_grid_step = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "reward_mode") c.reward_mode = parse_reward_mode(value.get<std::string>());
      else if (key == "aggregator") c.aggregator = parse_aggregator(value.get<std::string>());
      else if (key == "learners") {
        c.learners.clear();
        for (const auto& entry : value) c.learners.push_back(learner_from_json(entry));
      } else {
        throw InvalidArgument("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config has a value of the wrong type: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const ExperimentConfig& c) {
  json j;
  j["alpha"] = c.alpha;
  j["num_arms"] = c.num_arms;
  j["budget"] = c.budget;
  j["bootstrap_count"] = c.bootstrap_count;
  j["window_size"] = c.window_size;
  j["refit_step"] = c.refit_step;
  j["is_refit"] = c.is_refit;
  j["feedback_mode"] = to_string(c.feedback_mode);
  j["beta_grid_step"] = c.beta_grid_step;
  j["seed"] = c.seed;
  j["reward_mode"] = to_string(c.reward_mode);
  j["aggregator"] = to_string(c.aggregator);
  j["learners"] = json::array();
  for (const auto& spec : c.learners) j["learners"].push_back(learner_to_json(spec));
  return j.dump(2) + "\n";
}

}  // namespace olcp
