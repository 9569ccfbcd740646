#include "olcp/simulate.hpp"

#include <cmath>

namespace olcp {

std::vector<std::string> simulation_violations(const SimulationOptions& o) {
  std::vector<std::string> v;
  if (o.dimension < 1) v.emplace_back("dimension must be >= 1");
  if (o.train_size < 2) v.emplace_back("train_size must be >= 2");
  if (!(o.noise_sd >= 0.0) || !std::isfinite(o.noise_sd)) v.emplace_back("noise_sd must be finite and >= 0");
  if (!std::isfinite(o.arm_spacing)) v.emplace_back("arm_spacing must be finite");
  if (!(o.slope_scale >= 0.0) || !std::isfinite(o.slope_scale)) v.emplace_back("slope_scale must be finite and >= 0");
  return v;
}

SynthSpec simulation_arms(std::size_t arms, const SimulationOptions& o, RngSeed seed) {
  SynthSpec spec;
  spec.dimension = o.dimension;
  spec.context = o.context;
  for (std::size_t k = 0; k < arms; ++k) {
    Rng gen = make_rng(derive_substream(seed, {{StreamTag::synth, 0}, {StreamTag::arm, k}}));
    SynthArm arm;
    arm.coefficients.resize(o.dimension);
    for (Eigen::Index i = 0; i < o.dimension; ++i) arm.coefficients(i) = o.slope_scale * standard_normal(gen);
    arm.intercept = static_cast<double>(arms - 1 - k) * o.arm_spacing;
    arm.noise = o.noise;
    arm.noise_sd = o.noise_sd;
    spec.arms.push_back(std::move(arm));
  }
  return spec;
}

Stream simulated_stream(const ExperimentConfig& config, const SimulationOptions& o) {
  if (auto v = simulation_violations(o); !v.empty()) throw InvalidArgument(v.front());
  const RngSeed seed{config.seed};
  const auto k = static_cast<std::size_t>(config.num_arms);
  SynthSpec spec = simulation_arms(k, o, seed);

  Stream stream;
  spec.horizon = o.train_size;
  const auto offline = synth_stream(spec, derive_substream(seed, {{StreamTag::synth, 1}}));
  stream.offline.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    TrainingSet& set = stream.offline[a];
    set.features.resize(static_cast<Eigen::Index>(offline.size()), o.dimension);
    set.targets.resize(static_cast<Eigen::Index>(offline.size()));
    for (std::size_t i = 0; i < offline.size(); ++i) {
      set.features.row(static_cast<Eigen::Index>(i)) = offline[i].x.transpose();
      set.targets(static_cast<Eigen::Index>(i)) = offline[i].rewards[a];
    }
  }

  spec.horizon = static_cast<std::size_t>(config.budget);
  for (auto& r : synth_stream(spec, derive_substream(seed, {{StreamTag::synth, 2}}))) {
    stream.rounds.push_back(StreamRound{std::move(r.x), std::move(r.rewards), std::move(r.means)});
  }
  return stream;
}

}  // namespace olcp
