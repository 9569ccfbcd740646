#pragma once

// Synthetic linear-arm environments for the simulate command.

#include "olcp/config.hpp"
#include "olcp/data.hpp"
#include "olcp/selector.hpp"

namespace olcp {

struct SimulationOptions {
  Eigen::Index dimension = 2;
  std::size_t train_size = 50;
  double noise_sd = 0.1;
  NoiseKind noise = NoiseKind::gaussian;
  ContextKind context = ContextKind::uniform_cube;
  // Arm k has intercept (K - 1 - k) * arm_spacing, so arm 0 is best on average.
  double arm_spacing = 0.3;
  // Coefficients are N(0, slope_scale^2) per component.
  double slope_scale = 0.1;
};

std::vector<std::string> simulation_violations(const SimulationOptions& options);

/// Arm k's coefficients draw from derive_substream(seed, {synth, 0}, {arm, k}).
SynthSpec simulation_arms(std::size_t arms, const SimulationOptions& options, RngSeed seed);

/// Offline data (train_size shared contexts) and budget online rounds with
/// noiseless means attached.
Stream simulated_stream(const ExperimentConfig& config, const SimulationOptions& options);

}  // namespace olcp
