#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "atnet/adm/adm_feature.hpp"
#include "atnet/dataset/synth.hpp"
#include "atnet/evaluation/splits.hpp"
#include "atnet/model/config.hpp"
#include "atnet/training/trainer.hpp"

namespace atnet::cli {

/// Everything a run needs, merged from defaults, an optional JSON config
/// file and command-line flags (in that order of precedence, lowest first).
struct RunConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  adm::AdmParams adm;
  data::SynthConfig synth;
  eval::Protocol protocol = eval::Protocol::Cde;
  std::vector<model::StreamMode> streams{model::StreamMode::Fusion};
  /// Side of the normalised frames; must equal the spatial input size.
  int frame_size = 32;
  /// Frames either side of the apex; the temporal stream sees 2 * half_width steps.
  int half_width = 32;
  std::uint64_t seed = 7;
  int jobs = 1;

  /// Switches to S=224, D=512, 512 LSTM units (shape checks only).
  void apply_paper_scale();
  /// Propagates frame_size / half_width / grid into the model, synth and
  /// augmentation settings, then checks cross-field constraints.
  void finalize();
};

/// Reads a JSON config file onto `config`. Unknown keys are rejected so
/// typos do not silently fall back to defaults.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void apply_config_json(RunConfig& config, const std::string& text);

/// The resolved configuration as JSON (the format apply_config_json reads).
std::string config_to_json(const RunConfig& config);

}  // namespace atnet::cli
