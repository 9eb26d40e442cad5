#pragma once

#include <cstdint>

#include "atnet/dataset/clip.hpp"

namespace atnet::data {

struct SynthConfig {
  int subjects = 5;
  int clips_per_subject = 9;
  int frame_size = 32;
  int min_frames = 70;
  int max_frames = 80;
  /// Number of pseudo datasets the subjects are dealt into (round-robin).
  /// 1 puts everything under SYNTH; 3 gives SYNTH-A/B/C for holdout runs.
  int pseudo_datasets = 3;
  /// Peak drift speed of the moving pattern, pixels per frame at the apex.
  double peak_speed = 0.12;
  /// Width (frames) of the Gaussian speed profile around the apex.
  double motion_width = 22.0;
  /// Peak intensity of the moving pattern on [0, 1] intensities.
  double pattern_amplitude = 0.65;

  void validate() const;
  std::string describe() const;
};

/// Generates a synthetic micro-expression set. Each clip shows a textured,
/// subject-specific background with a localized pattern that moves around
/// the apex: Positive is a bright wide blob drifting up, Negative a dark
/// wide blob drifting down, Surprise a bright tall blob stretching
/// vertically. The shapes differ too, so the apex frame alone carries a
/// (weaker) class cue.
/// Classes are dealt round-robin over the global clip index, so the class
/// balance is as even as the clip count allows. Deterministic in `seed`.
ClipSet synth_generate(const SynthConfig& config, std::uint64_t seed);

}  // namespace atnet::data
