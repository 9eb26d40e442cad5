#pragma once

#include <vector>

#include "atnet/common/grid.hpp"
#include "atnet/dataset/clip.hpp"
#include "atnet/flow/horn_schunck.hpp"
#include "atnet/preprocess/window.hpp"

namespace atnet::adm {

struct PolarField {
  Grid rho;
  Grid theta;
};

/// Per-pixel magnitude and direction. theta = atan2(v, u) in (-pi, pi],
/// set to 0 where rho < 1e-12.
PolarField to_polar(const flow::FlowField& flow);

struct AdmParams {
  flow::FlowParams flow;
  /// Blocks per side; the frame side must be a multiple of it.
  int grid = 8;
  /// Average directions on the circle instead of arithmetically. Off by
  /// default; the arithmetic mean is discontinuous across +-pi.
  bool circular_mean = false;

  void validate() const;
  void validate_for_size(int size) const;
};

/// Splits the field into grid x grid equal blocks (row-major) and returns
/// (rho_1, theta_1, rho_2, theta_2, ...), length 2 * grid^2.
std::vector<double> block_average(const PolarField& polar, int grid = 8, bool circular_mean = false);

/// One row per consecutive frame pair: (W - 1) x (2 * grid^2), i.e. 64 x 128
/// for the standard 65-frame window and 8 x 8 grid.
Grid extract_adm(const pre::FrameWindow& window, const AdmParams& params = {});

/// Window selection plus extraction for a whole clip.
Grid extract_clip_adm(const data::Clip& clip, int size, const AdmParams& params = {}, int half_width = 32);

/// extract_clip_adm over every clip with up to `jobs` worker threads.
/// Output order matches the input order regardless of scheduling.
std::vector<Grid> extract_all(const std::vector<data::Clip>& clips, int size, const AdmParams& params, int jobs,
                              int half_width = 32);

}  // namespace atnet::adm
