#pragma once

#include <vector>

#include "atnet/common/grid.hpp"

namespace atnet::flow {

/// Dense displacement between two frames, in pixels per frame step.
/// u is positive to the right; v is positive upwards (against the row
/// index), so atan2(v, u) reads as a conventional compass angle.
struct FlowField {
  Grid u;
  Grid v;
};

struct FlowParams {
  /// Smoothness weight on [0,1] intensities. 15/255 corresponds to the
  /// customary alpha = 15 on 8-bit intensities.
  double alpha = 15.0 / 255.0;
  int iterations = 100;

  void validate() const;
};

/// Horn-Schunck flow by Jacobi iteration from zero. Spatial derivatives
/// are central differences averaged over both frames, the temporal
/// derivative is b - a, and the smoothness term uses the 4-neighbour mean.
/// Borders replicate edge pixels.
///
/// If `residual_history` is given it receives, after every iteration, the
/// mean squared brightness-constancy residual (Ix u + Iy v + It)^2.
FlowField estimate_flow(const Image& a, const Image& b, const FlowParams& params = {},
                        std::vector<double>* residual_history = nullptr);

}  // namespace atnet::flow
