#include "atnet/flow/horn_schunck.hpp"

#include <cmath>

#include "atnet/common/error.hpp"

namespace atnet::flow {

namespace {

// Mean of the four edge-replicated neighbours.
void neighbour_mean(const Grid& f, Grid& out) {
  const int rows = f.rows(), cols = f.cols();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      out(r, c) = 0.25 * (f.clamped(r - 1, c) + f.clamped(r + 1, c) + f.clamped(r, c - 1) + f.clamped(r, c + 1));
    }
}

}  // namespace

void FlowParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("flow: smoothness weight must be > 0");
  if (iterations < 1) throw ConfigError("flow: iterations must be >= 1");
}

FlowField estimate_flow(const Image& a, const Image& b, const FlowParams& params,
                        std::vector<double>* residual_history) {
  params.validate();
  if (!a.same_shape(b)) {
    throw ShapeError("estimate_flow: frames are " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  if (a.empty()) throw ShapeError("estimate_flow: empty frames");
  const int rows = a.rows(), cols = a.cols();
  const std::size_t n = a.size();

  Grid ix(rows, cols), iy(rows, cols), it(rows, cols), denom(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      ix(r, c) = 0.25 * (a.clamped(r, c + 1) - a.clamped(r, c - 1) + b.clamped(r, c + 1) - b.clamped(r, c - 1));
      iy(r, c) = 0.25 * (a.clamped(r + 1, c) - a.clamped(r - 1, c) + b.clamped(r + 1, c) - b.clamped(r - 1, c));
      it(r, c) = b(r, c) - a(r, c);
      denom(r, c) = params.alpha * params.alpha + ix(r, c) * ix(r, c) + iy(r, c) * iy(r, c);
    }

  // v_down is the row-direction component; it is negated on output.
  Grid u(rows, cols), v_down(rows, cols), ubar(rows, cols), vbar(rows, cols);
  if (residual_history) residual_history->clear();
  for (int k = 0; k < params.iterations; ++k) {
    neighbour_mean(u, ubar);
    neighbour_mean(v_down, vbar);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double gx = ix.values()[i], gy = iy.values()[i];
      const double t = (gx * ubar.values()[i] + gy * vbar.values()[i] + it.values()[i]) / denom.values()[i];
      u.values()[i] = ubar.values()[i] - gx * t;
      v_down.values()[i] = vbar.values()[i] - gy * t;
      const double res = gx * u.values()[i] + gy * v_down.values()[i] + it.values()[i];
      sq += res * res;
    }
    if (residual_history) residual_history->push_back(sq / static_cast<double>(n));
  }

  for (auto& x : v_down.values()) x = 0.0 - x;  // never produces -0.0
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(u.values()[i]) || !std::isfinite(v_down.values()[i])) {
      throw NumericalError("estimate_flow: non-finite flow");
    }
  }
  return {std::move(u), std::move(v_down)};
}

}  // namespace atnet::flow
