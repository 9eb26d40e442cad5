#include "atnet/adm/adm_feature.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "atnet/common/error.hpp"

namespace atnet::adm {

PolarField to_polar(const flow::FlowField& flow) {
  if (!flow.u.same_shape(flow.v)) throw ShapeError("to_polar: u and v differ in shape");
  PolarField p{Grid(flow.u.rows(), flow.u.cols()), Grid(flow.u.rows(), flow.u.cols())};
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    const double u = flow.u.values()[i], v = flow.v.values()[i];
    const double rho = std::hypot(u, v);
    p.rho.values()[i] = rho;
    // atan2 returns -pi for (-x, -0.0); fold it onto +pi to stay in (-pi, pi].
    double theta = rho < 1e-12 ? 0.0 : std::atan2(v, u);
    if (theta == -std::numbers::pi) theta = std::numbers::pi;
    p.theta.values()[i] = theta;
  }
  return p;
}

void AdmParams::validate() const {
  flow.validate();
  if (grid < 1) throw ConfigError("adm: grid must be >= 1");
}

void AdmParams::validate_for_size(int size) const {
  validate();
  if (size % grid != 0) {
    throw ConfigError("adm: frame size " + std::to_string(size) + " is not divisible by grid " + std::to_string(grid));
  }
}

std::vector<double> block_average(const PolarField& polar, int grid, bool circular_mean) {
  const int rows = polar.rho.rows(), cols = polar.rho.cols();
  if (grid < 1 || rows % grid != 0 || cols % grid != 0) {
    throw ConfigError("block_average: " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " field is not divisible into a " + std::to_string(grid) + "x" + std::to_string(grid) + " grid");
  }
  const int bh = rows / grid, bw = cols / grid;
  const double count = static_cast<double>(bh) * bw;
  std::vector<double> out;
  out.reserve(2 * grid * grid);
  for (int br = 0; br < grid; ++br)
    for (int bc = 0; bc < grid; ++bc) {
      double rho = 0, theta = 0, s = 0, c = 0;
      for (int r = br * bh; r < (br + 1) * bh; ++r)
        for (int k = bc * bw; k < (bc + 1) * bw; ++k) {
          rho += polar.rho(r, k);
          theta += polar.theta(r, k);
          s += std::sin(polar.theta(r, k));
          c += std::cos(polar.theta(r, k));
        }
      out.push_back(rho / count);
      if (!circular_mean) {
        out.push_back(theta / count);
      } else {
        double a = std::hypot(s, c) < 1e-12 ? 0.0 : std::atan2(s, c);
        if (a == -std::numbers::pi) a = std::numbers::pi;
        out.push_back(a);
      }
    }
  return out;
}

Grid extract_adm(const pre::FrameWindow& window, const AdmParams& params) {
  params.validate();
  const auto& frames = window.frames;
  if (frames.size() < 2) throw ShapeError("extract_adm: window needs at least 2 frames");
  const int width = 2 * params.grid * params.grid;
  Grid out(static_cast<int>(frames.size()) - 1, width);
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
    const auto flow = flow::estimate_flow(frames[t], frames[t + 1], params.flow);
    const auto row = block_average(to_polar(flow), params.grid, params.circular_mean);
    for (int j = 0; j < width; ++j) out(static_cast<int>(t), j) = row[j];
  }
  return out;
}

Grid extract_clip_adm(const data::Clip& clip, int size, const AdmParams& params, int half_width) {
  params.validate_for_size(size);
  return extract_adm(pre::window_for_clip(clip, size, half_width), params);
}

std::vector<Grid> extract_all(const std::vector<data::Clip>& clips, int size, const AdmParams& params, int jobs,
                              int half_width) {
  params.validate_for_size(size);
  std::vector<Grid> out(clips.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < clips.size(); i = next++) {
      try {
        out[i] = extract_clip_adm(clips[i], size, params, half_width);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(clips.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace atnet::adm
