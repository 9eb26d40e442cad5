#include "atnet/dataset/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "atnet/common/error.hpp"
#include "atnet/common/grid.hpp"
#include "atnet/common/random.hpp"

namespace atnet::data {

namespace {

struct Subject {
  Grid background;
  double anchor_r = 0;
  double anchor_c = 0;
  double scale = 1;
  double amplitude = 1;
};

Grid blur(const Grid& src, double sigma) {
  const int radius = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k(2 * radius + 1);
  double ksum = 0;
  for (int i = -radius; i <= radius; ++i) ksum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& w : k) w /= ksum;

  Grid tmp(src.rows(), src.cols());
  for (int r = 0; r < src.rows(); ++r)
    for (int c = 0; c < src.cols(); ++c) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * src.clamped(r, c + i);
      tmp(r, c) = acc;
    }
  Grid out(src.rows(), src.cols());
  for (int r = 0; r < src.rows(); ++r)
    for (int c = 0; c < src.cols(); ++c) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp.clamped(r + i, c);
      out(r, c) = acc;
    }
  return out;
}

Subject make_subject(const SynthConfig& cfg, Rng& rng) {
  const int n = cfg.frame_size;
  const double unit = n / 32.0;
  Grid noise(n, n);
  for (auto& v : noise.values()) v = standard_normal(rng);
  Grid bg = blur(noise, 2.0 * unit);

  double lo = bg.values()[0], hi = lo;
  for (double v : bg.values()) lo = std::min(lo, v), hi = std::max(hi, v);
  const double base = uniform(rng, 0.35, 0.55);
  const double contrast = uniform(rng, 0.2, 0.35);
  for (auto& v : bg.values()) v = base + contrast * ((v - lo) / (hi - lo + 1e-12) - 0.5);

  // Static dark "eyes" give every subject the same coarse layout.
  const double eye_r = 0.32 * n, eye_sigma = 1.6 * unit;
  for (double eye_c : {0.3 * n, 0.7 * n}) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const double d2 = (r - eye_r) * (r - eye_r) + (c - eye_c) * (c - eye_c);
        bg(r, c) -= 0.18 * std::exp(-0.5 * d2 / (eye_sigma * eye_sigma));
      }
  }

  Subject s;
  s.background = std::move(bg);
  s.anchor_r = 0.66 * n + uniform(rng, -1.5, 1.5) * unit;
  s.anchor_c = 0.5 * n + uniform(rng, -1.5, 1.5) * unit;
  s.scale = uniform(rng, 0.85, 1.15);
  s.amplitude = uniform(rng, 0.8, 1.2);
  return s;
}

// Cumulative displacement of the Gaussian speed profile, zero at the apex.
double displacement(double t, double apex, double peak, double width) {
  return peak * width * std::sqrt(std::numbers::pi) / 2.0 * std::erf((t - apex) / width);
}

Frame render(const Subject& s, Class3 label, double d, double ramp, double amplitude, int n) {
  const double unit = n / 32.0;
  Grid img = s.background;
  double cr = s.anchor_r, cc = s.anchor_c, rx = 9.0, ry = 3.0, amp = amplitude;
  switch (label) {
    case Class3::Positive: cr -= d; break;
    case Class3::Negative: cr += d; amp = -amp; break;
    case Class3::Surprise:
      // tall opening that stretches vertically
      rx = 3.0;
      ry = 5.0 * (1.0 + 0.15 * d);
      break;
  }
  rx *= s.scale * unit;
  ry *= s.scale * unit;
  amp *= s.amplitude * ramp;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double dy = (r - cr) / ry, dx = (c - cc) / rx;
      img(r, c) += amp * std::exp(-0.5 * (dx * dx + dy * dy));
    }

  Frame f;
  f.height = f.width = n;
  f.channels = 1;
  f.pixels.resize(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < f.pixels.size(); ++i) {
    const double v = std::clamp(img.values()[i], 0.0, 1.0);
    f.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return f;
}

std::string pad2(int v) {
  auto s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

void SynthConfig::validate() const {
  if (subjects < 3) throw ConfigError("synth: subjects must be >= 3");
  if (clips_per_subject < 3) throw ConfigError("synth: clips per subject must be >= 3");
  if (frame_size < 8) throw ConfigError("synth: frame size must be >= 8");
  if (min_frames < 65) throw ConfigError("synth: frames per clip must be >= 65 (window length)");
  if (max_frames < min_frames) throw ConfigError("synth: max_frames < min_frames");
  if (pseudo_datasets < 1 || pseudo_datasets > 26) throw ConfigError("synth: pseudo_datasets must be in [1, 26]");
  if (!(peak_speed >= 0) || !(motion_width > 0)) throw ConfigError("synth: bad motion parameters");
  if (!(pattern_amplitude > 0 && pattern_amplitude <= 1)) throw ConfigError("synth: pattern_amplitude must be in (0, 1]");
}

std::string SynthConfig::describe() const {
  std::ostringstream out;
  out << "synth subjects=" << subjects << " clips_per_subject=" << clips_per_subject << " frame_size=" << frame_size
      << " frames=" << min_frames << ".." << max_frames << " pseudo_datasets=" << pseudo_datasets
      << " peak_speed=" << peak_speed << " motion_width=" << motion_width
      << " pattern_amplitude=" << pattern_amplitude;
  return out.str();
}

ClipSet synth_generate(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  ClipSet set;
  set.provenance = config.describe() + " seed=" + std::to_string(seed);

  int global = 0;
  for (int si = 0; si < config.subjects; ++si) {
    Rng subject_rng(derive_seed(seed, static_cast<std::uint64_t>(si)));
    const Subject subject = make_subject(config, subject_rng);
    DatasetId ds{DatasetKind::Synth, config.pseudo_datasets == 1 ? 0 : si % config.pseudo_datasets + 1};

    for (int ci = 0; ci < config.clips_per_subject; ++ci, ++global) {
      Rng rng(derive_seed(seed, 0x10000u + static_cast<std::uint64_t>(global)));
      const auto label = class_from_index(global % kNumClasses);
      const int n = static_cast<int>(uniform_int(rng, config.min_frames, config.max_frames));
      const int apex = n / 2 + static_cast<int>(uniform_int(rng, -3, 3));
      const double speed = config.peak_speed * uniform(rng, 0.85, 1.15);

      Clip clip;
      clip.dataset = ds;
      clip.subject_id = "s" + pad2(si + 1);
      clip.clip_id = clip.subject_id + "_c" + pad2(ci + 1);
      clip.apex_index = apex;
      clip.label = label;
      switch (label) {
        case Class3::Positive: clip.raw_label = "positive"; break;
        case Class3::Negative: clip.raw_label = "negative"; break;
        case Class3::Surprise: clip.raw_label = "surprise"; break;
      }
      for (int t = 0; t < n; ++t) {
        const double d = displacement(t, apex, speed, config.motion_width);
        const double g = std::exp(-std::pow((t - apex) / config.motion_width, 2));
        clip.frames.push_back(render(subject, label, d, 0.7 + 0.3 * g, config.pattern_amplitude, config.frame_size));
      }
      set.clips.push_back(std::move(clip));
    }
  }
  set.validate();
  return set;
}

}  // namespace atnet::data
