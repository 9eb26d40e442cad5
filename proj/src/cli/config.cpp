#include "atnet/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "atnet/common/error.hpp"

namespace atnet::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("config: unknown key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

}  // namespace

void RunConfig::apply_paper_scale() {
  const auto dropout = model.dropout_p;
  model = model::ModelConfig::paper_scale();
  model.dropout_p = dropout;
  frame_size = 224;
  train.augment = pre::AugmentParams::for_size(frame_size);
}

void RunConfig::finalize() {
  if (frame_size < 1) throw ConfigError("config: frame_size must be >= 1");
  if (half_width < 1) throw ConfigError("config: half_width must be >= 1");
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
  if (streams.empty()) throw ConfigError("config: at least one stream is required");
  model.spatial.input_size = frame_size;
  model.temporal.steps = 2 * half_width;
  model.temporal.input_dim = 2 * adm.grid * adm.grid;
  synth.frame_size = frame_size;
  train.seed = seed;
  model.validate();
  train.validate();
  adm.validate_for_size(frame_size);
  synth.validate();
  if (synth.min_frames < 2 * half_width + 1) {
    throw ConfigError("config: synthetic clips must have at least " + std::to_string(2 * half_width + 1) + " frames");
  }
}

void apply_config_json(RunConfig& c, const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  check_keys(root, "", {"seed", "jobs", "protocol", "streams", "frame_size", "half_width", "paper_scale", "model",
                        "train", "flow", "adm", "synth"});
  bool paper = false;
  read(root, "paper_scale", paper);
  if (paper) c.apply_paper_scale();
  read(root, "seed", c.seed);
  read(root, "jobs", c.jobs);
  if (root.contains("frame_size")) {
    read(root, "frame_size", c.frame_size);
    c.train.augment.max_shift_px = pre::AugmentParams::for_size(c.frame_size).max_shift_px;
  }
  read(root, "half_width", c.half_width);
  if (root.contains("protocol")) c.protocol = eval::parse_protocol(root["protocol"].get<std::string>());
  if (root.contains("streams")) {
    c.streams.clear();
    for (const auto& s : root["streams"]) c.streams.push_back(model::parse_stream_mode(s.get<std::string>()));
  }

  if (root.contains("model")) {
    const auto& m = root["model"];
    check_keys(m, "model", {"embed_dim", "dropout", "bn_momentum", "spatial", "temporal"});
    read(m, "embed_dim", c.model.embed_dim);
    read(m, "dropout", c.model.dropout_p);
    read(m, "bn_momentum", c.model.bn_momentum);
    if (m.contains("spatial")) {
      const auto& s = m["spatial"];
      check_keys(s, "model.spatial", {"stem_kernel", "stem_stride", "widths", "strides", "blocks_per_stage"});
      read(s, "stem_kernel", c.model.spatial.stem_kernel);
      read(s, "stem_stride", c.model.spatial.stem_stride);
      read(s, "widths", c.model.spatial.widths);
      read(s, "strides", c.model.spatial.strides);
      read(s, "blocks_per_stage", c.model.spatial.blocks_per_stage);
    }
    if (m.contains("temporal")) {
      const auto& t = m["temporal"];
      check_keys(t, "model.temporal", {"layers", "hidden"});
      read(t, "layers", c.model.temporal.layers);
      read(t, "hidden", c.model.temporal.hidden);
    }
  }
  if (root.contains("train")) {
    const auto& t = root["train"];
    check_keys(t, "train", {"initial_lr", "lr_decay", "decay_every", "epochs", "momentum", "weight_decay",
                            "batch_size", "augment"});
    read(t, "initial_lr", c.train.initial_lr);
    read(t, "lr_decay", c.train.lr_decay);
    read(t, "decay_every", c.train.decay_every);
    read(t, "epochs", c.train.epochs);
    read(t, "momentum", c.train.momentum);
    read(t, "weight_decay", c.train.weight_decay);
    read(t, "batch_size", c.train.batch_size);
    if (t.contains("augment")) {
      const auto& a = t["augment"];
      check_keys(a, "train.augment", {"max_rotation_deg", "max_shift_px", "apply_probability"});
      read(a, "max_rotation_deg", c.train.augment.max_rotation_deg);
      read(a, "max_shift_px", c.train.augment.max_shift_px);
      read(a, "apply_probability", c.train.augment.apply_probability);
    }
  }
  if (root.contains("flow")) {
    const auto& f = root["flow"];
    check_keys(f, "flow", {"alpha", "iterations"});
    read(f, "alpha", c.adm.flow.alpha);
    read(f, "iterations", c.adm.flow.iterations);
  }
  if (root.contains("adm")) {
    const auto& a = root["adm"];
    check_keys(a, "adm", {"grid", "circular_mean"});
    read(a, "grid", c.adm.grid);
    read(a, "circular_mean", c.adm.circular_mean);
  }
  if (root.contains("synth")) {
    const auto& s = root["synth"];
    check_keys(s, "synth", {"subjects", "clips_per_subject", "min_frames", "max_frames", "pseudo_datasets",
                            "peak_speed", "motion_width", "pattern_amplitude"});
    read(s, "subjects", c.synth.subjects);
    read(s, "clips_per_subject", c.synth.clips_per_subject);
    read(s, "min_frames", c.synth.min_frames);
    read(s, "max_frames", c.synth.max_frames);
    read(s, "pseudo_datasets", c.synth.pseudo_datasets);
    read(s, "peak_speed", c.synth.peak_speed);
    read(s, "motion_width", c.synth.motion_width);
    read(s, "pattern_amplitude", c.synth.pattern_amplitude);
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_json(config, ss.str());
}

std::string config_to_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["protocol"] = eval::to_string(c.protocol);
  ordered_json streams = ordered_json::array();
  for (auto s : c.streams) streams.push_back(model::to_string(s));
  j["streams"] = streams;
  j["frame_size"] = c.frame_size;
  j["half_width"] = c.half_width;
  j["model"] = {{"embed_dim", c.model.embed_dim},
                {"dropout", c.model.dropout_p},
                {"bn_momentum", c.model.bn_momentum},
                {"spatial",
                 {{"stem_kernel", c.model.spatial.stem_kernel},
                  {"stem_stride", c.model.spatial.stem_stride},
                  {"widths", c.model.spatial.widths},
                  {"strides", c.model.spatial.strides},
                  {"blocks_per_stage", c.model.spatial.blocks_per_stage}}},
                {"temporal", {{"layers", c.model.temporal.layers}, {"hidden", c.model.temporal.hidden}}}};
  j["train"] = {{"initial_lr", c.train.initial_lr},
                {"lr_decay", c.train.lr_decay},
                {"decay_every", c.train.decay_every},
                {"epochs", c.train.epochs},
                {"momentum", c.train.momentum},
                {"weight_decay", c.train.weight_decay},
                {"batch_size", c.train.batch_size},
                {"augment",
                 {{"max_rotation_deg", c.train.augment.max_rotation_deg},
                  {"max_shift_px", c.train.augment.max_shift_px},
                  {"apply_probability", c.train.augment.apply_probability}}}};
  j["flow"] = {{"alpha", c.adm.flow.alpha}, {"iterations", c.adm.flow.iterations}};
  j["adm"] = {{"grid", c.adm.grid}, {"circular_mean", c.adm.circular_mean}};
  j["synth"] = {{"subjects", c.synth.subjects},
                {"clips_per_subject", c.synth.clips_per_subject},
                {"min_frames", c.synth.min_frames},
                {"max_frames", c.synth.max_frames},
                {"pseudo_datasets", c.synth.pseudo_datasets},
                {"peak_speed", c.synth.peak_speed},
                {"motion_width", c.synth.motion_width},
                {"pattern_amplitude", c.synth.pattern_amplitude}};
  return j.dump(2) + "\n";
}

}  // namespace atnet::cli
