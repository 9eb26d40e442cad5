#include "atnet/cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "atnet/adm/feature_cache.hpp"
#include "atnet/cli/config.hpp"
#include "atnet/common/binary_io.hpp"
#include "atnet/common/error.hpp"
#include "atnet/dataset/manifest.hpp"
#include "atnet/evaluation/report.hpp"
#include "atnet/model/checkpoint.hpp"

namespace atnet::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool force = false;
  bool paper_scale = false;
  std::string protocol;
  std::string out = "out";
  std::string manifest;
  std::string checkpoint;
  std::string report;
  std::string stream = "fusion";
  std::vector<std::string> streams;
  bool quiet = false;
};

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.paper_scale) c.apply_paper_scale();
  if (!f.config_path.empty()) apply_config_file(c, f.config_path);
  if (f.paper_scale) c.apply_paper_scale();
  if (f.seed) c.seed = *f.seed;
  if (f.jobs) c.jobs = *f.jobs;
  if (!f.protocol.empty()) c.protocol = eval::parse_protocol(f.protocol);
  if (!f.streams.empty()) {
    c.streams.clear();
    for (const auto& s : f.streams) c.streams.push_back(model::parse_stream_mode(s));
  }
  c.finalize();
  return c;
}

void refuse_existing(const fs::path& p, bool force) {
  if (!force && fs::exists(p)) {
    throw ConfigError(p.string() + " already exists (use --force to overwrite)");
  }
}

fs::path manifest_path(const Flags& f) {
  return f.manifest.empty() ? fs::path(f.out) / "data" / "manifest.csv" : fs::path(f.manifest);
}

fs::path feature_path(const fs::path& dir, const data::Clip& clip) {
  return dir / data::to_string(clip.dataset) / (clip.clip_id + ".admf");
}

void say(const Flags& f, const std::string& line) {
  if (!f.quiet) std::cout << line << "\n";
}

int cmd_synth(const Flags& f) {
  const auto cfg = resolve(f);
  const fs::path dir = fs::path(f.out) / "data";
  refuse_existing(dir / "manifest.csv", f.force);
  if (f.force) fs::remove_all(dir / "frames");
  const auto set = data::synth_generate(cfg.synth, cfg.seed);
  const auto path = data::write_manifest(set, dir);
  say(f, "wrote " + std::to_string(set.size()) + " clips to " + path.string());
  return kOk;
}

int cmd_extract(const Flags& f) {
  const auto cfg = resolve(f);
  const auto manifest = manifest_path(f);
  const fs::path dir = fs::path(f.out) / "features";
  refuse_existing(dir / "index.csv", f.force);
  data::LoadReport load;
  const auto set = data::load_manifest(manifest, &load);
  write_file_atomic(data::load_report_path(manifest), load.to_text());
  const auto features = adm::extract_all(set.clips, cfg.frame_size, cfg.adm, cfg.jobs, cfg.half_width);
  std::ostringstream index;
  index << "dataset,clip,rows,cols,file\n";
  for (std::size_t i = 0; i < set.clips.size(); ++i) {
    const auto& clip = set.clips[i];
    const auto p = feature_path(dir, clip);
    adm::save_feature(p, features[i]);
    index << data::to_string(clip.dataset) << "," << clip.clip_id << "," << features[i].rows() << ","
          << features[i].cols() << "," << fs::relative(p, dir).generic_string() << "\n";
  }
  write_file_atomic(dir / "index.csv", index.str());
  say(f, "extracted " + std::to_string(features.size()) + " feature matrices to " + dir.string() + " (" +
             std::to_string(load.excluded.size()) + " clips excluded)");
  return kOk;
}

struct Loaded {
  std::vector<train::Sample> samples;
  std::string provenance;
};

Loaded load_samples(const Flags& f, const RunConfig& cfg) {
  const auto manifest = manifest_path(f);
  const auto set = data::load_manifest(manifest);
  const fs::path dir = fs::path(f.out) / "features";
  if (!fs::exists(dir / "index.csv")) {
    throw DataError("no feature cache at " + dir.string() + " (run extract first)");
  }
  std::vector<Grid> features;
  features.reserve(set.clips.size());
  for (const auto& clip : set.clips) {
    const auto p = feature_path(dir, clip);
    if (!fs::exists(p)) throw DataError("missing feature file " + p.string());
    auto g = adm::load_feature(p);
    if (g.rows() != cfg.model.temporal.steps || g.cols() != cfg.model.temporal.input_dim) {
      throw DataError("feature " + p.string() + " has the wrong shape for this configuration");
    }
    features.push_back(std::move(g));
  }
  Loaded out;
  out.samples = train::make_samples(set.clips, features, cfg.frame_size);
  out.provenance = manifest.filename().string() + " (" + std::to_string(set.size()) + " clips)";
  return out;
}

int cmd_train(const Flags& f) {
  const auto cfg = resolve(f);
  const auto mode = model::parse_stream_mode(f.stream);
  const fs::path dir = fs::path(f.out) / "model";
  refuse_existing(dir / "checkpoint.atnw", f.force);
  const auto data = load_samples(f, cfg);
  const auto result = train::train(data.samples, cfg.train, cfg.model, mode, [&](const train::EpochStats& e) {
    std::ostringstream line;
    line << "epoch " << e.epoch << " lr " << e.lr << " loss " << e.loss << " acc " << e.accuracy;
    say(f, line.str());
  });
  model::save_checkpoint(dir / "checkpoint.atnw", result.params);
  write_file_atomic(dir / "history.csv", result.history.to_csv());
  write_file_atomic(dir / "config.json", config_to_json(cfg));
  say(f, "wrote " + (dir / "checkpoint.atnw").string());
  return kOk;
}

eval::StreamReport score_checkpoint(const model::ModelParams& params, const std::vector<train::Sample>& samples) {
  eval::SplitPlan plan;
  plan.protocol = eval::Protocol::Cde;
  eval::Fold fold;
  fold.held_out = "checkpoint";
  for (std::size_t i = 0; i < samples.size(); ++i) fold.test.push_back(i);
  plan.folds.push_back(fold);
  auto report = eval::evaluate_with(
      samples, plan,
      [&](std::size_t, const std::vector<train::Sample>&, const std::vector<train::Sample>& test,
          eval::FoldResult& record) {
        record.params_checksum = params.checksum();
        std::vector<data::Class3> out;
        for (const auto& p : train::predict_samples(params, test)) out.push_back(p.predicted);
        return out;
      });
  report.mode = params.mode;
  return report;
}

int cmd_eval(const Flags& f) {
  const auto cfg = resolve(f);
  const fs::path dir = fs::path(f.out) / "eval";
  const std::string stem = f.checkpoint.empty() ? "report_" + eval::to_string(cfg.protocol) : "report_checkpoint";
  refuse_existing(dir / (stem + ".json"), f.force);
  const auto data = load_samples(f, cfg);

  eval::EvalReport report;
  report.provenance = data.provenance;
  if (!f.checkpoint.empty()) {
    const auto params = model::load_checkpoint(f.checkpoint);
    report.protocol = eval::Protocol::Cde;
    report.provenance += ", checkpoint " + fs::path(f.checkpoint).filename().string();
    report.streams.push_back(score_checkpoint(params, data.samples));
  } else {
    report.protocol = cfg.protocol;
    const auto plan = eval::make_splits(data.samples, cfg.protocol);
    for (auto mode : cfg.streams) {
      say(f, "evaluating " + model::to_string(mode) + " over " + std::to_string(plan.folds.size()) + " folds");
      report.streams.push_back(eval::evaluate(data.samples, plan, cfg.train, cfg.model, mode, cfg.jobs));
    }
  }
  const auto table = eval::render_table(report);
  write_file_atomic(dir / (stem + ".json"), eval::report_to_json(report));
  write_file_atomic(dir / (stem + ".txt"), table);
  if (!f.quiet) std::cout << table;
  return kOk;
}

int cmd_report(const Flags& f) {
  std::ifstream in(f.report);
  if (!in) throw DataError("cannot read report " + f.report);
  std::stringstream ss;
  ss << in.rdbuf();
  std::cout << eval::render_table(eval::report_from_json(ss.str()));
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"ATNet micro-expression pipeline", "atnet"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every random stream");
  auto* jobs_opt = app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--force", f.force, "Overwrite existing outputs");
  app.add_flag("--paper-scale", f.paper_scale, "Use the full-size network (224 px, 512-d)");
  app.add_option("--protocol", f.protocol, "Evaluation protocol")->check(CLI::IsMember({"cde", "hde"}));
  app.add_option("--out", f.out, "Output directory")->capture_default_str();
  app.add_flag("--quiet", f.quiet, "Only print errors");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic clip set and manifest");
  auto* extract = app.add_subcommand("extract", "Compute ADM feature caches for a manifest");
  extract->add_option("--manifest", f.manifest, "Manifest CSV (default OUT/data/manifest.csv)");
  auto* trainc = app.add_subcommand("train", "Train one network on every clip");
  trainc->add_option("--manifest", f.manifest, "Manifest CSV (default OUT/data/manifest.csv)");
  trainc->add_option("--stream", f.stream, "fusion, spatial or temporal")->capture_default_str();
  auto* evalc = app.add_subcommand("eval", "Cross-validate, or score a checkpoint");
  evalc->add_option("--manifest", f.manifest, "Manifest CSV (default OUT/data/manifest.csv)");
  evalc->add_option("--checkpoint", f.checkpoint, "Score this checkpoint instead of cross-validating")
      ->check(CLI::ExistingFile);
  evalc->add_option("--streams", f.streams, "Networks to evaluate (fusion, spatial, temporal)")->delimiter(',');
  auto* reportc = app.add_subcommand("report", "Print a stored report as a table");
  reportc->add_option("--report", f.report, "Report JSON")->required()->check(CLI::ExistingFile);

  if (args.empty()) {
    std::cerr << app.help();
    return kUsage;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }
  if (seed_opt->count() > 0) f.seed = seed;
  if (jobs_opt->count() > 0) f.jobs = jobs;

  try {
    if (synth->parsed()) return cmd_synth(f);
    if (extract->parsed()) return cmd_extract(f);
    if (trainc->parsed()) return cmd_train(f);
    if (evalc->parsed()) return cmd_eval(f);
    if (reportc->parsed()) return cmd_report(f);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace atnet::cli
