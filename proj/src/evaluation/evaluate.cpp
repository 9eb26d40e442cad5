#include "atnet/evaluation/evaluate.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "atnet/common/error.hpp"

namespace atnet::eval {

Metrics metrics_of(const ConfusionMatrix& cm) {
  Metrics m;
  m.n = cm.total();
  if (m.n == 0) return m;
  m.acc = accuracy(cm);
  m.uf1 = uf1(cm);
  m.uar = uar(cm);
  return m;
}

StreamReport evaluate_with(const std::vector<train::Sample>& samples, const SplitPlan& plan,
                           const FoldPredictor& predictor, int jobs) {
  StreamReport report;
  report.folds.resize(plan.folds.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t f = next++; f < plan.folds.size(); f = next++) {
      try {
        const auto& fold = plan.folds[f];
        std::vector<train::Sample> tr, te;
        for (auto i : fold.train) tr.push_back(samples.at(i));
        for (auto i : fold.test) te.push_back(samples.at(i));
        FoldResult& rec = report.folds[f];
        rec.held_out = fold.held_out;
        rec.train_size = tr.size();
        const auto predicted = predictor(f, tr, te, rec);
        if (predicted.size() != te.size()) throw Error("predictor returned the wrong number of predictions");
        std::vector<data::Class3> labels;
        for (std::size_t k = 0; k < te.size(); ++k) {
          rec.clips.push_back({te[k].key, data::to_string(te[k].dataset), te[k].label, predicted[k]});
          labels.push_back(te[k].label);
        }
        if (!te.empty()) rec.confusion = confusion(predicted, labels);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(plan.folds.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::map<std::string, ConfusionMatrix> per_dataset;
  for (const auto& fold : report.folds) {
    report.pooled += fold.confusion;
    for (const auto& c : fold.clips) {
      ++per_dataset[c.dataset].counts[data::index_of(c.label)][data::index_of(c.predicted)];
    }
  }
  report.per_dataset.assign(per_dataset.begin(), per_dataset.end());
  return report;
}

StreamReport evaluate(const std::vector<train::Sample>& samples, const SplitPlan& plan,
                      const train::TrainConfig& config, const model::ModelConfig& model_config,
                      model::StreamMode mode, int jobs) {
  auto predictor = [&](std::size_t fold, const std::vector<train::Sample>& tr, const std::vector<train::Sample>& te,
                       FoldResult& record) {
    auto cfg = config;
    cfg.seed = config.seed + fold;
    const auto result = train::train(tr, cfg, model_config, mode);
    record.seed = cfg.seed;
    record.params_checksum = result.history.params_checksum;
    std::vector<data::Class3> out;
    for (const auto& p : train::predict_samples(result.params, te, cfg.batch_size)) out.push_back(p.predicted);
    return out;
  };
  auto report = evaluate_with(samples, plan, predictor, jobs);
  report.mode = mode;
  return report;
}

}  // namespace atnet::eval
