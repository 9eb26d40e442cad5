#include "atnet/evaluation/metrics.hpp"

#include "atnet/common/error.hpp"

namespace atnet::eval {

namespace {
constexpr int K = data::kNumClasses;
}

long ConfusionMatrix::fp(int c) const {
  long col = 0;
  for (int r = 0; r < K; ++r) col += counts[r][c];
  return col - tp(c);
}

long ConfusionMatrix::fn(int c) const { return support(c) - tp(c); }

long ConfusionMatrix::support(int c) const {
  long row = 0;
  for (int p = 0; p < K; ++p) row += counts[c][p];
  return row;
}

long ConfusionMatrix::total() const {
  long n = 0;
  for (const auto& row : counts)
    for (long v : row) n += v;
  return n;
}

long ConfusionMatrix::correct() const {
  long n = 0;
  for (int c = 0; c < K; ++c) n += tp(c);
  return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (int r = 0; r < K; ++r)
    for (int c = 0; c < K; ++c) counts[r][c] += other.counts[r][c];
  return *this;
}

ConfusionMatrix confusion(const std::vector<data::Class3>& predictions, const std::vector<data::Class3>& labels) {
  if (predictions.size() != labels.size()) {
    throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                    std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw DataError("confusion: no samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) ++cm.counts[data::index_of(labels[i])][data::index_of(predictions[i])];
  return cm;
}

double uf1(const ConfusionMatrix& cm) {
  double sum = 0;
  for (int c = 0; c < K; ++c) {
    const double denom = 2.0 * cm.tp(c) + cm.fp(c) + cm.fn(c);
    if (denom > 0) sum += 2.0 * cm.tp(c) / denom;
  }
  return sum / K;
}

double uar(const ConfusionMatrix& cm) {
  double sum = 0;
  int present = 0;
  for (int c = 0; c < K; ++c) {
    const long n = cm.support(c);
    if (n == 0) continue;
    sum += static_cast<double>(cm.tp(c)) / static_cast<double>(n);
    ++present;
  }
  if (present == 0) throw DataError("uar: empty confusion matrix");
  return sum / present;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("accuracy: empty confusion matrix");
  return static_cast<double>(cm.correct()) / static_cast<double>(cm.total());
}

}  // namespace atnet::eval
