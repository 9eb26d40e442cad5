#pragma once

#include <array>
#include <vector>

#include "atnet/dataset/clip.hpp"

namespace atnet::eval {

/// counts[true][predicted].
struct ConfusionMatrix {
  std::array<std::array<long, data::kNumClasses>, data::kNumClasses> counts{};

  long tp(int c) const { return counts[c][c]; }
  long fp(int c) const;
  long fn(int c) const;
  /// Samples whose true class is c.
  long support(int c) const;
  long total() const;
  long correct() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(const std::vector<data::Class3>& predictions, const std::vector<data::Class3>& labels);

/// Mean over classes of 2TP / (2TP + FP + FN); a class with no true
/// positives, false positives or false negatives contributes 0.
double uf1(const ConfusionMatrix& cm);
/// Mean recall over classes that have at least one true sample. Throws
/// for an empty matrix.
double uar(const ConfusionMatrix& cm);
/// correct / total; throws for an empty matrix.
double accuracy(const ConfusionMatrix& cm);

}  // namespace atnet::eval
