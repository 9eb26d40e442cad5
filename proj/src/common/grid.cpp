#include "atnet/common/grid.hpp"

#include <algorithm>

#include "atnet/common/error.hpp"

namespace atnet {

Grid::Grid(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw ShapeError("grid dimensions must be non-negative");
}

Grid::Grid(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows < 0 || cols < 0 || data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("grid value count does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

double Grid::clamped(int r, int c) const {
  r = std::clamp(r, 0, rows_ - 1);
  c = std::clamp(c, 0, cols_ - 1);
  return (*this)(r, c);
}

}  // namespace atnet
