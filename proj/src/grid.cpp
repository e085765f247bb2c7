#include "dirmap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dirmap {

void GridSpec::validate() const {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) ||
      !std::isfinite(y_max)) {
    throw std::domain_error("grid: bounds must be finite");
  }
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw std::domain_error("grid: max bounds must exceed min bounds");
  }
  if (n_cols == 0 || n_rows == 0) {
    throw std::domain_error("grid: n_cols and n_rows must be at least 1");
  }
}

namespace {

std::optional<std::size_t> axis_index(double v, double lo, double hi, std::size_t n) {
  if (!(v >= lo && v <= hi)) {
    return std::nullopt;
  }
  const double width = (hi - lo) / static_cast<double>(n);
  const double k = std::floor((v - lo) / width);
  return std::min(static_cast<std::size_t>(std::max(k, 0.0)), n - 1);
}

}  // namespace

std::optional<CellIndex> cell_of(const GridSpec& spec, double x, double y) {
  const auto col = axis_index(x, spec.x_min, spec.x_max, spec.n_cols);
  const auto row = axis_index(y, spec.y_min, spec.y_max, spec.n_rows);
  if (!col || !row) {
    return std::nullopt;
  }
  return CellIndex{*col, *row};
}

}  // namespace dirmap
