#pragma once

#include <cstddef>
#include <optional>

namespace dirmap {

struct CellIndex {
  std::size_t col = 0;
  std::size_t row = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Regular lattice over [x_min, x_max] x [y_min, y_max]. Cells are indexed
/// column-major from (x_min, y_min); the max edges belong to the last cell.
struct GridSpec {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 1.0;
  double y_max = 1.0;
  std::size_t n_cols = 1;
  std::size_t n_rows = 1;

  /// Throws std::domain_error unless the extent is non-empty, finite and both
  /// counts are positive.
  void validate() const;

  [[nodiscard]] double cell_width() const { return (x_max - x_min) / static_cast<double>(n_cols); }
  [[nodiscard]] double cell_height() const { return (y_max - y_min) / static_cast<double>(n_rows); }
  [[nodiscard]] std::size_t cell_count() const { return n_cols * n_rows; }
  [[nodiscard]] std::size_t linear(CellIndex c) const { return c.col * n_rows + c.row; }
  [[nodiscard]] CellIndex unlinear(std::size_t i) const { return {i / n_rows, i % n_rows}; }
  [[nodiscard]] bool contains(CellIndex c) const { return c.col < n_cols && c.row < n_rows; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Containing cell, or nullopt for points outside the extent (or NaN).
std::optional<CellIndex> cell_of(const GridSpec& spec, double x, double y);

}  // namespace dirmap
