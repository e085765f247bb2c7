#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "dirmap/grid_map.hpp"

namespace dirmap {

ParseError::ParseError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? fmt::format("line {}: {}", line, message)
                                       : fmt::format("line {}: field {}: {}", line, field, message)),
      line_(line),
      field_(std::move(field)) {}

void save_map(std::ostream& out, const DirectionalGridMap& map) {
  const GridSpec& g = map.spec();
  out << fmt::format("DGM v1 {} {} {:.17g} {:.17g} {:.17g} {:.17g} {}\n", g.n_cols, g.n_rows, g.x_min,
                     g.y_min, g.x_max, g.y_max, map.mode() == FitMode::vm ? "VM" : "VMM");
  std::size_t count = 0;
  for (const CellModel& cell : map.cells()) {
    if (!cell.observed()) {
      continue;
    }
    out << fmt::format("cell {} {} {} M={}", cell.index.col, cell.index.row, cell.n_obs, cell.mixture->size());
    for (const auto& c : cell.mixture->components()) {
      out << fmt::format(" {:.17g} {:.17g} {:.17g}", c.alpha, c.dist.mu().radians(), c.dist.kappa());
    }
    out << '\n';
    ++count;
  }
  out << "end " << count << '\n';
}

std::string save_map(const DirectionalGridMap& map) {
  std::ostringstream out;
  save_map(out, map);
  return out.str();
}

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : line) {
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '(' || ch == ')') {
      if (!current.empty()) {
        out.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) {
    out.push_back(std::move(current));
  }
  return out;
}

double real_field(std::string_view text, std::size_t line, const std::string& field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParseError(line, field, fmt::format("'{}' is not a finite number", text));
  }
  return v;
}

std::size_t count_field(std::string_view text, std::size_t line, const std::string& field) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(line, field, fmt::format("'{}' is not a non-negative integer", text));
  }
  return v;
}

// Statistics consistent with a stored component: weight alpha * n and a
// resultant of that weight times A(kappa) along mu.
ResultantSums implied_sums(const MixtureComponent& c, std::size_t n_obs) {
  ResultantSums s;
  s.weight = c.alpha * static_cast<double>(n_obs);
  const double r = s.weight * bessel_ratio_a(c.dist.kappa());
  s.sum_cos = r * std::cos(c.dist.mu().radians());
  s.sum_sin = r * std::sin(c.dist.mu().radians());
  return s;
}

}  // namespace

DirectionalGridMap load_map(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](std::vector<std::string>& toks) {
    while (std::getline(in, line)) {
      ++line_no;
      toks = tokens(line);
      if (!toks.empty()) {
        return true;
      }
    }
    return false;
  };

  std::vector<std::string> toks;
  if (!next_line(toks)) {
    throw ParseError(1, "", "empty input, expected a DGM header");
  }
  if (toks[0] != "DGM") {
    throw ParseError(line_no, "magic", "expected 'DGM'");
  }
  if (toks.size() < 2 || toks[1] != "v1") {
    throw ParseError(line_no, "version", toks.size() < 2 ? "missing" : "unsupported version " + toks[1]);
  }
  if (toks.size() != 9) {
    throw ParseError(line_no, "", fmt::format("header needs 9 fields, found {}", toks.size()));
  }
  GridSpec spec;
  spec.n_cols = count_field(toks[2], line_no, "n_cols");
  spec.n_rows = count_field(toks[3], line_no, "n_rows");
  spec.x_min = real_field(toks[4], line_no, "x_min");
  spec.y_min = real_field(toks[5], line_no, "y_min");
  spec.x_max = real_field(toks[6], line_no, "x_max");
  spec.y_max = real_field(toks[7], line_no, "y_max");
  FitMode mode = FitMode::vm;
  if (toks[8] == "VMM") {
    mode = FitMode::vmm;
  } else if (toks[8] != "VM") {
    throw ParseError(line_no, "mode", "expected VM or VMM, found " + toks[8]);
  }
  try {
    spec.validate();
  } catch (const std::domain_error& e) {
    throw ParseError(line_no, "", e.what());
  }

  DirectionalGridMap map(spec, mode);
  std::size_t cell_lines = 0;
  bool ended = false;
  while (next_line(toks)) {
    if (ended) {
      throw ParseError(line_no, "", "content after end marker");
    }
    if (toks[0] == "end") {
      if (toks.size() != 2) {
        throw ParseError(line_no, "", "end marker takes one count");
      }
      if (count_field(toks[1], line_no, "count") != cell_lines) {
        throw ParseError(line_no, "count", fmt::format("declares {} cells, file has {}", toks[1], cell_lines));
      }
      ended = true;
      continue;
    }
    if (toks[0] != "cell") {
      throw ParseError(line_no, "", "expected 'cell' or 'end', found '" + toks[0] + "'");
    }
    if (toks.size() < 5) {
      throw ParseError(line_no, "", "cell line needs col, row, n_obs and M=<m>");
    }
    const CellIndex index{count_field(toks[1], line_no, "col"), count_field(toks[2], line_no, "row")};
    if (!spec.contains(index)) {
      throw ParseError(line_no, "col", fmt::format("cell ({}, {}) outside the grid", index.col, index.row));
    }
    const std::size_t n_obs = count_field(toks[3], line_no, "n_obs");
    if (n_obs == 0) {
      throw ParseError(line_no, "n_obs", "observed cells need n_obs >= 1");
    }
    if (!toks[4].starts_with("M=")) {
      throw ParseError(line_no, "M", "expected M=<m>");
    }
    const std::size_t m = count_field(std::string_view(toks[4]).substr(2), line_no, "M");
    if (m == 0 || (mode == FitMode::vm && m != 1)) {
      throw ParseError(line_no, "M", mode == FitMode::vm ? "VM maps hold exactly one component" : "M must be >= 1");
    }
    if (toks.size() != 5 + 3 * m) {
      throw ParseError(line_no, "", fmt::format("expected {} component values, found {}", 3 * m, toks.size() - 5));
    }
    std::vector<MixtureComponent> comps;
    for (std::size_t k = 0; k < m; ++k) {
      const std::string tag = fmt::format("[{}]", k);
      const double alpha = real_field(toks[5 + 3 * k], line_no, "alpha" + tag);
      const double mu = real_field(toks[6 + 3 * k], line_no, "mu" + tag);
      const double kappa = real_field(toks[7 + 3 * k], line_no, "kappa" + tag);
      try {
        comps.push_back({alpha, VonMises(Angle(mu), kappa)});
      } catch (const std::domain_error& e) {
        throw ParseError(line_no, "kappa" + tag, e.what());
      }
    }
    CellModel& cell = map.cells_[spec.linear(index)];
    if (cell.observed()) {
      throw ParseError(line_no, "col", fmt::format("duplicate cell ({}, {})", index.col, index.row));
    }
    try {
      cell.mixture = VonMisesMixture(std::move(comps));
    } catch (const std::domain_error& e) {
      throw ParseError(line_no, "alpha", e.what());
    }
    cell.n_obs = n_obs;
    for (const auto& c : cell.mixture->components()) {
      cell.stats.push_back(implied_sums(c, n_obs));
    }
    ++cell_lines;
  }
  if (!ended) {
    throw ParseError(line_no + 1, "", "truncated input, missing end marker");
  }
  map.no_observations_ = cell_lines == 0;
  return map;
}

DirectionalGridMap load_map(const std::string& text) {
  std::istringstream in(text);
  return load_map(in);
}

}  // namespace dirmap
