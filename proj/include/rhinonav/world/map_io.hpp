#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rhinonav/util/error.hpp"
#include "rhinonav/util/text.hpp"
#include "rhinonav/world/grid_map.hpp"

namespace rhinonav {

// Map file layout:
//
//   resolution: <meters per cell>
//   origin: <x> <y>
//   <blank line>
//   H rows of W characters, '#' occupied, '.' free, '?' unknown
//
// The first body row is the highest-y row of the grid.
inline GridMap load_map(std::string_view text) {
  const std::vector<std::string_view> lines = split_lines(text);

  std::optional<double> resolution;
  std::optional<Point2> origin;
  std::size_t i = 0;
  for (; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    const std::size_t lineno = i + 1;
    if (line.empty()) {
      ++i;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(lineno, "malformed header line, expected 'key: value'");
    }
    const std::string_view key = trim(line.substr(0, colon));
    const std::vector<double> values = parse_doubles(trim(line.substr(colon + 1)), lineno);
    if (key == "resolution") {
      if (values.size() != 1) {
        throw ParseError(lineno, "resolution takes one value");
      }
      if (!(values[0] > 0.0)) {
        throw ParseError(lineno, "resolution must be positive");
      }
      resolution = values[0];
    } else if (key == "origin") {
      if (values.size() != 2) {
        throw ParseError(lineno, "origin takes two values");
      }
      origin = Point2{values[0], values[1]};
    } else {
      throw ParseError(lineno, "unknown header key '" + std::string(key) + "'");
    }
  }
  if (!resolution) {
    throw ParseError(0, "missing header 'resolution'");
  }
  if (!origin) {
    throw ParseError(0, "missing header 'origin'");
  }

  // Trailing empty lines are tolerated; interior ones are ragged rows.
  std::size_t end = lines.size();
  while (end > i && lines[end - 1].empty()) {
    --end;
  }
  if (end <= i) {
    throw ParseError(0, "no rows");
  }

  const std::size_t first_row_line = i;
  const int height = static_cast<int>(end - i);
  const int width = static_cast<int>(lines[i].size());
  if (width == 0) {
    throw ParseError(first_row_line + 1, "no rows");
  }
  std::vector<CellState> cells(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) {
    const std::size_t lineno = first_row_line + static_cast<std::size_t>(r) + 1;
    const std::string_view row = lines[first_row_line + static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != width) {
      throw ParseError(lineno, "ragged row: expected " + std::to_string(width) +
                                   " characters, got " + std::to_string(row.size()));
    }
    const int iy = height - 1 - r;
    for (int ix = 0; ix < width; ++ix) {
      CellState s;
      switch (row[static_cast<std::size_t>(ix)]) {
        case '#': s = CellState::occupied; break;
        case '.': s = CellState::free; break;
        case '?': s = CellState::unknown; break;
        default:
          throw ParseError(lineno, std::string("unknown cell character '") +
                                       row[static_cast<std::size_t>(ix)] + "'");
      }
      cells[static_cast<std::size_t>(iy) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(ix)] = s;
    }
  }
  return GridMap(width, height, *resolution, *origin, std::move(cells));
}

inline char cell_char(CellState s) {
  switch (s) {
    case CellState::free: return '.';
    case CellState::occupied: return '#';
    case CellState::unknown: return '?';
  }
  return '?';
}

inline std::string format_map(const GridMap& map) {
  std::ostringstream out;
  out.precision(17);
  out << "resolution: " << map.resolution() << "\n";
  out << "origin: " << map.origin().x << " " << map.origin().y << "\n\n";
  for (int iy = map.height() - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < map.width(); ++ix) {
      out << cell_char(map.at(ix, iy));
    }
    out << "\n";
  }
  return out.str();
}

inline GridMap load_map_file(const std::filesystem::path& path) {
  return load_map(read_text_file(path));
}

}  // namespace rhinonav
