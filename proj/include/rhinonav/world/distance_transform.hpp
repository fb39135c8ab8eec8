#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "rhinonav/world/grid_map.hpp"

namespace rhinonav {

namespace detail {

// Lower envelope of parabolas (q - p)^2 + f[p]. Entries of f equal to +inf are
// skipped rather than inserted, which keeps every envelope value an exact sum of
// integers when the finite inputs are integers.
inline void squared_distance_1d(const std::vector<double>& f, std::vector<double>& out,
                                std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(f.size());
  v.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n) + 1);
  out.assign(static_cast<std::size_t>(n), inf);

  int k = -1;
  for (int q = 0; q < n; ++q) {
    const double fq = f[static_cast<std::size_t>(q)];
    if (fq == inf) {
      continue;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[static_cast<std::size_t>(k)];
      const double fp = f[static_cast<std::size_t>(p)];
      s = ((fq + static_cast<double>(q) * q) - (fp + static_cast<double>(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;  // z[0] is -inf, so k never drops below 0 here
        continue;
      }
      break;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = inf;
  }
  if (k < 0) {
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < q) {
      ++k;
    }
    const int p = v[static_cast<std::size_t>(k)];
    const double dq = q - p;
    out[static_cast<std::size_t>(q)] = dq * dq + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace detail

// Exact squared Euclidean distance, in cell units, from every cell center to
// the nearest cell center for which `is_source` holds. Cells with no source
// anywhere get +inf. Separable two-pass lower-envelope algorithm.
template <typename Pred>
std::vector<double> squared_distance_transform(const GridMap& map, Pred is_source) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int w = map.width();
  const int h = map.height();
  std::vector<double> grid(map.size(), inf);

  std::vector<double> f;
  std::vector<double> out;
  std::vector<int> v;
  std::vector<double> z;

  f.resize(static_cast<std::size_t>(h));
  for (int ix = 0; ix < w; ++ix) {
    for (int iy = 0; iy < h; ++iy) {
      f[static_cast<std::size_t>(iy)] = is_source(map.at(ix, iy)) ? 0.0 : inf;
    }
    detail::squared_distance_1d(f, out, v, z);
    for (int iy = 0; iy < h; ++iy) {
      grid[map.index(ix, iy)] = out[static_cast<std::size_t>(iy)];
    }
  }

  f.resize(static_cast<std::size_t>(w));
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      f[static_cast<std::size_t>(ix)] = grid[map.index(ix, iy)];
    }
    detail::squared_distance_1d(f, out, v, z);
    for (int ix = 0; ix < w; ++ix) {
      grid[map.index(ix, iy)] = out[static_cast<std::size_t>(ix)];
    }
  }
  return grid;
}

}  // namespace rhinonav
