#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rhinonav/localization/belief_grid.hpp"
#include "rhinonav/localization/odometry.hpp"
#include "rhinonav/perception/likelihood_field.hpp"

namespace rhinonav {

inline BeliefGrid init_uniform(const GridMap& map, const BeliefShape& shape) {
  BeliefGrid b(map, shape);
  const std::size_t live = b.live_spatial_count();
  if (live == 0) {
    throw Error(ErrorCode::no_free_cells, "no free belief cells");
  }
  const double w = 1.0 / (static_cast<double>(live) * shape.ntheta);
  auto weights = b.mutable_weights();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = b.is_live_index(i) ? w : 0.0;
  }
  return b;
}

// nx, ny must divide the map into square cells of an integer number of map cells.
inline BeliefGrid init_uniform(const GridMap& map, int nx, int ny, int ntheta) {
  if (nx < 1 || ny < 1 || ntheta < 1 || map.width() % nx != 0 || map.height() % ny != 0 ||
      map.width() / nx != map.height() / ny) {
    throw Error(ErrorCode::invalid_argument,
                "belief grid must coarsen the map by one integer factor");
  }
  return init_uniform(map, BeliefShape{nx, ny, ntheta, map.width() / nx});
}

// ---------------------------------------------------------------------------
// Prediction

struct KernelTap {
  double offset;
  double weight;
};

inline constexpr int kMaxKernelHalfWidth = 4;
// Continuous cell coordinates this close to an integer are treated as exact.
inline constexpr double kSnapTolerance = 1e-12;

// Gaussian sampled at multiples of `base_step` (widened so at most
// kMaxKernelHalfWidth taps lie on each side), truncated at 3 sigma and
// normalized. A zero sigma yields the single tap {0, 1}.
inline std::vector<KernelTap> motion_kernel_1d(double sigma, double base_step) {
  if (!(sigma > 0.0)) {
    return {{0.0, 1.0}};
  }
  const double reach = 3.0 * sigma;
  const double step = std::max(base_step, reach / kMaxKernelHalfWidth);
  const int half = static_cast<int>(std::floor(reach / step + 1e-9));
  std::vector<KernelTap> taps;
  double total = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double off = k * step;
    const double u = off / sigma;
    const double w = std::exp(-0.5 * u * u);
    taps.push_back({off, w});
    total += w;
  }
  for (KernelTap& t : taps) {
    t.weight /= total;
  }
  return taps;
}

inline double snap_coordinate(double u) {
  const double r = std::round(u);
  return std::abs(u - r) < kSnapTolerance ? r : u;
}

// Pushes every cell's mass through the odometry delta, spreads it over the
// product kernel of the three motion components, and deposits each sample
// pose on the surrounding cell centers with linear weights in x, y and theta.
// Mass landing outside the map or on non-free cells is dropped.
inline BeliefGrid predict(const BeliefGrid& belief, const OdometryDelta& delta,
                          const MotionNoise& noise) {
  noise.validate();
  const MotionStd sd = motion_std(delta, noise);
  const std::vector<KernelTap> k_rot1 = motion_kernel_1d(sd.rot1, 0.5 * belief.theta_resolution());
  const std::vector<KernelTap> k_trans = motion_kernel_1d(sd.trans, 0.5 * belief.xy_resolution());
  const std::vector<KernelTap> k_rot2 = motion_kernel_1d(sd.rot2, 0.5 * belief.theta_resolution());
  if (delta.is_zero() && k_rot1.size() == 1 && k_trans.size() == 1 && k_rot2.size() == 1) {
    return belief;
  }

  const int nx = belief.nx();
  const int ny = belief.ny();
  const int nth = belief.ntheta();
  const double res = belief.xy_resolution();
  const double tres = belief.theta_resolution();
  const Point2 o = belief.origin();

  struct Sample {
    double dx;
    double dy;
    double bin;  // continuous heading-bin coordinate of the landing pose
    double weight;
  };
  std::vector<std::vector<Sample>> samples(static_cast<std::size_t>(nth));
  for (int k = 0; k < nth; ++k) {
    const double theta = belief.bin_heading(k);
    auto& out = samples[static_cast<std::size_t>(k)];
    for (const KernelTap& a : k_rot1) {
      const double heading = theta + (delta.rot1 + a.offset);
      const double c = std::cos(heading);
      const double s = std::sin(heading);
      for (const KernelTap& b : k_trans) {
        const double t = delta.trans + b.offset;
        for (const KernelTap& e : k_rot2) {
          const double final_heading = normalize_angle(heading + (delta.rot2 + e.offset));
          out.push_back({t * c, t * s, snap_coordinate(final_heading / tres),
                         a.weight * b.weight * e.weight});
        }
      }
    }
  }

  BeliefGrid next = belief;
  std::span<double> dst = next.mutable_weights();
  std::fill(dst.begin(), dst.end(), 0.0);
  std::span<const double> src = belief.weights();

  for (int by = 0; by < ny; ++by) {
    for (int bx = 0; bx < nx; ++bx) {
      if (!belief.is_live(bx, by)) {
        continue;
      }
      const Point2 center = belief.cell_center(bx, by);
      for (int k = 0; k < nth; ++k) {
        const double w_src = src[belief.index(bx, by, k)];
        if (w_src == 0.0) {
          continue;
        }
        for (const Sample& s : samples[static_cast<std::size_t>(k)]) {
          const double u = snap_coordinate((center.x + s.dx - o.x) / res - 0.5);
          const double v = snap_coordinate((center.y + s.dy - o.y) / res - 0.5);
          const double iu = std::floor(u);
          const double iv = std::floor(v);
          const double ik = std::floor(s.bin);
          const double fu = u - iu;
          const double fv = v - iv;
          const double fk = s.bin - ik;
          const double w = w_src * s.weight;
          for (int cy = 0; cy < 2; ++cy) {
            const double wy = cy == 0 ? 1.0 - fv : fv;
            const double ty = iv + cy;
            if (wy == 0.0 || ty < 0.0 || ty >= ny) {
              continue;
            }
            for (int cx = 0; cx < 2; ++cx) {
              const double wx = cx == 0 ? 1.0 - fu : fu;
              const double tx = iu + cx;
              if (wx == 0.0 || tx < 0.0 || tx >= nx) {
                continue;
              }
              const int txi = static_cast<int>(tx);
              const int tyi = static_cast<int>(ty);
              if (!belief.is_live(txi, tyi)) {
                continue;
              }
              for (int ck = 0; ck < 2; ++ck) {
                const double wk = ck == 0 ? 1.0 - fk : fk;
                if (wk == 0.0) {
                  continue;
                }
                const long kk = (static_cast<long>(ik) + ck) % nth;
                const int tk = static_cast<int>(kk < 0 ? kk + nth : kk);
                dst[next.index(txi, tyi, tk)] += w * (wx * wy * wk);
              }
            }
          }
        }
      }
    }
  }

  double total = 0.0;
  for (double w : dst) {
    total += w;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::belief_annihilated, "belief annihilated");
  }
  for (double& w : dst) {
    w /= total;
  }
  return next;
}

// ---------------------------------------------------------------------------
// Correction

// Evaluates scan_log_likelihood for many hypotheses using a per-cell table of
// beam log weights. Results are bit-identical to scan_log_likelihood: the same
// endpoint arithmetic, cell lookup and summation order are used.
class ScanScorer {
 public:
  ScanScorer(const LikelihoodField& field, const LaserScan& scan) : field_(field) {
    const SensorModelConfig& cfg = field.config();
    const double max_range = scan.config.max_range;
    table_.reserve(field.distances().size());
    for (double d : field.distances()) {
      table_.push_back(beam_log_weight(d, cfg, max_range));
    }
    outside_ = beam_log_weight(field.max_distance(), cfg, max_range);
    max_log_ = max_range_log_weight(cfg);
    for (std::size_t i = 0; i < scan.ranges.size(); i += static_cast<std::size_t>(cfg.beam_stride)) {
      const double r = scan.ranges[i];
      beams_.push_back({r, scan.config.beam_offset(static_cast<int>(i)), r >= max_range});
    }
  }

  // Per-heading precomputation of r*cos(theta + offset), r*sin(theta + offset).
  struct Projected {
    std::vector<double> ex;
    std::vector<double> ey;
  };
  Projected project(double theta) const {
    Projected p;
    p.ex.reserve(beams_.size());
    p.ey.reserve(beams_.size());
    for (const Beam& b : beams_) {
      const double a = theta + b.offset;
      p.ex.push_back(b.max ? 0.0 : b.range * std::cos(a));
      p.ey.push_back(b.max ? 0.0 : b.range * std::sin(a));
    }
    return p;
  }

  double score(double x, double y, const Projected& p) const {
    double ll = 0.0;
    for (std::size_t j = 0; j < beams_.size(); ++j) {
      if (beams_[j].max) {
        ll += max_log_;
        continue;
      }
      const long c = field_.cell_index({x + p.ex[j], y + p.ey[j]});
      ll += c < 0 ? outside_ : table_[static_cast<std::size_t>(c)];
    }
    return ll;
  }

  double score(const Pose& pose) const { return score(pose.x, pose.y, project(pose.theta)); }

 private:
  struct Beam {
    double range;
    double offset;
    bool max;
  };
  const LikelihoodField& field_;
  std::vector<double> table_;
  double outside_ = 0.0;
  double max_log_ = 0.0;
  std::vector<Beam> beams_;
};

// Bayes update with the likelihood-field model at every cell-center pose,
// exponentiated relative to the best log-likelihood.
inline BeliefGrid correct(const BeliefGrid& belief, const LaserScan& scan,
                          const LikelihoodField& field, const GridMap& map) {
  if (map.width() != field.width() || map.height() != field.height()) {
    throw Error(ErrorCode::invalid_argument, "field and map dimensions differ");
  }
  const ScanScorer scorer(field, scan);
  const int nth = belief.ntheta();
  std::vector<ScanScorer::Projected> projected;
  projected.reserve(static_cast<std::size_t>(nth));
  for (int k = 0; k < nth; ++k) {
    projected.push_back(scorer.project(belief.bin_heading(k)));
  }

  std::span<const double> src = belief.weights();
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  std::vector<double> ll(src.size(), lowest);
  double best = lowest;
  for (int by = 0; by < belief.ny(); ++by) {
    for (int bx = 0; bx < belief.nx(); ++bx) {
      if (!belief.is_live(bx, by)) {
        continue;
      }
      const Point2 c = belief.cell_center(bx, by);
      for (int k = 0; k < nth; ++k) {
        const std::size_t i = belief.index(bx, by, k);
        if (src[i] == 0.0) {
          continue;
        }
        ll[i] = scorer.score(c.x, c.y, projected[static_cast<std::size_t>(k)]);
        best = std::max(best, ll[i]);
      }
    }
  }

  BeliefGrid next = belief;
  std::span<double> dst = next.mutable_weights();
  double total = 0.0;
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = src[i] == 0.0 ? 0.0 : src[i] * std::exp(ll[i] - best);
    total += dst[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::measurement_annihilated, "measurement annihilated belief");
  }
  for (double& w : dst) {
    w /= total;
  }
  return next;
}

// Weights this small carry no information but, once they drift into the
// subnormal range, make every later update orders of magnitude slower.
inline constexpr double kNegligibleWeight = 1e-200;

// Zeroes negligible weights in place; returns how many were dropped. The
// removed mass is below size * floor, so the belief stays normalized well
// within any practical tolerance.
inline std::size_t drop_negligible(BeliefGrid& belief, double floor = kNegligibleWeight) {
  std::size_t dropped = 0;
  for (double& w : belief.mutable_weights()) {
    if (w != 0.0 && w < floor) {
      w = 0.0;
      ++dropped;
    }
  }
  return dropped;
}

// ---------------------------------------------------------------------------
// Estimation

struct PoseEstimate {
  Pose pose;
  double confidence = 0.0;
  double entropy = 0.0;
  std::size_t cell = 0;
};

inline double entropy(const BeliefGrid& belief) {
  double h = 0.0;
  for (double w : belief.weights()) {
    if (w > 0.0) {
      h -= w * std::log(w);
    }
  }
  return std::max(h, 0.0);
}

// Argmax cell center; the lowest linear index wins ties.
inline PoseEstimate estimate(const BeliefGrid& belief) {
  std::span<const double> w = belief.weights();
  std::size_t best = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] > w[best]) {
      best = i;
    }
  }
  return {belief.cell_pose(best), w.empty() ? 0.0 : w[best], entropy(belief), best};
}

// Sub-cell pose: the weighted mean over the 3x3x3 block of cells around the
// argmax (headings wrap). Smooths out the jumps of the cell-center estimate,
// which matters to a controller running at a fraction of a cell per tick.
inline Pose refine_estimate(const BeliefGrid& belief, const PoseEstimate& est) {
  const auto c = belief.cell_of(est.cell);
  const std::span<const double> w = belief.weights();
  double sw = 0.0, sx = 0.0, sy = 0.0, st = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int bx = c.bx + dx;
      const int by = c.by + dy;
      if (bx < 0 || by < 0 || bx >= belief.nx() || by >= belief.ny()) {
        continue;
      }
      for (int dk = -1; dk <= 1; ++dk) {
        const int k = (c.k + dk + belief.ntheta()) % belief.ntheta();
        const double wi = w[belief.index(bx, by, k)];
        sw += wi;
        sx += wi * dx;
        sy += wi * dy;
        st += wi * dk;
      }
    }
  }
  if (!(sw > 0.0)) {
    return est.pose;
  }
  const double r = belief.xy_resolution();
  return Pose(est.pose.x + r * sx / sw, est.pose.y + r * sy / sw,
              normalize_angle(est.pose.theta + belief.theta_resolution() * st / sw));
}

inline bool is_converged(const BeliefGrid& belief, double confidence_threshold) {
  const auto w = belief.weights();
  const double top = w.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
  return top >= confidence_threshold;
}

}  // namespace rhinonav
