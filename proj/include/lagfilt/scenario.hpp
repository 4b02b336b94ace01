#pragma once

#include "lagfilt/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace lagfilt {

// Seedable generator with a fixed, documented algorithm so streams are
// reproducible across platforms: mt19937_64 words mapped to [0,1) doubles by
// (word >> 11) * 2^-53; normals by Box-Muller on (1 - u1, u2) with the second
// deviate of each pair cached. std::<distribution> adapters are avoided on
// purpose (their output is implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double gauss();    // standard normal

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct ScenarioConfig {
  int frames = 64;
  int width = 128;
  int height = 128;

  bool enable_clutter = true;
  int n_components = 10;
  double f_max = 1.0 / 33.0;        // cycles/pixel
  double clutter_amplitude = 0.1;
  double dc_offset = 1.0;
  double v_clt_min = 0.0, v_clt_max = 1.0;  // px/frame, per axis

  bool enable_target = true;
  double i_max = 1.0;
  double psf_std = 2.0;                       // px
  double v_tgt_min = -1.0, v_tgt_max = 0.0;   // px/frame, per axis
  double final_x = 64.0, final_y = 64.0;      // plus a [0,1)^2 subpixel offset

  double sigma_eps = 0.5;
  std::uint64_t seed = 1;
};

struct ClutterComponent {
  double fx = 0.0, fy = 0.0;  // cycles/pixel
  double phase = 0.0;
  double amplitude = 0.0;
};

struct GroundTruth {
  std::vector<std::array<double, 2>> centers;  // per frame (cx, cy), real px
  double vx_tgt = 0.0, vy_tgt = 0.0;
  double vx_clt = 0.0, vy_clt = 0.0;
  std::vector<ClutterComponent> components;
  double psf_std = 0.0;
  double i_max = 0.0;
};

// Draw order per seed: component (frequency magnitude, orientation, phase)
// triples in index order, then v_clt (x, y), then v_tgt (x, y), then the
// subpixel offset (x, y), then per-frame noise in row-major pixel order.
// Disabled blocks consume no draws; sigma_eps = 0 skips the noise draws.
std::pair<std::vector<ArrayXXd>, GroundTruth> generate(const ScenarioConfig& cfg);

// Temporal frequency of a spatial component translating at (v_x, v_y).
double clutter_tilt(double v_x, double v_y, double f_x, double f_y);

// Peak-above-background over the robust std of the interior background.
// The peak is the maximum over a ceil(5 psf_std) square centered on the true
// target cell (the same square is excluded from the background statistics);
// the square collapses to the single cell for point targets. 20 log10 of the
// ratio, clamped to [-99, 99] dB. Amplitude convention: callers scoring a
// power map should pass its square root. Empty when the target sits inside
// the cropped margin.
std::optional<double> measure_snr(const ArrayXXd& frame, const GroundTruth& truth,
                                  long frame_index, int crop_margin);

struct MatchedFilterOutput {
  long index = 0;  // aligned frame index (center of the 9-frame window)
  ArrayXXd power;
  Eigen::ArrayXXi winner;  // per-pixel index into the velocity list
};

// Direct 3-D correlation of the stream with 9x9x9 translated-Gaussian
// kernels, one per velocity hypothesis, each scaled to unit energy. Output
// lags the input by 4 frames.
class MatchedFilterBank {
 public:
  MatchedFilterBank(std::vector<std::array<double, 2>> velocities, double psf_std);

  std::optional<MatchedFilterOutput> push(const ArrayXXd& frame);

  const std::vector<std::array<double, 2>>& velocities() const { return velocities_; }

 private:
  std::vector<std::array<double, 2>> velocities_;
  std::vector<std::array<ArrayXd, 9>> gx_, gy_;  // per velocity, per time slice
  std::vector<double> norm_;
  std::vector<ArrayXXd> ring_;
  long n_ = 0;
};

std::vector<MatchedFilterOutput> matched_filter_bank(
    const std::vector<ArrayXXd>& stream, const std::vector<std::array<double, 2>>& velocities,
    double psf_std);

}  // namespace lagfilt
