#pragma once

#include "lagfilt/types.hpp"

#include <deque>
#include <optional>
#include <vector>

namespace lagfilt {

enum class FrameRole { J, Ihat, Ieps, Phat };

struct FrameVolume {
  ArrayXXd values;  // (rows, cols) = (y, x)
  long frame_index = 0;
  FrameRole role = FrameRole::J;

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
};

// Direct-form-I recursion state: most recent value first, zero-initialized.
struct FilterState {
  VectorXd x_hist;
  VectorXd y_hist;

  static FilterState zeros(const LdeCoeffs& coeffs);
};

// y(n) = sum_m b_m x(n-m) - sum_m a_m y(n-m), streaming; passing the same
// state across chunk boundaries is bit-exact against one-shot filtering.
ArrayXd filter_1d(const LdeCoeffs& coeffs, const ArrayXd& x, FilterState* state = nullptr);

// Finite-extent two-sided filtering: forward pass plus time-reversed backward
// pass, both from zero initial state (zero-padding boundary semantics).
ArrayXd filter_1d_noncausal(const RealizedFilter& pair, const ArrayXd& x);

// Two-sided filtering along image rows (x direction) / columns (y direction).
// Threads partition rows; every pixel's recursion is independent, so results
// are bit-identical for any thread count.
ArrayXXd filter_image_x(const ArrayXXd& img, const RealizedFilter& pair, int nthreads = 1);
ArrayXXd filter_image_y(const ArrayXXd& img, const RealizedFilter& pair, int nthreads = 1);

// Separable application: rows first, then columns (the order commutes).
ArrayXXd filter_frame_spatial(const ArrayXXd& img, const RealizedFilter& fx,
                              const RealizedFilter& fy, int nthreads = 1);
FrameVolume filter_frame_spatial(const FrameVolume& frame, const RealizedFilter& fx,
                                 const RealizedFilter& fy, int nthreads = 1);

// Per-pixel temporal recursion across a frame stream. Frame-level.
struct TemporalState {
  TemporalState(const LdeCoeffs& coeffs, int height, int width);

  LdeCoeffs coeffs;
  std::vector<ArrayXXd> x_hist;  // [0] holds t-1
  std::vector<ArrayXXd> y_hist;
};

// One recursion step; bit-exact against filter_1d applied per pixel.
ArrayXXd advance_temporal(TemporalState& state, const ArrayXXd& frame);

// Fixed-length delay of whole frames (returns the frame q steps back once
// the line has filled).
struct FrameDelay {
  explicit FrameDelay(int delay) : delay_(delay) {}

  std::optional<ArrayXXd> push(const ArrayXXd& frame);
  int delay() const { return delay_; }

 private:
  int delay_ = 0;
  std::deque<ArrayXXd> buf_;
};

// Startup-transient margins used by default for metrics: spatial crop per
// edge and temporal warm-up, both sized so the weight has decayed below
// e^-6 of its peak.
int default_crop_margin(double sigma);
int default_warmup_frames(double sigma_z, int q_z);

void require_finite(const ArrayXXd& frame, long frame_index);

}  // namespace lagfilt
