#include "lagfilt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace lagfilt {
namespace {

void parallel_rows(int height, int nthreads, const std::function<void(int, int)>& fn) {
  nthreads = std::max(1, std::min(nthreads, height));
  if (nthreads == 1) {
    fn(0, height);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  const int chunk = (height + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(height, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(fn, lo, hi);
  }
  for (auto& th : pool) th.join();
}

// One directional recursion along x over the row band [r0, r1). Every output
// element depends only on its own row, so any row partition gives identical
// floating-point results.
void pass_x(const ArrayXXd& in, ArrayXXd& out, const LdeCoeffs& c, bool reversed,
            int r0, int r1) {
  const int w = static_cast<int>(in.cols());
  const int len = r1 - r0;
  const int mb = static_cast<int>(c.b.size());
  const int ma = static_cast<int>(c.a.size());
  ArrayXd acc(len);
  for (int s = 0; s < w; ++s) {
    const int n = reversed ? w - 1 - s : s;
    acc = c.b[0] * in.col(n).segment(r0, len);
    for (int m = 1; m < mb; ++m) {
      const int idx = reversed ? n + m : n - m;
      if (idx < 0 || idx >= w) continue;
      acc += c.b[m] * in.col(idx).segment(r0, len);
    }
    for (int m = 1; m < ma; ++m) {
      const int idx = reversed ? n + m : n - m;
      if (idx < 0 || idx >= w) continue;
      acc -= c.a[m] * out.col(idx).segment(r0, len);
    }
    out.col(n).segment(r0, len) = acc;
  }
}

}  // namespace

FilterState FilterState::zeros(const LdeCoeffs& coeffs) {
  FilterState st;
  st.x_hist = VectorXd::Zero(std::max<Eigen::Index>(0, coeffs.b.size() - 1));
  st.y_hist = VectorXd::Zero(std::max<Eigen::Index>(0, coeffs.a.size() - 1));
  return st;
}

ArrayXd filter_1d(const LdeCoeffs& coeffs, const ArrayXd& x, FilterState* state) {
  if (!x.allFinite()) {
    int bad = 0;
    while (std::isfinite(x[bad])) ++bad;
    throw numeric_error("non-finite input sample at index " + std::to_string(bad));
  }
  FilterState local = state ? *state : FilterState::zeros(coeffs);
  if (local.x_hist.size() != coeffs.b.size() - 1 || local.y_hist.size() != coeffs.a.size() - 1)
    local = FilterState::zeros(coeffs);

  const int mb = static_cast<int>(coeffs.b.size());
  const int ma = static_cast<int>(coeffs.a.size());
  ArrayXd y(x.size());
  for (int i = 0; i < x.size(); ++i) {
    double acc = coeffs.b[0] * x[i];
    for (int m = 1; m < mb; ++m)
      acc += coeffs.b[m] * (i - m >= 0 ? x[i - m] : local.x_hist[m - 1 - i]);
    for (int m = 1; m < ma; ++m)
      acc -= coeffs.a[m] * (i - m >= 0 ? y[i - m] : local.y_hist[m - 1 - i]);
    y[i] = acc;
  }
  // Carry the trailing samples (padded from the old state for short chunks).
  auto carry = [](VectorXd& hist, const ArrayXd& seq) {
    VectorXd next = hist;
    const int n = static_cast<int>(seq.size());
    for (int m = 0; m < hist.size(); ++m)
      next[m] = m < n ? seq[n - 1 - m] : hist[m - n];
    hist = next;
  };
  carry(local.x_hist, x);
  carry(local.y_hist, y);
  if (state) *state = local;
  return y;
}

ArrayXd filter_1d_noncausal(const RealizedFilter& pair, const ArrayXd& x) {
  if (pair.causal()) return filter_1d(pair.fwd, x);
  const ArrayXd fwd = filter_1d(pair.fwd, x);
  const ArrayXd bwd = filter_1d(pair.bwd, x.reverse().eval());
  return fwd + bwd.reverse();
}

ArrayXXd filter_image_x(const ArrayXXd& img, const RealizedFilter& pair, int nthreads) {
  const int h = static_cast<int>(img.rows());
  ArrayXXd fwd(img.rows(), img.cols());
  parallel_rows(h, nthreads, [&](int r0, int r1) { pass_x(img, fwd, pair.fwd, false, r0, r1); });
  if (pair.causal()) return fwd;
  ArrayXXd bwd(img.rows(), img.cols());
  parallel_rows(h, nthreads, [&](int r0, int r1) { pass_x(img, bwd, pair.bwd, true, r0, r1); });
  return fwd + bwd;
}

ArrayXXd filter_image_y(const ArrayXXd& img, const RealizedFilter& pair, int nthreads) {
  return filter_image_x(img.transpose(), pair, nthreads).transpose();
}

ArrayXXd filter_frame_spatial(const ArrayXXd& img, const RealizedFilter& fx,
                              const RealizedFilter& fy, int nthreads) {
  return filter_image_y(filter_image_x(img, fx, nthreads), fy, nthreads);
}

FrameVolume filter_frame_spatial(const FrameVolume& frame, const RealizedFilter& fx,
                                 const RealizedFilter& fy, int nthreads) {
  FrameVolume out = frame;
  out.values = filter_frame_spatial(frame.values, fx, fy, nthreads);
  return out;
}

TemporalState::TemporalState(const LdeCoeffs& c, int height, int width) : coeffs(c) {
  x_hist.assign(std::max<size_t>(0, c.b.size() - 1), ArrayXXd::Zero(height, width));
  y_hist.assign(std::max<size_t>(0, c.a.size() - 1), ArrayXXd::Zero(height, width));
}

ArrayXXd advance_temporal(TemporalState& state, const ArrayXXd& frame) {
  // Same operation order as filter_1d so the per-pixel result is bit-exact.
  ArrayXXd y = state.coeffs.b[0] * frame;
  for (size_t m = 0; m < state.x_hist.size(); ++m)
    y += state.coeffs.b[m + 1] * state.x_hist[m];
  for (size_t m = 0; m < state.y_hist.size(); ++m)
    y -= state.coeffs.a[m + 1] * state.y_hist[m];

  if (!state.x_hist.empty()) {
    state.x_hist.pop_back();
    state.x_hist.insert(state.x_hist.begin(), frame);
  }
  if (!state.y_hist.empty()) {
    state.y_hist.pop_back();
    state.y_hist.insert(state.y_hist.begin(), y);
  }
  return y;
}

std::optional<ArrayXXd> FrameDelay::push(const ArrayXXd& frame) {
  if (delay_ == 0) return frame;
  buf_.push_back(frame);
  if (static_cast<int>(buf_.size()) <= delay_) return std::nullopt;
  ArrayXXd out = std::move(buf_.front());
  buf_.pop_front();
  return out;
}

int default_crop_margin(double sigma) {
  if (!(sigma < 0.0)) throw config_error("sigma must be negative");
  return static_cast<int>(std::ceil(6.0 / -sigma));
}

int default_warmup_frames(double sigma_z, int q_z) {
  return std::max(q_z, default_crop_margin(sigma_z));
}

void require_finite(const ArrayXXd& frame, long frame_index) {
  if (frame.allFinite()) return;
  for (int x = 0; x < frame.cols(); ++x)
    for (int y = 0; y < frame.rows(); ++y)
      if (!std::isfinite(frame(y, x)))
        throw numeric_error("non-finite value at frame " + std::to_string(frame_index) +
                            ", pixel (" + std::to_string(x) + ", " + std::to_string(y) + ")");
  throw numeric_error("non-finite value in frame " + std::to_string(frame_index));
}

}  // namespace lagfilt
