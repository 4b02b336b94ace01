#include "lagfilt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lagfilt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate(const ScenarioConfig& cfg) {
  if (cfg.frames <= 0 || cfg.width <= 0 || cfg.height <= 0)
    throw config_error("scenario dimensions must be positive");
  if (cfg.n_components < 0) throw config_error("n_components must be non-negative");
  if (cfg.f_max < 0.0 || cfg.f_max > 0.5)
    throw config_error("f_max must lie in [0, 0.5] cycles/pixel");
  if (cfg.sigma_eps < 0.0) throw config_error("sigma_eps must be non-negative");
  if (cfg.psf_std <= 0.0) throw config_error("psf_std must be positive");
  if (cfg.v_clt_min > cfg.v_clt_max || cfg.v_tgt_min > cfg.v_tgt_max)
    throw config_error("velocity range is inverted");
}

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + n / 2;
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (n % 2 == 0) {
    auto lo = std::max_element(v.begin(), mid);
    m = 0.5 * (m + *lo);
  }
  return m;
}

}  // namespace

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gauss() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

std::pair<std::vector<ArrayXXd>, GroundTruth> generate(const ScenarioConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  GroundTruth truth;
  truth.psf_std = cfg.psf_std;
  truth.i_max = cfg.enable_target ? cfg.i_max : 0.0;

  if (cfg.enable_clutter) {
    truth.components.reserve(cfg.n_components);
    for (int i = 0; i < cfg.n_components; ++i) {
      const double f = rng.uniform(0.0, cfg.f_max);
      const double theta = rng.uniform(0.0, kTwoPi);
      const double phase = rng.uniform(0.0, kTwoPi);
      truth.components.push_back(
          {f * std::cos(theta), f * std::sin(theta), phase, cfg.clutter_amplitude});
    }
    truth.vx_clt = rng.uniform(cfg.v_clt_min, cfg.v_clt_max);
    truth.vy_clt = rng.uniform(cfg.v_clt_min, cfg.v_clt_max);
  }

  double fx_final = 0.0, fy_final = 0.0;
  if (cfg.enable_target) {
    truth.vx_tgt = rng.uniform(cfg.v_tgt_min, cfg.v_tgt_max);
    truth.vy_tgt = rng.uniform(cfg.v_tgt_min, cfg.v_tgt_max);
    fx_final = cfg.final_x + rng.uniform();
    fy_final = cfg.final_y + rng.uniform();
  }

  truth.centers.resize(cfg.frames);
  for (int n = 0; n < cfg.frames; ++n) {
    const double dt = static_cast<double>(n - (cfg.frames - 1));
    truth.centers[n] = {fx_final + truth.vx_tgt * dt, fy_final + truth.vy_tgt * dt};
  }

  const ArrayXd xs = ArrayXd::LinSpaced(cfg.width, 0.0, cfg.width - 1.0);
  const ArrayXd ys = ArrayXd::LinSpaced(cfg.height, 0.0, cfg.height - 1.0);

  std::vector<ArrayXXd> frames;
  frames.reserve(cfg.frames);
  for (int n = 0; n < cfg.frames; ++n) {
    ArrayXXd frame = ArrayXXd::Zero(cfg.height, cfg.width);
    if (cfg.enable_clutter) {
      frame += cfg.dc_offset;
      for (const ClutterComponent& c : truth.components) {
        // translating component: arg = 2 pi (fx (x - vx n) + fy (y - vy n)) + phase
        const double shift =
            c.phase - kTwoPi * static_cast<double>(n) * (c.fx * truth.vx_clt + c.fy * truth.vy_clt);
        ArrayXXd arg = (kTwoPi * c.fy * ys + shift).replicate(1, cfg.width);
        arg.rowwise() += (kTwoPi * c.fx * xs).transpose();
        frame += c.amplitude * arg.cos();
      }
    }
    if (cfg.enable_target) {
      const auto [cx, cy] = truth.centers[n];
      const double inv = 1.0 / (2.0 * cfg.psf_std * cfg.psf_std);
      const ArrayXd gx = (-(xs - cx).square() * inv).exp();
      const ArrayXd gy = (-(ys - cy).square() * inv).exp();
      frame += cfg.i_max * (gy.matrix() * gx.matrix().transpose()).array();
    }
    if (cfg.sigma_eps > 0.0) {
      for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x) frame(y, x) += cfg.sigma_eps * rng.gauss();
    }
    frames.push_back(std::move(frame));
  }
  return {std::move(frames), std::move(truth)};
}

double clutter_tilt(double v_x, double v_y, double f_x, double f_y) {
  return -(v_x * f_x + v_y * f_y);
}

std::optional<double> measure_snr(const ArrayXXd& frame, const GroundTruth& truth,
                                  long frame_index, int crop_margin) {
  if (frame_index < 0 || frame_index >= static_cast<long>(truth.centers.size()))
    throw config_error("frame index outside the ground truth");
  const auto [cx, cy] = truth.centers[frame_index];
  const long tx = std::lround(cx), ty = std::lround(cy);
  const long W = frame.cols(), H = frame.rows();
  const long c = crop_margin;
  if (tx < c || tx >= W - c || ty < c || ty >= H - c) return std::nullopt;

  const long excl = static_cast<long>(std::ceil(5.0 * truth.psf_std));
  std::vector<double> background;
  background.reserve(static_cast<std::size_t>((W - 2 * c) * (H - 2 * c)));
  // Causal smoothing displaces the response blob behind a moving target, so the
  // target value is taken as the maximum over the exclusion square rather than
  // the single cell under the true center. The square collapses to that cell as
  // psf_std -> 0.
  double target = frame(ty, tx);
  for (long y = c; y < H - c; ++y)
    for (long x = c; x < W - c; ++x) {
      if (std::labs(x - tx) > excl || std::labs(y - ty) > excl)
        background.push_back(frame(y, x));
      else
        target = std::max(target, frame(y, x));
    }
  if (background.empty()) return std::nullopt;

  const double med = median_of(background);
  for (double& v : background) v = std::abs(v - med);
  const double robust = 1.4826 * median_of(background);
  const double peak = target - med;

  double db;
  if (peak <= 0.0) {
    db = -99.0;
  } else if (robust <= peak * 1e-12) {
    db = 99.0;
  } else {
    db = 20.0 * std::log10(peak / robust);
  }
  return std::clamp(db, -99.0, 99.0);
}

MatchedFilterBank::MatchedFilterBank(std::vector<std::array<double, 2>> velocities,
                                     double psf_std)
    : velocities_(std::move(velocities)) {
  if (velocities_.empty()) throw config_error("matched filter bank needs a velocity list");
  if (psf_std <= 0.0) throw config_error("psf_std must be positive");
  for (const auto& v : velocities_) {
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
      throw config_error("matched filter velocities must be finite");
  }
  const double inv = 1.0 / (2.0 * psf_std * psf_std);
  gx_.resize(velocities_.size());
  gy_.resize(velocities_.size());
  norm_.resize(velocities_.size());
  for (std::size_t j = 0; j < velocities_.size(); ++j) {
    double energy = 0.0;
    for (int s = 0; s < 9; ++s) {
      const double mz = s - 4;
      ArrayXd gx(9), gy(9);
      for (int m = -4; m <= 4; ++m) {
        gx(m + 4) = std::exp(-(m - velocities_[j][0] * mz) * (m - velocities_[j][0] * mz) * inv);
        gy(m + 4) = std::exp(-(m - velocities_[j][1] * mz) * (m - velocities_[j][1] * mz) * inv);
      }
      energy += gx.square().sum() * gy.square().sum();
      gx_[j][s] = std::move(gx);
      gy_[j][s] = std::move(gy);
    }
    norm_[j] = std::sqrt(energy);
  }
}

namespace {

ArrayXXd correlate_x(const ArrayXXd& img, const ArrayXd& g) {
  const Eigen::Index W = img.cols();
  ArrayXXd out = ArrayXXd::Zero(img.rows(), W);
  for (int m = -4; m <= 4; ++m) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, -m);
    const Eigen::Index hi = std::min<Eigen::Index>(W, W - m);
    if (hi > lo) out.middleCols(lo, hi - lo) += g(m + 4) * img.middleCols(lo + m, hi - lo);
  }
  return out;
}

ArrayXXd correlate_y(const ArrayXXd& img, const ArrayXd& g) {
  const Eigen::Index H = img.rows();
  ArrayXXd out = ArrayXXd::Zero(H, img.cols());
  for (int m = -4; m <= 4; ++m) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, -m);
    const Eigen::Index hi = std::min<Eigen::Index>(H, H - m);
    if (hi > lo) out.middleRows(lo, hi - lo) += g(m + 4) * img.middleRows(lo + m, hi - lo);
  }
  return out;
}

}  // namespace

std::optional<MatchedFilterOutput> MatchedFilterBank::push(const ArrayXXd& frame) {
  ring_.push_back(frame);
  ++n_;
  if (ring_.size() < 9) return std::nullopt;

  MatchedFilterOutput out;
  out.index = n_ - 5;  // center of the window [n-9, n-1]
  for (std::size_t j = 0; j < velocities_.size(); ++j) {
    ArrayXXd acc = ArrayXXd::Zero(frame.rows(), frame.cols());
    for (int s = 0; s < 9; ++s) acc += correlate_y(correlate_x(ring_[s], gx_[j][s]), gy_[j][s]);
    const ArrayXXd power = (acc / norm_[j]).square();
    if (j == 0) {
      out.power = power;
      out.winner = Eigen::ArrayXXi::Zero(frame.rows(), frame.cols());
    } else {
      out.winner = (power > out.power)
                       .select(Eigen::ArrayXXi::Constant(frame.rows(), frame.cols(),
                                                         static_cast<int>(j)),
                               out.winner);
      out.power = out.power.max(power);
    }
  }
  ring_.erase(ring_.begin());
  return out;
}

std::vector<MatchedFilterOutput> matched_filter_bank(
    const std::vector<ArrayXXd>& stream, const std::vector<std::array<double, 2>>& velocities,
    double psf_std) {
  std::vector<MatchedFilterOutput> out;
  MatchedFilterBank bank(velocities, psf_std);
  for (const ArrayXXd& f : stream)
    if (auto o = bank.push(f)) out.push_back(std::move(*o));
  return out;
}

}  // namespace lagfilt
