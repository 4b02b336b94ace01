#include "lagfilt/pipeline.hpp"

#include "lagfilt/basis.hpp"
#include "lagfilt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace lagfilt {

namespace {

int effective_qz(const StageOneConfig& cfg) { return cfg.B == 0 ? 0 : cfg.q_z; }

void validate_omega(const std::vector<Bin>& omega, int B) {
  if (omega.empty()) throw config_error("omega must name at least one bin");
  for (std::size_t i = 0; i < omega.size(); ++i) {
    for (int d = 0; d < 3; ++d)
      if (omega[i][d] < 0 || omega[i][d] > B)
        throw config_error("omega bin index out of range for order B");
    for (std::size_t j = 0; j < i; ++j)
      if (omega[j] == omega[i]) throw config_error("omega contains duplicate bins");
  }
}

}  // namespace

std::vector<Bin> omega_subset7() {
  return {{0, 0, 0}, {0, 1, 0}, {0, 2, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 1}, {1, 0, 1}};
}

std::vector<Bin> omega_full(int B) {
  std::vector<Bin> bins;
  bins.reserve(static_cast<std::size_t>(B + 1) * (B + 1) * (B + 1));
  for (int kx = 0; kx <= B; ++kx)
    for (int ky = 0; ky <= B; ++ky)
      for (int kz = 0; kz <= B; ++kz) bins.push_back({kx, ky, kz});
  return bins;
}

StageOne::StageOne(const StageOneConfig& cfg, int height, int width, int nthreads)
    : cfg_(cfg),
      nthreads_(nthreads),
      fx_(synthesis_filter(sigma_to_p(cfg.sigma_x), 0.0, Sidedness::TwoSided, cfg.B)),
      fy_(synthesis_filter(sigma_to_p(cfg.sigma_y), 0.0, Sidedness::TwoSided, cfg.B)),
      tstate_(synthesis_filter(sigma_to_p(cfg.sigma_z), effective_qz(cfg), Sidedness::Causal,
                               cfg.B)
                  .fwd,
              height, width),
      delay_(effective_qz(cfg)) {
  if (cfg.q_z < 0) throw config_error("q_z must be non-negative");
}

std::optional<StageOne::Output> StageOne::push(const ArrayXXd& frame) {
  require_finite(frame, n_in_);
  const ArrayXXd smooth = filter_frame_spatial(frame, fx_, fy_, nthreads_);
  const ArrayXXd ihat = advance_temporal(tstate_, smooth);
  const long n = n_in_++;
  auto delayed = delay_.push(frame);
  if (!delayed) return std::nullopt;
  Output out;
  out.index = n - delay_.delay();
  out.ihat = ihat;
  out.delayed = std::move(*delayed);
  out.residual = out.delayed - out.ihat;
  return out;
}

int LaguerreSpectrum::find(const Bin& bin) const {
  for (std::size_t i = 0; i < bins.size(); ++i)
    if (bins[i] == bin) return static_cast<int>(i);
  return -1;
}

BetaTensor beta_at(const LaguerreSpectrum& spec, int y, int x) {
  BetaTensor t{};
  for (std::size_t i = 0; i < spec.bins.size(); ++i) {
    const Bin& b = spec.bins[i];
    t[b[0]][b[1]][b[2]] = spec.beta[i](y, x);
  }
  return t;
}

StageTwo::StageTwo(const StageTwoConfig& cfg, std::vector<Bin> omega, int height, int width,
                   int nthreads)
    : cfg_(cfg),
      omega_(std::move(omega)),
      nthreads_(nthreads),
      alpha_xy_(gram_schmidt({cfg.B, sigma_to_p(cfg.sigma), Sidedness::TwoSided})),
      alpha_z_(gram_schmidt({cfg.B, sigma_to_p(cfg.sigma), Sidedness::Causal})) {
  if (cfg_.B > 2) throw config_error("analysis order above 2 is not supported");
  validate_omega(omega_, cfg_.B);
  const double p = sigma_to_p(cfg_.sigma);
  for (int k = 0; k <= cfg_.B; ++k)
    bank_x_.push_back(analysis_filter(k, p, Sidedness::TwoSided, cfg_.B));
  bank_y_ = bank_x_;  // x and y share sigma
  for (const Bin& b : omega_) {
    const std::pair<int, int> pr{b[0], b[1]};
    auto it = std::find(spatial_pairs_.begin(), spatial_pairs_.end(), pr);
    if (it == spatial_pairs_.end()) {
      spatial_pairs_.push_back(pr);
      it = std::prev(spatial_pairs_.end());
    }
    bin_pair_.push_back(static_cast<int>(it - spatial_pairs_.begin()));
    tstate_.emplace_back(analysis_filter(b[2], p, Sidedness::Causal, cfg_.B).fwd, height,
                         width);
  }
}

LaguerreSpectrum StageTwo::push(const ArrayXXd& frame) {
  require_finite(frame, n_);
  std::vector<ArrayXXd> xpass(cfg_.B + 1);
  std::vector<bool> have_x(cfg_.B + 1, false);
  std::vector<ArrayXXd> spatial(spatial_pairs_.size());
  for (std::size_t i = 0; i < spatial_pairs_.size(); ++i) {
    const auto [kx, ky] = spatial_pairs_[i];
    if (!have_x[kx]) {
      xpass[kx] = filter_image_x(frame, bank_x_[kx], nthreads_);
      have_x[kx] = true;
    }
    spatial[i] = filter_image_y(xpass[kx], bank_y_[ky], nthreads_);
  }
  LaguerreSpectrum out;
  out.index = n_++;
  out.bins = omega_;
  out.beta.reserve(omega_.size());
  for (std::size_t i = 0; i < omega_.size(); ++i)
    out.beta.push_back(advance_temporal(tstate_[i], spatial[bin_pair_[i]]));
  return out;
}

ArrayXXd accumulate_power(const LaguerreSpectrum& spec, const std::vector<Bin>& omega,
                          double c_norm) {
  if (spec.beta.empty()) throw config_error("cannot accumulate power of an empty spectrum");
  ArrayXXd acc = ArrayXXd::Zero(spec.beta.front().rows(), spec.beta.front().cols());
  for (const Bin& b : omega) {
    const int i = spec.find(b);
    if (i < 0) throw config_error("requested bin missing from spectrum");
    acc += spec.beta[i].square();
  }
  if (c_norm != 1.0) acc *= c_norm;
  return acc;
}

GammaTensor beta_to_gamma(const BetaTensor& beta, const AlphaMatrix& ax, const AlphaMatrix& ay,
                          const AlphaMatrix& az) {
  if (ax.order() > 2 || ay.order() > 2 || az.order() > 2)
    throw config_error("basis order above 2 is not supported");
  GammaTensor g{};
  for (int kx = 0; kx <= ax.order(); ++kx)
    for (int ky = 0; ky <= ay.order(); ++ky)
      for (int kz = 0; kz <= az.order(); ++kz) {
        const double b = beta[kx][ky][kz];
        if (b == 0.0) continue;
        // alpha is lower triangular; only monomial degrees up to k contribute
        for (int i = 0; i <= kx; ++i)
          for (int j = 0; j <= ky; ++j)
            for (int l = 0; l <= kz; ++l) g[i][j][l] += b * ax.a(kx, i) * ay.a(ky, j) * az.a(kz, l);
      }
  return g;
}

VelocityEstimate estimate_velocity(const GammaTensor& gamma) {
  VelocityEstimate v;
  const double threshold = 1e-6 * std::abs(gamma[0][0][0]);
  if (std::abs(gamma[2][0][0]) > threshold) {
    v.vx = -gamma[1][0][1] / (2.0 * gamma[2][0][0]);
    v.reliable_x = true;
  }
  if (std::abs(gamma[0][2][0]) > threshold) {
    v.vy = -gamma[0][1][1] / (2.0 * gamma[0][2][0]);
    v.reliable_y = true;
  }
  return v;
}

SseAccumulator::SseAccumulator(const StageTwoConfig& cfg, int height, int width, int nthreads)
    : full_(cfg, omega_full(cfg.B), height, width, nthreads),
      wx_(kernel_filter_two_sided(VectorXd::Ones(1), sigma_to_p(cfg.sigma))),
      wz_(kernel_filter_causal(VectorXd::Ones(1), sigma_to_p(cfg.sigma)), height, width),
      nthreads_(nthreads) {}

ArrayXXd SseAccumulator::push(const ArrayXXd& frame) {
  const ArrayXXd power = accumulate_power(full_.push(frame), full_.omega());
  const ArrayXXd squared = frame.square();
  const ArrayXXd total = advance_temporal(wz_, filter_frame_spatial(squared, wx_, wx_, nthreads_));
  return total - power;
}

Pipeline::Pipeline(const PipelineConfig& cfg, int height, int width)
    : cfg_(cfg), s2_(cfg.stage2, cfg.omega, height, width, cfg.nthreads) {
  if (!cfg_.bypass_stage1) s1_.emplace(cfg_.stage1, height, width, cfg_.nthreads);
  int crop = default_crop_margin(cfg_.stage2.sigma);
  if (!cfg_.bypass_stage1)
    crop = std::max({crop, default_crop_margin(cfg_.stage1.sigma_x),
                     default_crop_margin(cfg_.stage1.sigma_y)});
  crop_ = cfg_.crop_margin >= 0 ? cfg_.crop_margin : crop;
  warmup_ = cfg_.warmup_frames >= 0 ? cfg_.warmup_frames
            : cfg_.bypass_stage1
                ? default_warmup_frames(cfg_.stage2.sigma, 0)
                : default_warmup_frames(cfg_.stage1.sigma_z, effective_qz(cfg_.stage1));
  if (height - 2 * crop_ <= 0 || width - 2 * crop_ <= 0)
    throw config_error("crop margin leaves no interior pixels");
  const double p2 = sigma_to_p(cfg_.stage2.sigma);
  c_norm_ = power_norm(p2, p2, p2);
}

std::optional<PipelineResult> Pipeline::push(const ArrayXXd& frame) {
  PipelineResult res;
  if (s1_) {
    auto out = s1_->push(frame);
    if (!out) return std::nullopt;
    res.residual = std::move(out->residual);
    res.ihat = std::move(out->ihat);
    res.delayed = std::move(out->delayed);
    spectrum_ = s2_.push(res.residual);
  } else {
    spectrum_ = s2_.push(frame);
  }
  res.index = spectrum_.index;
  res.phat = accumulate_power(spectrum_, cfg_.omega, cfg_.normalize_power ? c_norm_ : 1.0);
  res.warmup = res.index < warmup_;

  const Eigen::Index h = res.phat.rows(), w = res.phat.cols();
  Eigen::Index iy = 0, ix = 0;
  res.peak = res.phat.block(crop_, crop_, h - 2 * crop_, w - 2 * crop_).maxCoeff(&iy, &ix);
  res.argmax_y = crop_ + static_cast<int>(iy);
  res.argmax_x = crop_ + static_cast<int>(ix);

  const BetaTensor beta = beta_at(spectrum_, res.argmax_y, res.argmax_x);
  res.vel = estimate_velocity(beta_to_gamma(beta, s2_.alpha_xy(), s2_.alpha_xy(), s2_.alpha_z()));
  if (!res.warmup) {
    if (res.vel.reliable_x) {
      vx_sum_ += res.vel.vx;
      ++vx_count_;
    }
    if (res.vel.reliable_y) {
      vy_sum_ += res.vel.vy;
      ++vy_count_;
    }
  }
  res.vx_avg = vx_count_ ? vx_sum_ / vx_count_ : 0.0;
  res.vy_avg = vy_count_ ? vy_sum_ / vy_count_ : 0.0;
  return res;
}

std::vector<ArrayXXd> stage1(const std::vector<ArrayXXd>& stream, const StageOneConfig& cfg,
                             int nthreads) {
  std::vector<ArrayXXd> out;
  if (stream.empty()) return out;
  StageOne s(cfg, static_cast<int>(stream.front().rows()),
             static_cast<int>(stream.front().cols()), nthreads);
  for (const ArrayXXd& f : stream)
    if (auto o = s.push(f)) out.push_back(std::move(o->residual));
  return out;
}

std::vector<LaguerreSpectrum> stage2_analyze(const std::vector<ArrayXXd>& stream,
                                             const StageTwoConfig& cfg,
                                             const std::vector<Bin>& omega, int nthreads) {
  std::vector<LaguerreSpectrum> out;
  if (stream.empty()) return out;
  StageTwo s(cfg, omega, static_cast<int>(stream.front().rows()),
             static_cast<int>(stream.front().cols()), nthreads);
  out.reserve(stream.size());
  for (const ArrayXXd& f : stream) out.push_back(s.push(f));
  return out;
}

std::vector<ArrayXXd> sse_map(const std::vector<ArrayXXd>& stream, const StageTwoConfig& cfg,
                              int nthreads) {
  std::vector<ArrayXXd> out;
  if (stream.empty()) return out;
  SseAccumulator acc(cfg, static_cast<int>(stream.front().rows()),
                     static_cast<int>(stream.front().cols()), nthreads);
  out.reserve(stream.size());
  for (const ArrayXXd& f : stream) out.push_back(acc.push(f));
  return out;
}

}  // namespace lagfilt
