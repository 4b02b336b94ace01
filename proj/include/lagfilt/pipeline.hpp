#pragma once

#include "lagfilt/engine.hpp"
#include "lagfilt/types.hpp"

#include <array>
#include <optional>
#include <vector>

namespace lagfilt {

// (kx, ky, kz) Laguerre-spectrum bin index.
using Bin = std::array<int, 3>;

// The seven bins sufficient for the moving-point-target model.
std::vector<Bin> omega_subset7();
// All (B+1)^3 bins.
std::vector<Bin> omega_full(int B = 2);

struct StageOneConfig {
  double sigma_x = -0.5;
  double sigma_y = -0.5;
  double sigma_z = -0.25;
  int q_z = 4;
  int B = 2;  // 0 selects the first-order exponential-average fallback (q_z forced 0)
};

struct StageTwoConfig {
  double sigma = -0.5;  // shared by x, y (two-sided) and z (causal) banks
  int B = 2;            // 0 restricts the bank to the DC bin
};

struct PipelineConfig {
  StageOneConfig stage1;
  StageTwoConfig stage2;
  std::vector<Bin> omega = omega_subset7();
  bool bypass_stage1 = false;
  bool normalize_power = false;  // scale accumulated power by power_norm
  int nthreads = 1;
  int crop_margin = -1;   // < 0: ceil(6/-sigma) from the widest spatial weight
  int warmup_frames = -1; // < 0: max(q_z, ceil(6/-sigma_z))
};

// Background subtraction: two-sided spatial low-pass in x and y, causal
// temporal synthesis filter with offset q_z, residual against the q_z-delayed
// raw frame. Output stream is delayed by q_z frames relative to the input.
class StageOne {
 public:
  StageOne(const StageOneConfig& cfg, int height, int width, int nthreads = 1);

  struct Output {
    long index = 0;      // input frame index the output is aligned to (n - q_z)
    ArrayXXd residual;   // I_eps
    ArrayXXd ihat;       // fitted background estimate
    ArrayXXd delayed;    // the matching raw frame
  };

  std::optional<Output> push(const ArrayXXd& frame);

 private:
  StageOneConfig cfg_;
  int nthreads_ = 1;
  RealizedFilter fx_, fy_;
  TemporalState tstate_;
  FrameDelay delay_;
  long n_in_ = 0;
};

// Per-pixel regression coefficients for one frame, populated on the bins
// requested at construction.
struct LaguerreSpectrum {
  long index = 0;
  std::vector<Bin> bins;
  std::vector<ArrayXXd> beta;

  int find(const Bin& bin) const;
};

// Dense (kx, ky, kz) tensors at one pixel; absent bins read as zero.
using BetaTensor = std::array<std::array<std::array<double, 3>, 3>, 3>;
using GammaTensor = BetaTensor;

BetaTensor beta_at(const LaguerreSpectrum& spec, int y, int x);

// Separable analysis banks: x bank, then y bank, then causal temporal bank.
class StageTwo {
 public:
  StageTwo(const StageTwoConfig& cfg, std::vector<Bin> omega, int height, int width,
           int nthreads = 1);

  LaguerreSpectrum push(const ArrayXXd& frame);

  const AlphaMatrix& alpha_xy() const { return alpha_xy_; }
  const AlphaMatrix& alpha_z() const { return alpha_z_; }
  const std::vector<Bin>& omega() const { return omega_; }

 private:
  StageTwoConfig cfg_;
  std::vector<Bin> omega_;
  int nthreads_ = 1;
  AlphaMatrix alpha_xy_, alpha_z_;
  std::vector<RealizedFilter> bank_x_, bank_y_;       // indexed by k
  std::vector<std::pair<int, int>> spatial_pairs_;    // distinct (kx, ky)
  std::vector<int> bin_pair_;                         // bin -> spatial pair index
  std::vector<TemporalState> tstate_;                 // one per bin
  long n_ = 0;
};

// Sum of squared coefficients over omega, optionally scaled into average
// power. Every requested bin must be present in the spectrum.
ArrayXXd accumulate_power(const LaguerreSpectrum& spec, const std::vector<Bin>& omega,
                          double c_norm = 1.0);

// Change of basis from Laguerre coefficients to monomial component
// coefficients: gamma = sum_k beta_k (Ax^T u_kx) x (Ay^T u_ky) x (Az^T u_kz).
GammaTensor beta_to_gamma(const BetaTensor& beta, const AlphaMatrix& ax,
                          const AlphaMatrix& ay, const AlphaMatrix& az);

struct VelocityEstimate {
  double vx = 0.0;
  double vy = 0.0;
  bool reliable_x = false;
  bool reliable_y = false;
};

// v = -gamma_101 / (2 gamma_200) per axis, flagged unreliable when the
// curvature falls under 1e-6 of the local DC component.
VelocityEstimate estimate_velocity(const GammaTensor& gamma);

// Weighted sum of squared residuals of the local fit, evaluated recursively
// as the w-weighted running sum of the squared input minus the full-bin
// accumulated power (Parseval under the orthonormal basis).
class SseAccumulator {
 public:
  SseAccumulator(const StageTwoConfig& cfg, int height, int width, int nthreads = 1);

  ArrayXXd push(const ArrayXXd& frame);

 private:
  StageTwo full_;
  RealizedFilter wx_;
  TemporalState wz_;
  int nthreads_ = 1;
};

struct PipelineResult {
  long index = 0;          // aligned input frame index
  ArrayXXd phat;
  ArrayXXd residual, ihat, delayed;  // empty when stage 1 is bypassed
  int argmax_x = 0, argmax_y = 0;    // over the crop-inset interior
  double peak = 0.0;
  VelocityEstimate vel;              // at the argmax pixel
  double vx_avg = 0.0, vy_avg = 0.0; // running average of reliable estimates
  bool warmup = true;
};

// Full two-stage cascade with per-frame argmax velocity readout.
class Pipeline {
 public:
  Pipeline(const PipelineConfig& cfg, int height, int width);

  std::optional<PipelineResult> push(const ArrayXXd& frame);

  const PipelineConfig& config() const { return cfg_; }
  int crop_margin() const { return crop_; }
  int warmup_frames() const { return warmup_; }
  const LaguerreSpectrum& last_spectrum() const { return spectrum_; }
  double c_norm() const { return c_norm_; }

 private:
  PipelineConfig cfg_;
  int crop_ = 0, warmup_ = 0;
  double c_norm_ = 1.0;
  std::optional<StageOne> s1_;
  StageTwo s2_;
  LaguerreSpectrum spectrum_;
  double vx_sum_ = 0.0, vy_sum_ = 0.0;
  long vx_count_ = 0, vy_count_ = 0;
};

// Batch conveniences over in-memory streams.
std::vector<ArrayXXd> stage1(const std::vector<ArrayXXd>& stream, const StageOneConfig& cfg,
                             int nthreads = 1);
std::vector<LaguerreSpectrum> stage2_analyze(const std::vector<ArrayXXd>& stream,
                                             const StageTwoConfig& cfg,
                                             const std::vector<Bin>& omega, int nthreads = 1);
std::vector<ArrayXXd> sse_map(const std::vector<ArrayXXd>& stream, const StageTwoConfig& cfg,
                              int nthreads = 1);

}  // namespace lagfilt
