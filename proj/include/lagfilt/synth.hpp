#pragma once

#include "lagfilt/types.hpp"

#include <complex>
#include <vector>

namespace lagfilt {

// ---------------------------------------------------------------------------
// Coefficient synthesis.
//
// Everything here reduces to one construction: a polynomial kernel c(m) under
// the exponential weight has the one-sided transform
//
//   Z{ c(m) p^m, m >= 0 } = sum_j c_j E_j(u) (1-pu)^(D-j) / (1-pu)^(D+1),
//
// with u = z^-1, D = deg c, and numerator polynomials E_j given by
// E_0 = 1, E_{j+1} = u [ E_j'(u)(1-pu) + p(j+1) E_j(u) ].
// Two-sided kernels are split into a forward and a backward half, each taking
// half of the m = 0 tap so their sum realizes c(m) p^|m| over all m.
// ---------------------------------------------------------------------------

// Z transform of m^khat e^(sigma m) for m >= 0 as a ratio in u = z^-1,
// e.g. khat = 1 gives p u / (1 - p u)^2.
RationalTf weighted_component_tf(int khat, double p);

// Transform of a kernel polynomial c (ascending monomial coefficients) under
// the causal weight p^m. Numerator is padded with trailing zeros to the
// denominator length so table comparison is positional.
LdeCoeffs kernel_filter_causal(const VectorXd& c, double p);

// Two-sided counterpart: returns the fwd/bwd pair realizing c(m) p^|m|.
RealizedFilter kernel_filter_two_sided(const VectorXd& c, double p);

// Analysis-only filter for coefficient beta_k: kernel psi_k(m) w(m).
// Pole multiplicity k + 1. B = 0 reduces to the exponential average.
RealizedFilter analysis_filter(int k, double p, Sidedness sidedness, int B = 2);

// Analysis-and-synthesis low-pass evaluating the fit at offset q:
// kernel sum_k psi_k(q) psi_k(m) w(m). Two-sided designs require q = 0.
RealizedFilter synthesis_filter(double p, double q, Sidedness sidedness, int B = 2);

// First-derivative estimator of the fit at offset q (causal only). Output is
// the derivative with respect to sample time n, i.e. the response to the
// ramp x(n) = n settles at +1.
LdeCoeffs derivative_filter(double p, double q);

// Closed-form coefficient route (published B = 2 expressions); agrees with
// the constructive route above to roundoff and is kept as a cross-check and
// for the design report.
RealizedFilter analysis_filter_closed_form(int k, double p, Sidedness sidedness);
RealizedFilter synthesis_filter_closed_form(double p, double q, Sidedness sidedness);

// ---------------------------------------------------------------------------
// Response analysis.
// ---------------------------------------------------------------------------

RationalTf to_tf(const LdeCoeffs& coeffs);

// Residual-path response z^-q - H_lpf(z); exact DC notch for unit-gain lpf.
RationalTf highpass_from_lowpass(const RationalTf& lpf, int q);

// Composite two-sided high-pass of the B = 0 exponential average,
//   1 - (1-p)/(1+p) [ 1/(1-p z^-1) + 1/(1-p z) - 1 ],
// reduced to (1-u)^2 / (1 - (1+p^2)/p u + u^2). Analytic response only; the
// poles are a reciprocal pair, realized at runtime as fwd/bwd passes.
RationalTf exp_average_hpf(double p);

std::complex<double> freq_response(const RationalTf& tf, double f);

// Causal: H(e^j2pif). Two-sided: fwd response plus the conjugate of the bwd
// response, matching the time-reversed application of the backward half.
std::complex<double> freq_response(const RealizedFilter& filt, double f);

double magnitude_db(const std::complex<double>& h);

// Number of leading derivatives of |H(w)|^2 vanishing at w = 0, by central
// finite differences (step 1e-3, Richardson extrapolated, threshold 1e-6 on
// the normalized magnitude). Odd orders vanish for any real-coefficient
// filter; the _even variants count even orders only and are reported
// separately in the design report.
int flatness_orders(const RationalTf& tf);
int flatness_orders(const RealizedFilter& filt);
int flatness_orders_even(const RationalTf& tf);
int flatness_orders_even(const RealizedFilter& filt);

VectorXd impulse_response(const LdeCoeffs& coeffs, int n);

// Pole locations in the z plane (reciprocals of the denominator's roots in u).
std::vector<std::complex<double>> pole_locations(const LdeCoeffs& coeffs);

// ---------------------------------------------------------------------------
// Design figures of merit (B = 2, causal temporal filter).
// ---------------------------------------------------------------------------

// Variance reduction factor; equals the sum of squared impulse-response
// samples of the synthesis filter.
double vrf(double p, double q);

// Real-valued VRF-minimizing synthesis offset.
double q_opt(double p);

// Reciprocal of the 3-D weight mass, used to scale accumulated power into
// average power: 1 / ([2/(1-px)-1][2/(1-py)-1][1/(1-pz)]).
double power_norm(double p_x, double p_y, double p_z);

}  // namespace lagfilt
