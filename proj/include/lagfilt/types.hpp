#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lagfilt {

using Eigen::ArrayXd;
using Eigen::ArrayXXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Error taxonomy. The CLI maps these onto distinct process exit codes
// (config -> 2, numeric -> 3, I/O -> 4).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct conditioning_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Causal: one-sided weight w(m) = p^m for m >= 0.
// TwoSided: w(m) = p^|m| over all integer m, realized as fwd + bwd passes.
enum class Sidedness { Causal, TwoSided };

// Direction tag for the halves of a realized filter. Causal filters are Fwd.
// Two-sided filters with an even kernel share one coefficient set
// (FwdBwdShared); odd kernels use sign-flipped numerators (FwdBwdAntisym).
enum class Direction { Fwd, Bwd, FwdBwdShared, FwdBwdAntisym };

enum class FilterRole { AnalysisOnly, AnalysisSynthesis, Derivative };

struct BasisSpec {
  int B = 2;                                   // polynomial degree
  double p = 0.5;                              // pole radius, p = e^sigma
  Sidedness sidedness = Sidedness::Causal;
};

// Design parameters for one dimension. k is used only for AnalysisOnly.
struct FilterSpec {
  double p = 0.5;
  double q = 0.0;                              // synthesis offset
  int B = 2;
  Sidedness sidedness = Sidedness::Causal;
  FilterRole role = FilterRole::AnalysisSynthesis;
  int k = 0;
};

// Lower-triangular orthonormal-polynomial coefficient matrix.
// Row k holds the monomial coefficients of psi_k: psi_k(m) = sum_j a(k,j) m^j.
struct AlphaMatrix {
  MatrixXd a;
  double p = 0.0;
  Sidedness sidedness = Sidedness::Causal;

  int order() const { return static_cast<int>(a.rows()) - 1; }
};

// Linear-difference-equation coefficients, ascending powers of z^-1, a(0) = 1.
struct LdeCoeffs {
  VectorXd b;
  VectorXd a;
  Direction direction = Direction::Fwd;
};

// Rational function of u = z^-1 for response analysis, den(0) = 1. Used both
// for realizable (all poles inside the unit circle) and composite analytic
// responses such as the two-sided exponential-average high-pass.
struct RationalTf {
  VectorXd num;
  VectorXd den;
};

// A realizable filter: causal filters use fwd only; two-sided filters are the
// sum of a forward pass and a time-reversed backward pass.
struct RealizedFilter {
  Sidedness sidedness = Sidedness::Causal;
  LdeCoeffs fwd;
  LdeCoeffs bwd;

  bool causal() const { return sidedness == Sidedness::Causal; }
};

inline double sigma_to_p(double sigma) { return std::exp(sigma); }
inline double p_to_sigma(double p) { return std::log(p); }

inline void require_pole(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw config_error("pole radius p must lie in (0,1), got " + std::to_string(p));
}

}  // namespace lagfilt
