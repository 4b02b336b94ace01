#pragma once

#include "lagfilt/types.hpp"

namespace lagfilt {

// Moment sums of the exponential weight. one_sided_moment(k,p) returns
// sum_{m>=0} m^k p^m through the closed-form rational E_k(p)/(1-p)^{k+1},
// where the numerator polynomials follow the recurrence
//   E_0 = 1,  E_{k+1}(p) = p [ (1-p) E_k'(p) + (k+1) E_k(p) ],
// obtained by applying p d/dp to the geometric series k times.
double one_sided_moment(int k, double p);

// sum over all integer m of m^k p^|m|: zero for odd k,
// 2*one_sided_moment(k,p) - [k==0] for even k.
double two_sided_moment(int k, double p);

double moment(int k, double p, Sidedness sidedness);

// Orthonormalizes the monomials 1, m, m^2, ... under the requested weight by
// classical Gram-Schmidt in ascending degree. Rows are normalized to unit
// weighted norm with a positive leading (diagonal) coefficient, which
// reproduces the known closed forms for the causal B = 2 case.
// Rejects B > 6 or p > 0.999, where the moment matrix becomes too
// ill-conditioned for a trustworthy double-precision orthonormalization.
AlphaMatrix gram_schmidt(const BasisSpec& spec);

// Direct evaluation of the nine closed-form entries for B = 2, causal.
AlphaMatrix alpha_closed_form(double p);

// psi_k(m) by Horner evaluation; m may be fractional.
double eval_basis(const AlphaMatrix& alpha, int k, double m);

}  // namespace lagfilt
