#include "lagfilt/basis.hpp"

namespace lagfilt {

double one_sided_moment(int k, double p) {
  require_pole(p);
  if (k < 0) throw config_error("moment order must be non-negative");
  // Numerator polynomial E_k by the differentiation recurrence; coefficients
  // are small non-negative integers times powers of p (Eulerian numbers), so
  // the arithmetic below is exact in double precision for the orders we allow.
  VectorXd e = VectorXd::Ones(1);
  for (int j = 0; j < k; ++j) {
    VectorXd next = VectorXd::Zero(e.size() + 1);
    for (int i = 1; i < e.size(); ++i) {      // p (1-p) E'
      next[i] += i * e[i];
      next[i + 1] -= i * e[i];
    }
    for (int i = 0; i < e.size(); ++i)        // p (j+1) E
      next[i + 1] += (j + 1) * e[i];
    e = next;
  }
  double num = 0.0;
  for (int i = static_cast<int>(e.size()) - 1; i >= 0; --i) num = num * p + e[i];
  return num / std::pow(1.0 - p, k + 1);
}

double two_sided_moment(int k, double p) {
  require_pole(p);
  if (k % 2 == 1) return 0.0;
  return 2.0 * one_sided_moment(k, p) - (k == 0 ? 1.0 : 0.0);
}

double moment(int k, double p, Sidedness sidedness) {
  return sidedness == Sidedness::Causal ? one_sided_moment(k, p)
                                        : two_sided_moment(k, p);
}

AlphaMatrix gram_schmidt(const BasisSpec& spec) {
  require_pole(spec.p);
  if (spec.B < 0) throw config_error("polynomial degree B must be >= 0");
  if (spec.B > 6 || spec.p > 0.999)
    throw conditioning_error(
        "orthonormalization rejected: B = " + std::to_string(spec.B) +
        ", p = " + std::to_string(spec.p) +
        " (limits B <= 6, p <= 0.999; the moment matrix is too ill-conditioned)");

  const int n = spec.B + 1;
  VectorXd s(2 * spec.B + 1);
  for (int k = 0; k <= 2 * spec.B; ++k) s[k] = moment(k, spec.p, spec.sidedness);
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = s[i + j];

  AlphaMatrix alpha;
  alpha.a = MatrixXd::Zero(n, n);
  alpha.p = spec.p;
  alpha.sidedness = spec.sidedness;
  for (int k = 0; k < n; ++k) {
    VectorXd v = VectorXd::Unit(n, k);
    for (int j = 0; j < k; ++j) {
      const double proj = alpha.a.row(j) * m * v;
      v -= proj * alpha.a.row(j).transpose();
    }
    const double norm2 = v.transpose() * m * v;
    if (!(norm2 > 0.0) || !std::isfinite(norm2))
      throw conditioning_error("orthonormalization lost positive definiteness at degree " +
                               std::to_string(k));
    v /= std::sqrt(norm2);
    if (v[k] < 0.0) v = -v;
    alpha.a.row(k) = v.transpose();
  }
  return alpha;
}

AlphaMatrix alpha_closed_form(double p) {
  require_pole(p);
  AlphaMatrix alpha;
  alpha.p = p;
  alpha.sidedness = Sidedness::Causal;
  alpha.a = MatrixXd::Zero(3, 3);
  const double r5 = std::sqrt(std::pow(1.0 - p, 5));
  alpha.a(0, 0) = std::sqrt(1.0 - p);
  alpha.a(1, 0) = -std::sqrt(p * (1.0 - p));
  alpha.a(1, 1) = std::sqrt(std::pow(1.0 - p, 3) / p);
  alpha.a(2, 0) = p * r5 / ((1.0 - p) * (1.0 - p));
  alpha.a(2, 1) = -(3.0 * p + 1.0) * r5 / (2.0 * p * (1.0 - p));
  alpha.a(2, 2) = r5 / (2.0 * p);
  return alpha;
}

double eval_basis(const AlphaMatrix& alpha, int k, double m) {
  if (k < 0 || k > alpha.order())
    throw config_error("basis index k out of range");
  double acc = 0.0;
  for (int j = alpha.order(); j >= 0; --j) acc = acc * m + alpha.a(k, j);
  return acc;
}

}  // namespace lagfilt
