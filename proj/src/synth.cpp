#include "lagfilt/synth.hpp"

#include "lagfilt/basis.hpp"

#include <cmath>
#include <limits>

namespace lagfilt {
namespace {

VectorXd poly_mul(const VectorXd& a, const VectorXd& b) {
  VectorXd r = VectorXd::Zero(a.size() + b.size() - 1);
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

VectorXd poly_add(const VectorXd& a, const VectorXd& b) {
  VectorXd r = VectorXd::Zero(std::max(a.size(), b.size()));
  r.head(a.size()) += a;
  r.head(b.size()) += b;
  return r;
}

// E_j(u): numerator of Z{m^j p^m} over (1-pu)^(j+1).
VectorXd component_numerator(int j, double p) {
  VectorXd e = VectorXd::Ones(1);
  for (int i = 0; i < j; ++i) {
    VectorXd de = VectorXd::Zero(std::max<Eigen::Index>(1, e.size() - 1));
    for (int d = 1; d < e.size(); ++d) de[d - 1] = d * e[d];
    VectorXd one_pu(2);
    one_pu << 1.0, -p;
    VectorXd inner = poly_add(poly_mul(de, one_pu), p * (i + 1) * e);
    e = VectorXd::Zero(inner.size() + 1);
    e.tail(inner.size()) = inner;  // multiply by u
  }
  return e;
}

VectorXd one_minus_pu_pow(double p, int k) {
  VectorXd r = VectorXd::Ones(1);
  VectorXd f(2);
  f << 1.0, -p;
  for (int i = 0; i < k; ++i) r = poly_mul(r, f);
  return r;
}

// Backward kernel c(-m): odd monomial coefficients change sign.
VectorXd flip_kernel(const VectorXd& c) {
  VectorXd r = c;
  for (int j = 1; j < r.size(); j += 2) r[j] = -r[j];
  return r;
}

VectorXd phi(double q, int B) {
  VectorXd r(B + 1);
  double acc = 1.0;
  for (int j = 0; j <= B; ++j) {
    r[j] = acc;
    acc *= q;
  }
  return r;
}

std::complex<double> poly_eval(const VectorXd& c, std::complex<double> u) {
  std::complex<double> acc(0.0, 0.0);
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = acc * u + c[i];
  return acc;
}

LdeCoeffs make_lde(const VectorXd& num, const VectorXd& den, Direction dir) {
  LdeCoeffs c;
  c.a = den;
  c.b = VectorXd::Zero(den.size());
  c.b.head(num.size()) = num;
  c.direction = dir;
  return c;
}

}  // namespace

RationalTf weighted_component_tf(int khat, double p) {
  require_pole(p);
  if (khat < 0 || khat > 6) throw config_error("component order out of range");
  RationalTf tf;
  tf.num = component_numerator(khat, p);
  tf.den = one_minus_pu_pow(p, khat + 1);
  return tf;
}

LdeCoeffs kernel_filter_causal(const VectorXd& c, double p) {
  require_pole(p);
  const int D = static_cast<int>(c.size()) - 1;
  VectorXd num = VectorXd::Zero(1);
  for (int j = 0; j <= D; ++j)
    num = poly_add(num, c[j] * poly_mul(component_numerator(j, p),
                                        one_minus_pu_pow(p, D - j)));
  return make_lde(num, one_minus_pu_pow(p, D + 1), Direction::Fwd);
}

RealizedFilter kernel_filter_two_sided(const VectorXd& c, double p) {
  require_pole(p);
  // Each direction takes Z{c(m) p^m}[m >= 0] minus half the shared m = 0 tap,
  // so the summed fwd and bwd passes weight every sample once.
  auto half = [&](const VectorXd& cc, Direction dir) {
    LdeCoeffs lde = kernel_filter_causal(cc, p);
    lde.b -= 0.5 * cc[0] * lde.a;
    lde.direction = dir;
    return lde;
  };
  bool even = true, odd = true;
  for (int j = 0; j < c.size(); ++j) {
    if (c[j] != 0.0) (j % 2 ? even : odd) = false;
  }
  const Direction tag = even ? Direction::FwdBwdShared
                      : odd  ? Direction::FwdBwdAntisym
                             : Direction::Fwd;
  RealizedFilter f;
  f.sidedness = Sidedness::TwoSided;
  f.fwd = half(c, tag == Direction::Fwd ? Direction::Fwd : tag);
  f.bwd = half(flip_kernel(c), tag == Direction::Fwd ? Direction::Bwd : tag);
  return f;
}

RealizedFilter analysis_filter(int k, double p, Sidedness sidedness, int B) {
  if (k < 0 || k > B) throw config_error("analysis index k must lie in 0..B");
  const AlphaMatrix alpha = gram_schmidt({B, p, sidedness});
  const VectorXd kernel = alpha.a.row(k).head(k + 1).transpose();
  if (sidedness == Sidedness::TwoSided) return kernel_filter_two_sided(kernel, p);
  RealizedFilter f;
  f.sidedness = Sidedness::Causal;
  f.fwd = kernel_filter_causal(kernel, p);
  return f;
}

RealizedFilter synthesis_filter(double p, double q, Sidedness sidedness, int B) {
  if (sidedness == Sidedness::TwoSided && q != 0.0)
    throw config_error("two-sided synthesis filters require q = 0");
  const AlphaMatrix alpha = gram_schmidt({B, p, sidedness});
  const VectorXd kernel = alpha.a.transpose() * (alpha.a * phi(q, B));
  if (sidedness == Sidedness::TwoSided) return kernel_filter_two_sided(kernel, p);
  RealizedFilter f;
  f.sidedness = Sidedness::Causal;
  f.fwd = kernel_filter_causal(kernel, p);
  return f;
}

LdeCoeffs derivative_filter(double p, double q) {
  const AlphaMatrix alpha = gram_schmidt({2, p, Sidedness::Causal});
  // phi(q)^T B A^T A with B mapping the fit to its derivative in sample time.
  VectorXd bphi(3);
  bphi << 0.0, -1.0, -2.0 * q;
  const VectorXd kernel = alpha.a.transpose() * (alpha.a * bphi);
  return kernel_filter_causal(kernel, p);
}

RealizedFilter analysis_filter_closed_form(int k, double p, Sidedness sidedness) {
  require_pole(p);
  RealizedFilter f;
  f.sidedness = sidedness;
  const double omp = 1.0 - p;
  if (sidedness == Sidedness::Causal) {
    LdeCoeffs& c = f.fwd;
    switch (k) {
      case 0:
        c.b = VectorXd::Zero(2);
        c.a = VectorXd(2);
        c.b[0] = std::sqrt(omp);
        c.a << 1.0, -p;
        break;
      case 1: {
        const double cc = -std::sqrt(p * omp * omp * omp) / omp;
        c.b = VectorXd::Zero(3);
        c.a = VectorXd(3);
        c.b[0] = cc;
        c.b[1] = -cc;
        c.a << 1.0, -2.0 * p, p * p;
        break;
      }
      case 2: {
        const double cc = p * std::sqrt(std::pow(omp, 5)) / (omp * omp);
        c.b = VectorXd::Zero(4);
        c.a = VectorXd(4);
        c.b[0] = cc;
        c.b[1] = -2.0 * cc;
        c.b[2] = cc;
        c.a << 1.0, -3.0 * p, 3.0 * p * p, -p * p * p;
        break;
      }
      default:
        throw config_error("analysis index k must be 0..2");
    }
    return f;
  }
  switch (k) {
    case 0: {
      const double cc = 0.5 * std::sqrt(omp / (1.0 + p));
      f.fwd.b = VectorXd(2);
      f.fwd.a = VectorXd(2);
      f.fwd.b << cc, cc * p;
      f.fwd.a << 1.0, -p;
      f.fwd.direction = Direction::FwdBwdShared;
      f.bwd = f.fwd;
      break;
    }
    case 1: {
      const double b1 = 0.5 * std::sqrt(2.0 * p * omp * omp * omp / (1.0 + p));
      f.fwd.b = VectorXd::Zero(3);
      f.fwd.a = VectorXd(3);
      f.fwd.b[1] = b1;
      f.fwd.a << 1.0, -2.0 * p, p * p;
      f.fwd.direction = Direction::FwdBwdAntisym;
      f.bwd = f.fwd;
      f.bwd.b[1] = -b1;
      break;
    }
    case 2: {
      const double cc =
          std::sqrt(2.0) * omp * omp * std::sqrt(p * p * p + 9.0 * p * p + 9.0 * p + 1.0);
      const double r5 = std::sqrt(p * std::pow(omp, 5));
      const double s = p * p - p + 1.0;
      f.fwd.b = VectorXd(4);
      f.fwd.a = VectorXd(4);
      f.fwd.b << -r5 / cc, r5 * s / cc, r5 * p * s / cc, -r5 * p * p * p / cc;
      f.fwd.a << 1.0, -3.0 * p, 3.0 * p * p, -p * p * p;
      f.fwd.direction = Direction::FwdBwdShared;
      f.bwd = f.fwd;
      break;
    }
    default:
      throw config_error("analysis index k must be 0..2");
  }
  return f;
}

RealizedFilter synthesis_filter_closed_form(double p, double q, Sidedness sidedness) {
  require_pole(p);
  RealizedFilter f;
  f.sidedness = sidedness;
  VectorXd a(4);
  a << 1.0, -3.0 * p, 3.0 * p * p, -p * p * p;
  if (sidedness == Sidedness::Causal) {
    const double cc = (1.0 - p) / 2.0;
    const double p2 = p * p, q2 = q * q;
    f.fwd.b = VectorXd(4);
    f.fwd.a = a;
    f.fwd.b[0] = cc * (q2 * p2 + 3.0 * q * p2 + 2.0 * p2 - 2.0 * q2 * p + 2.0 * p + q2 - 3.0 * q + 2.0);
    f.fwd.b[1] = -cc * (2.0 * q2 * p2 + 8.0 * q * p2 + 6.0 * p2 - 4.0 * q2 * p - 4.0 * q * p + 6.0 * p + 2.0 * q2 - 4.0 * q);
    f.fwd.b[2] = cc * (q2 * p2 + 5.0 * q * p2 + 6.0 * p2 - 2.0 * q2 * p - 4.0 * q * p + q2 - q);
    f.fwd.b[3] = 0.0;
    return f;
  }
  if (q != 0.0) throw config_error("two-sided synthesis filters require q = 0");
  const double cc = 2.0 * (p * p + 8.0 * p + 1.0);
  const double edge = (p * p + 10.0 * p + 1.0) * (1.0 - p) / (1.0 + p);
  f.fwd.b = VectorXd(4);
  f.fwd.a = a;
  f.fwd.b << edge / cc, 3.0 * p * (p * p - 1.0) / cc, 3.0 * p * p * (p * p - 1.0) / cc,
      p * p * p * edge / cc;
  f.fwd.direction = Direction::FwdBwdShared;
  f.bwd = f.fwd;
  return f;
}

RationalTf to_tf(const LdeCoeffs& coeffs) { return {coeffs.b, coeffs.a}; }

RationalTf highpass_from_lowpass(const RationalTf& lpf, int q) {
  if (q < 0) throw config_error("high-pass delay q must be a non-negative integer");
  RationalTf hp;
  hp.den = lpf.den;
  hp.num = VectorXd::Zero(std::max<Eigen::Index>(lpf.den.size() + q, lpf.num.size()));
  hp.num.segment(q, lpf.den.size()) = lpf.den;
  hp.num.head(lpf.num.size()) -= lpf.num;
  return hp;
}

RationalTf exp_average_hpf(double p) {
  require_pole(p);
  RationalTf tf;
  tf.num = VectorXd(3);
  tf.den = VectorXd(3);
  tf.num << 1.0, -2.0, 1.0;
  tf.den << 1.0, -(1.0 + p * p) / p, 1.0;
  return tf;
}

std::complex<double> freq_response(const RationalTf& tf, double f) {
  const std::complex<double> u = std::polar(1.0, -2.0 * M_PI * f);
  return poly_eval(tf.num, u) / poly_eval(tf.den, u);
}

std::complex<double> freq_response(const RealizedFilter& filt, double f) {
  const std::complex<double> fwd = freq_response(to_tf(filt.fwd), f);
  if (filt.causal()) return fwd;
  return fwd + std::conj(freq_response(to_tf(filt.bwd), f));
}

double magnitude_db(const std::complex<double>& h) {
  return 20.0 * std::log10(std::max(std::abs(h), 1e-300));
}

namespace {

template <typename Mag2>
int count_flat_orders(Mag2&& g, bool even_only) {
  const double g0 = g(0.0);
  const double scale = std::max(1.0, std::abs(g0));
  const double tol = 1e-6 * scale;

  auto stencil = [&](int order, double h) {
    switch (order) {
      case 1: return (g(h) - g(-h)) / (2.0 * h);
      case 2: return (g(h) - 2.0 * g0 + g(-h)) / (h * h);
      case 3: return (g(2 * h) - 2.0 * g(h) + 2.0 * g(-h) - g(-2 * h)) / (2.0 * h * h * h);
      default:
        return (g(2 * h) - 4.0 * g(h) + 6.0 * g0 - 4.0 * g(-h) + g(-2 * h)) / (h * h * h * h);
    }
  };
  auto deriv = [&](int order) {
    const double h = 1e-3;
    return (4.0 * stencil(order, h / 2.0) - stencil(order, h)) / 3.0;
  };

  int count = 0;
  for (int order = even_only ? 2 : 1; order <= 4; order += even_only ? 2 : 1) {
    if (std::abs(deriv(order)) >= tol) break;
    ++count;
  }
  return count;
}

}  // namespace

int flatness_orders(const RationalTf& tf) {
  return count_flat_orders([&](double w) { return std::norm(freq_response(tf, w / (2.0 * M_PI))); },
                           false);
}

int flatness_orders(const RealizedFilter& filt) {
  return count_flat_orders(
      [&](double w) { return std::norm(freq_response(filt, w / (2.0 * M_PI))); }, false);
}

int flatness_orders_even(const RationalTf& tf) {
  return count_flat_orders([&](double w) { return std::norm(freq_response(tf, w / (2.0 * M_PI))); },
                           true);
}

int flatness_orders_even(const RealizedFilter& filt) {
  return count_flat_orders(
      [&](double w) { return std::norm(freq_response(filt, w / (2.0 * M_PI))); }, true);
}

VectorXd impulse_response(const LdeCoeffs& coeffs, int n) {
  if (n < 1) throw config_error("impulse-response length must be >= 1");
  VectorXd y = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = i < coeffs.b.size() ? coeffs.b[i] : 0.0;
    for (int m = 1; m < coeffs.a.size() && m <= i; ++m) acc -= coeffs.a[m] * y[i - m];
    y[i] = acc;
  }
  return y;
}

std::vector<std::complex<double>> pole_locations(const LdeCoeffs& coeffs) {
  int deg = static_cast<int>(coeffs.a.size()) - 1;
  while (deg > 0 && coeffs.a[deg] == 0.0) --deg;
  std::vector<std::complex<double>> poles;
  if (deg == 0) return poles;
  MatrixXd companion = MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) companion(0, i) = -coeffs.a[i + 1] / coeffs.a[0];
  companion.block(1, 0, deg - 1, deg - 1).setIdentity();
  // companion eigenvalues are the reciprocals of the roots in u = z^-1,
  // i.e. the z-plane poles directly.
  Eigen::EigenSolver<MatrixXd> es(companion, /*computeEigenvectors=*/false);
  for (int i = 0; i < deg; ++i) poles.push_back(es.eigenvalues()[i]);
  return poles;
}

double vrf(double p, double q) {
  require_pole(p);
  VectorXd f(3);
  f << 1.0, p - q + p * q,
      2.0 * p * q * (p - 1.0) + 0.5 * q * (p - 1.0) * (p - 1.0) * (q - 1.0) + p * p;
  const double op = 1.0 + p;
  MatrixXd a(3, 3);
  a << 1.0 / op, 1.0 / (op * op), 1.0 / (op * op * op),
      1.0 / (op * op), 2.0 / (op * op * op), 3.0 / (op * op * op * op),
      1.0 / (op * op * op), 3.0 / (op * op * op * op), 6.0 / (op * op * op * op * op);
  return (1.0 - p) * f.dot(a * f);
}

double q_opt(double p) {
  require_pole(p);
  return (4.0 * p - std::sqrt(2.0 * (p * p + 4.0 * p + 1.0)) + 2.0) / (2.0 * (1.0 - p));
}

double power_norm(double p_x, double p_y, double p_z) {
  require_pole(p_x);
  require_pole(p_y);
  require_pole(p_z);
  return 1.0 /
         ((2.0 / (1.0 - p_x) - 1.0) * (2.0 / (1.0 - p_y) - 1.0) * (1.0 / (1.0 - p_z)));
}

}  // namespace lagfilt
