#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <lagfilt/basis.hpp>
#include <lagfilt/engine.hpp>
#include <lagfilt/synth.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using namespace lagfilt;

namespace {

const double kPQuarter = std::exp(-0.25);
const double kPHalf = std::exp(-0.5);

// Published 4-decimal coefficient rows, dense up to order 3.
void check_row(const VectorXd& got, const std::vector<double>& printed, double tol = 5e-5) {
  REQUIRE(got.size() <= static_cast<long>(printed.size()));
  for (std::size_t j = 0; j < printed.size(); ++j) {
    const double have = j < static_cast<std::size_t>(got.size()) ? got(j) : 0.0;
    CAPTURE(j);
    CHECK(std::abs(have - printed[j]) < tol);
  }
}

}  // namespace

TEST_CASE("printed causal smoother coefficients (sigma -1/4, q 4)") {
  const RealizedFilter f = synthesis_filter(kPQuarter, 4.0, Sidedness::Causal);
  REQUIRE(f.causal());
  check_row(f.fwd.b, {0.0920, -0.0913, 0.0102, 0.0});
  check_row(f.fwd.a, {1.0, -2.3364, 1.8196, -0.4724});
}

TEST_CASE("printed two-sided smoother coefficients (sigma -1/2)") {
  const RealizedFilter f = synthesis_filter(kPHalf, 0.0, Sidedness::TwoSided);
  REQUIRE(!f.causal());
  REQUIRE(f.fwd.direction == Direction::FwdBwdShared);
  check_row(f.fwd.b, {0.1463, -0.0925, -0.0561, 0.0327});
  check_row(f.fwd.a, {1.0, -1.8196, 1.1036, -0.2231});
}

TEST_CASE("printed causal analysis bank (sigma -1/4)") {
  const RealizedFilter f0 = analysis_filter(0, kPQuarter, Sidedness::Causal);
  check_row(f0.fwd.b, {0.4703, 0.0, 0.0, 0.0});
  check_row(f0.fwd.a, {1.0, -0.7788, 0.0, 0.0});

  const RealizedFilter f1 = analysis_filter(1, kPQuarter, Sidedness::Causal);
  check_row(f1.fwd.b, {-0.4151, 0.4151, 0.0, 0.0});
  check_row(f1.fwd.a, {1.0, -1.5576, 0.6065, 0.0});

  const RealizedFilter f2 = analysis_filter(2, kPQuarter, Sidedness::Causal);
  check_row(f2.fwd.b, {0.3663, -0.7326, 0.3663, 0.0});
  check_row(f2.fwd.a, {1.0, -2.3364, 1.8196, -0.4724});
}

TEST_CASE("printed two-sided analysis bank (sigma -1/2)") {
  const RealizedFilter f0 = analysis_filter(0, kPHalf, Sidedness::TwoSided);
  REQUIRE(f0.fwd.direction == Direction::FwdBwdShared);
  check_row(f0.fwd.b, {0.2474, 0.1501, 0.0, 0.0});
  check_row(f0.fwd.a, {1.0, -0.6065});

  const RealizedFilter f1 = analysis_filter(1, kPHalf, Sidedness::TwoSided);
  REQUIRE(f1.fwd.direction == Direction::FwdBwdAntisym);
  CHECK(std::abs(f1.fwd.b(0)) < 5e-5);
  CHECK(std::abs(std::abs(f1.fwd.b(1)) - 0.1072) < 5e-5);
  check_row(f1.fwd.a, {1.0, -1.2131, 0.3679});
  // Antisymmetric halves: backward numerator is the negated forward one.
  CHECK((f1.bwd.b + f1.fwd.b).cwiseAbs().maxCoeff() == 0.0);

  const RealizedFilter f2 = analysis_filter(2, kPHalf, Sidedness::TwoSided);
  check_row(f2.fwd.b, {-0.1093, 0.0832, 0.0505, -0.0244});
  check_row(f2.fwd.a, {1.0, -1.8196, 1.1036, -0.2231});
}

TEST_CASE("constructive route agrees with the closed forms") {
  for (double p : {0.3, kPHalf, kPQuarter, 0.9}) {
    for (int k = 0; k <= 2; ++k)
      for (Sidedness s : {Sidedness::Causal, Sidedness::TwoSided}) {
        const RealizedFilter a = analysis_filter(k, p, s);
        const RealizedFilter b = analysis_filter_closed_form(k, p, s);
        CHECK((a.fwd.b - b.fwd.b).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((a.fwd.a - b.fwd.a).cwiseAbs().maxCoeff() < 1e-12);
      }
    for (double q : {0.0, 1.0, 4.0}) {
      const RealizedFilter a = synthesis_filter(p, q, Sidedness::Causal);
      const RealizedFilter b = synthesis_filter_closed_form(p, q, Sidedness::Causal);
      CHECK((a.fwd.b - b.fwd.b).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((a.fwd.a - b.fwd.a).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("causal analysis impulse response is the weighted basis function") {
  const double p = 0.65;
  const AlphaMatrix alpha = gram_schmidt({2, p, Sidedness::Causal});
  for (int k = 0; k <= 2; ++k) {
    const VectorXd h = impulse_response(analysis_filter(k, p, Sidedness::Causal).fwd, 40);
    for (int m = 0; m < 40; ++m)
      CHECK(h(m) == doctest::Approx(eval_basis(alpha, k, m) * std::pow(p, m)).epsilon(1e-10));
  }
}

TEST_CASE("two-sided halves realize the symmetric kernel") {
  const double p = 0.55;
  VectorXd c(3);
  c << 0.7, -0.3, 0.05;
  const RealizedFilter f = kernel_filter_two_sided(c, p);
  // Unit impulse mid-sequence; the response must equal c(|m|') with the
  // kernel evaluated at signed offsets (polynomial in m, weight in |m|).
  ArrayXd x = ArrayXd::Zero(41);
  x(20) = 1.0;
  const ArrayXd y = filter_1d_noncausal(f, x);
  for (int n = 0; n < 41; ++n) {
    const double m = n - 20;  // kernel offset
    const double want = (c(0) + c(1) * m + c(2) * m * m) * std::pow(p, std::abs(m));
    CHECK(y(n) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("synthesis filters have exactly unit DC gain") {
  for (double p : {0.3, kPHalf, kPQuarter})
    for (double q : {0.0, 2.0, 4.6}) {
      const RealizedFilter f = synthesis_filter(p, q, Sidedness::Causal);
      CHECK(std::abs(freq_response(f, 0.0) - 1.0) < 1e-12);
    }
  const RealizedFilter g = synthesis_filter(kPHalf, 0.0, Sidedness::TwoSided);
  CHECK(std::abs(freq_response(g, 0.0) - 1.0) < 1e-12);
}

TEST_CASE("two-sided response has zero phase") {
  const RealizedFilter g = synthesis_filter(kPHalf, 0.0, Sidedness::TwoSided);
  for (double f : {0.01, 0.1, 0.25, 0.49}) {
    CHECK(std::abs(std::imag(freq_response(g, f))) < 1e-12);
  }
}

TEST_CASE("derivative filter differentiates the fit") {
  const double p = kPQuarter;
  const LdeCoeffs d = derivative_filter(p, 4.0);
  ArrayXd ramp(400), quad(400);
  for (int n = 0; n < 400; ++n) {
    ramp(n) = n;
    quad(n) = double(n) * n;
  }
  const ArrayXd yr = filter_1d(d, ramp);
  const ArrayXd yq = filter_1d(d, quad);
  CHECK(yr(399) == doctest::Approx(1.0).epsilon(1e-9));
  // d/dn (n - q)^2 at the evaluation point.
  CHECK(yq(399) == doctest::Approx(2.0 * (399.0 - 4.0)).epsilon(1e-9));
}

TEST_CASE("poles sit at the design radius") {
  const RealizedFilter f = synthesis_filter(kPQuarter, 4.0, Sidedness::Causal);
  const auto poles = pole_locations(f.fwd);
  REQUIRE(poles.size() == 3);
  // A numerically extracted triple root is only cube-root-of-eps accurate;
  // the root product is well conditioned and pins the radius tightly.
  double product = 1.0;
  for (const auto& z : poles) {
    CHECK(std::abs(std::abs(z) - kPQuarter) < 1e-4);
    product *= std::abs(z);
  }
  CHECK(product == doctest::Approx(std::pow(kPQuarter, 3)).epsilon(1e-12));
}

TEST_CASE("variance reduction factor") {
  CHECK(vrf(kPQuarter, 4.0) == doctest::Approx(0.09658900052290234).epsilon(1e-12));
}

TEST_CASE("vrf equals the impulse-response energy") {
  for (auto [p, q] : std::vector<std::pair<double, double>>{
           {0.3, 0.0}, {kPHalf, 2.0}, {kPQuarter, 4.0}, {0.9, 6.0}}) {
    const VectorXd h = impulse_response(synthesis_filter(p, q, Sidedness::Causal).fwd, 3000);
    CHECK(vrf(p, q) == doctest::Approx(h.squaredNorm()).epsilon(1e-9));
  }
}

TEST_CASE("vrf matches filtered white-noise variance") {
  // Small-N version of the Monte-Carlo check; the acceptance runner uses 1e6.
  const double p = kPQuarter, q = 4.0;
  const RealizedFilter f = synthesis_filter(p, q, Sidedness::Causal);
  std::mt19937_64 gen(99);
  ArrayXd x(200000);
  for (long i = 0; i < x.size(); ++i) {
    // Box-Muller pair; only the cosine deviate is used for simplicity.
    const double u1 = 1.0 - ((gen() >> 11) * 0x1p-53);
    const double u2 = (gen() >> 11) * 0x1p-53;
    x(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  const ArrayXd y = filter_1d(f.fwd, x);
  const ArrayXd tail = y.tail(y.size() - 500);
  const double var = (tail - tail.mean()).square().sum() / (tail.size() - 1);
  CHECK(var == doctest::Approx(vrf(p, q)).epsilon(0.05));
}

TEST_CASE("optimal offset and its Nyquist zero") {
  const double qo = q_opt(kPQuarter);
  CHECK(qo == doctest::Approx(4.616156901628225).epsilon(1e-12));
  CHECK(vrf(kPQuarter, qo - 0.01) > vrf(kPQuarter, qo));
  CHECK(vrf(kPQuarter, qo + 0.01) > vrf(kPQuarter, qo));
  // Numerator vanishes at z = -1 (u = -1).
  const RealizedFilter f = synthesis_filter(kPQuarter, qo, Sidedness::Causal);
  double at_m1 = 0.0;
  for (int j = 0; j < f.fwd.b.size(); ++j) at_m1 += f.fwd.b(j) * ((j % 2) ? -1.0 : 1.0);
  CHECK(std::abs(at_m1) < 1e-9);
}

TEST_CASE("power normalization constant") {
  const double p = kPHalf;
  CHECK(power_norm(p, p, p) == doctest::Approx(0.023602317867192402).epsilon(1e-12));
  const double mx = 2.0 / (1.0 - p) - 1.0;
  CHECK(power_norm(p, p, p) == doctest::Approx(1.0 / (mx * mx * (1.0 / (1.0 - p)))).epsilon(1e-13));
}

TEST_CASE("smoother magnitude response is maximally flat") {
  CHECK(flatness_orders(synthesis_filter(kPQuarter, 4.0, Sidedness::Causal)) == 3);
  CHECK(flatness_orders(synthesis_filter(kPHalf, 0.0, Sidedness::TwoSided)) == 3);
  CHECK(flatness_orders_even(synthesis_filter(kPQuarter, 4.0, Sidedness::Causal)) == 1);
  // Degree-0 fallback keeps only the trivial odd-order flatness.
  CHECK(flatness_orders(synthesis_filter(kPHalf, 0.0, Sidedness::Causal, 0)) == 1);
}

TEST_CASE("background-cancelling high-pass notch") {
  const RealizedFilter lpf = synthesis_filter(kPQuarter, 4.0, Sidedness::Causal);
  const RationalTf hpf = highpass_from_lowpass(to_tf(lpf.fwd), 4);
  CHECK(std::abs(freq_response(hpf, 0.0)) < 1e-12);
  // Frozen attenuation figures for the default temporal design.
  CHECK(-magnitude_db(freq_response(hpf, 0.03)) == doctest::Approx(15.420).epsilon(5e-4));
  CHECK(-magnitude_db(freq_response(hpf, 0.06)) == doctest::Approx(5.498).epsilon(5e-4));
}

TEST_CASE("degree-0 two-sided high-pass closed form") {
  const double p = kPHalf;
  const RationalTf hpf = exp_average_hpf(p);
  CHECK(std::abs(freq_response(hpf, 0.0)) < 1e-12);
  // Compare against 1 - H for the realized two-sided average.
  const RealizedFilter avg = synthesis_filter(p, 0.0, Sidedness::TwoSided, 0);
  for (double f : {0.02, 0.1, 0.3})
    CHECK(std::abs(freq_response(hpf, f) - (1.0 - freq_response(avg, f))) < 1e-12);
}

TEST_CASE("design argument validation") {
  CHECK_THROWS_AS(synthesis_filter(kPHalf, 1.0, Sidedness::TwoSided), config_error);
  CHECK_THROWS_AS(analysis_filter(3, kPHalf, Sidedness::Causal), config_error);
  CHECK_THROWS_AS(analysis_filter(-1, kPHalf, Sidedness::Causal), config_error);
  CHECK_THROWS_AS(synthesis_filter(1.5, 0.0, Sidedness::Causal), config_error);
  CHECK_THROWS_AS(derivative_filter(1.5, 0.0), config_error);
  // Negative q is a legitimate prediction offset, for smoothing and gradient
  // estimation alike.
  CHECK_NOTHROW(derivative_filter(kPHalf, -1.0));
  CHECK_NOTHROW(synthesis_filter(kPHalf, -1.0, Sidedness::Causal));
}
