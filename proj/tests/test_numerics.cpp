#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "qtp/errors.hpp"
#include "qtp/numerics.hpp"

using namespace qtp;

namespace {

std::vector<double> sample(const Grid1D& g, double (*f)(double)) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g[i]);
  return v;
}

Mat2 random_herm(std::mt19937& rng) {
  std::normal_distribution<double> n;
  Mat2 m;
  m(0, 0) = n(rng);
  m(1, 1) = n(rng);
  m(0, 1) = cplx(n(rng), n(rng));
  m(1, 0) = std::conj(m(0, 1));
  return m;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS(Grid1D(1.0, 1.0, 10));
  CHECK_THROWS(Grid1D(0.0, 1.0, 1));
  Grid1D g(0.0, 1.0, 11);
  CHECK(g.spacing() == doctest::Approx(0.1));
  CHECK(g.half_grid().size() == 21);
  CHECK(g.half_grid()[3] == doctest::Approx(0.5 * (g[1] + g[2])));
}

TEST_CASE("integrate_1d on simple integrands") {
  Grid1D unit(0.0, 1.0, 101);
  CHECK(integrate_1d(unit, sample(unit, [](double) { return 1.0; })) == 1.0);

  Grid1D sym(-1.0, 1.0, 101);
  CHECK(std::abs(integrate_1d(sym, sample(sym, [](double x) { return x; }))) < 1e-14);

  Grid1D wide(-8.0, 8.0, 2001);
  const auto g = sample(wide, [](double x) { return std::exp(-x * x); });
  CHECK(std::abs(integrate_1d(wide, g) - std::sqrt(std::numbers::pi)) < 1e-10);
  CHECK(std::abs(integrate_1d(wide, g, Quadrature::Simpson) - std::sqrt(std::numbers::pi)) < 1e-10);
}

TEST_CASE("integrate_1d rejects non-finite samples and even Simpson grids") {
  Grid1D g(0.0, 1.0, 5);
  std::vector<double> f{1, 2, NAN, 4, 5};
  CHECK_THROWS_AS(integrate_1d(g, f), NumericError);
  CHECK_THROWS(quadrature_weights(Grid1D(0.0, 1.0, 4), Quadrature::Simpson));
}

TEST_CASE("integrate_1d is linear") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  Grid1D g(0.0, 3.0, 301);
  std::vector<double> f(g.size()), h(g.size()), mix(g.size());
  const double a = 1.7, b = -0.4;
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = u(rng);
    h[i] = u(rng);
    mix[i] = a * f[i] + b * h[i];
  }
  const double lhs = integrate_1d(g, mix);
  const double rhs = a * integrate_1d(g, f) + b * integrate_1d(g, h);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
}

TEST_CASE("eig_herm2 textbook cases") {
  SUBCASE("identity") {
    const auto e = eig_herm2(Mat2::Identity());
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(e.degenerate);
    CHECK(std::abs(e.vectors[0].dot(e.vectors[1])) < 1e-12);
  }
  SUBCASE("diagonal") {
    Mat2 m = Mat2::Zero();
    m(0, 0) = 2;
    m(1, 1) = 1;
    const auto e = eig_herm2(m);
    CHECK(e.values[0] == doctest::Approx(2.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors[0](0) - 1.0) < 1e-12);
    CHECK(std::abs(e.vectors[1](1) - 1.0) < 1e-12);
  }
  SUBCASE("pauli x") {
    Mat2 m = Mat2::Zero();
    m(0, 1) = m(1, 0) = 1;
    const auto e = eig_herm2(m);
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(-1.0));
    const double r = 1 / std::sqrt(2.0);
    CHECK(std::abs(e.vectors[0](0) - r) < 1e-12);
    CHECK(std::abs(e.vectors[0](1) - r) < 1e-12);
    CHECK(std::abs(e.vectors[1](0) - r) < 1e-12);
    CHECK(std::abs(e.vectors[1](1) + r) < 1e-12);
  }
  SUBCASE("non-hermitian input") {
    Mat2 m = Mat2::Zero();
    m(0, 1) = 1;
    CHECK_THROWS(eig_herm2(m));
  }
}

TEST_CASE("eig_herm2 reconstructs random hermitian matrices") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat2 m = random_herm(rng);
    const auto e = eig_herm2(m);
    CHECK(e.values[0] >= e.values[1]);
    Mat2 rec = Mat2::Zero();
    for (int s = 0; s < 2; ++s) rec += e.values[s] * e.vectors[s] * e.vectors[s].adjoint();
    CHECK((m - rec).norm() <= 1e-10 * m.norm());
    CHECK(std::abs(e.vectors[0].dot(e.vectors[1])) < 1e-12);
    CHECK(std::abs(e.vectors[0].norm() - 1.0) < 1e-12);
    for (int s = 0; s < 2; ++s) {
      const Vec2& v = e.vectors[s];
      const cplx first = std::abs(v(0)) > 0 ? v(0) : v(1);
      CHECK(std::abs(first.imag()) < 1e-12);
      CHECK(first.real() > 0);
    }
  }
}

TEST_CASE("oscillatory_double_integral") {
  Grid1D g(1.0, 9.0, 161);
  const double L = 3.0, t = 1.0;

  SUBCASE("zero field") {
    ComplexField2 F(g, g);
    CHECK(std::abs(oscillatory_double_integral(F, dispersion_phase(0.0), t, L).value) == 0.0);
  }

  SUBCASE("separable massless field matches the 1D transform") {
    std::vector<cplx> a(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) a[i] = std::exp(-(g[i] - 5) * (g[i] - 5) / 2.0) * cplx(1, 0.3 * g[i]);
    const auto F = ComplexField2::outer(g, a, a);
    const auto r = oscillatory_double_integral(F, dispersion_phase(0.0), t, L);
    std::vector<cplx> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = a[i] * std::exp(cplx(0, g[i] * (L - t)));
    const cplx one = integrate_1d(g, f) / std::sqrt(2 * std::numbers::pi);
    CHECK(std::abs(r.value - std::norm(one)) < 1e-12 * std::norm(one));
  }

  SUBCASE("hermitian field gives a real value") {
    std::mt19937 rng(3);
    std::normal_distribution<double> n;
    ComplexField2 F(g, g);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const cplx v = i == j ? cplx(n(rng), 0) : cplx(n(rng), n(rng));
        F(i, j) = v;
        F(j, i) = std::conj(v);
      }
    const auto r = oscillatory_double_integral(F, dispersion_phase(1.0), t, L);
    CHECK(std::abs(r.value.imag()) < 1e-10 * std::abs(r.value));
  }

  SUBCASE("coarse grids are flagged") {
    Grid1D coarse(1.0, 9.0, 9);
    ComplexField2 F(coarse, coarse);
    const auto r = oscillatory_double_integral(F, dispersion_phase(0.0), 0.0, 100.0);
    CHECK(r.coarse_phase);
    CHECK(r.max_phase_step > std::numbers::pi / 4);
  }
}

TEST_CASE("hermitian flag") {
  Grid1D g(0.0, 1.0, 4);
  auto F = ComplexField2::sample(g, g, [](double x, double y) { return cplx(x * y, x - y); });
  CHECK_NOTHROW(F.mark_hermitian());
  CHECK(F.hermitian());
  auto G = ComplexField2::sample(g, g, [](double x, double y) { return cplx(x + 2 * y, 0); });
  CHECK_THROWS_AS(G.mark_hermitian(), NumericError);
}

TEST_CASE("wigner_weyl") {
  Grid1D k(0.0, 10.0, 129);

  SUBCASE("narrow diagonal peak is concentrated at k0 and flat in x") {
    const double k0 = 5.0, s = 0.2;
    auto A = ComplexField2::sample(k, k, [&](double a, double b) {
      return cplx(std::exp(-((a - k0) * (a - k0) + (b - k0) * (b - k0)) / (4 * s * s)), 0);
    });
    const auto W = wigner_weyl(A);
    std::size_t x0 = 0;
    for (std::size_t ix = 0; ix < W.x.size(); ++ix)
      if (std::abs(W.x[ix]) < std::abs(W.x[x0])) x0 = ix;
    std::size_t best = 0;
    for (std::size_t ik = 0; ik < k.size(); ++ik)
      if (std::abs(W(ik, x0)) > std::abs(W(best, x0))) best = ik;
    CHECK(k[best] == doctest::Approx(k0));
    CHECK(std::abs(W(best, x0 + 1) / W(best, x0)) > 0.99);
  }

  SUBCASE("hermitian input gives real output and the diagonal marginal") {
    std::vector<cplx> a(k.size());
    for (std::size_t i = 0; i < k.size(); ++i)
      a[i] = std::exp(-(k[i] - 5) * (k[i] - 5) / 2.0) * std::exp(cplx(0, -3.0 * k[i]));
    const auto A = ComplexField2::outer(k, a, a);
    const auto W = wigner_weyl(A);
    double max_im = 0, max_re = 0;
    for (auto v : W.values) {
      max_im = std::max(max_im, std::abs(v.imag()));
      max_re = std::max(max_re, std::abs(v.real()));
    }
    CHECK(max_im < 1e-10 * max_re);
    for (std::size_t ik : {40u, 64u, 80u}) {
      std::vector<cplx> row(W.x.size());
      for (std::size_t ix = 0; ix < W.x.size(); ++ix) row[ix] = W(ik, ix);
      CHECK(std::abs(integrate_1d(W.x, row) - A(ik, ik)) < 1e-6 * std::abs(A(64, 64)));
    }
  }

  SUBCASE("symmetric zeta gives an even function of x") {
    auto Z = ComplexField2::sample(k, k, [](double a, double b) {
      return std::exp(-(a - 5) * (a - 5) / 2.0 - (b - 5) * (b - 5) / 2.0) * std::exp(cplx(0, 0.7 * (a + b)));
    });
    const auto W = wigner_weyl(Z);
    const std::size_t nx = W.x.size();
    double worst = 0, scale = 0;
    for (std::size_t ik = 0; ik < k.size(); ++ik)
      for (std::size_t ix = 0; ix < nx; ++ix) {
        worst = std::max(worst, std::abs(W(ik, ix) - W(ik, nx - 1 - ix)));
        scale = std::max(scale, std::abs(W(ik, ix)));
      }
    CHECK(worst < 1e-10 * scale);
  }

  SUBCASE("direct evaluation agrees with the FFT") {
    std::vector<cplx> a(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) a[i] = std::exp(-(k[i] - 4) * (k[i] - 4));
    const auto A = ComplexField2::outer(k, a, a);
    const auto W = wigner_weyl(A);
    for (std::size_t ix : {0u, 100u, 129u, 200u})
      CHECK(std::abs(W(51, ix) - wigner_at(A, 51, W.x[ix])) < 1e-12);
  }

  SUBCASE("non-square input") {
    ComplexField2 A(k, Grid1D(0.0, 10.0, 65));
    CHECK_THROWS(wigner_weyl(A));
  }
}

TEST_CASE("gaussian_smear") {
  Grid1D t(-20.0, 20.0, 4001);
  ProbabilityCurve c;
  c.axis = t;
  c.values.assign(t.size(), 0.0);

  SUBCASE("constant passes through") {
    std::fill(c.values.begin(), c.values.end(), 0.3);
    const auto s = gaussian_smear(c, 0.5);
    for (double v : s.values) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
  }

  SUBCASE("spike becomes a gaussian of width tau and keeps its area") {
    c.values[2000] = 1.0 / t.spacing();
    const double tau = 0.5;
    const auto s = gaussian_smear(c, tau);
    CHECK(std::abs(integrate_1d(t, s.values) - integrate_1d(t, c.values)) < 1e-8);
    const double peak = 1 / (std::sqrt(2 * std::numbers::pi) * tau);
    CHECK(s.values[2000] == doctest::Approx(peak).epsilon(1e-3));
    CHECK(s.values[2050] == doctest::Approx(peak * std::exp(-0.5)).epsilon(1e-3));
  }

  SUBCASE("cosine amplitude is damped by exp(-2 k^2 tau^2)") {
    const double k = 1.5, tau = 0.4;
    for (std::size_t i = 0; i < t.size(); ++i) c.values[i] = std::cos(2 * k * t[i]);
    const auto s = gaussian_smear(c, tau);
    const double damp = std::exp(-2 * k * k * tau * tau);
    for (std::size_t i : {1500u, 2000u, 2500u}) CHECK(s.values[i] == doctest::Approx(damp * c.values[i]).epsilon(1e-6));
  }

  SUBCASE("tau below two spacings is rejected") { CHECK_THROWS(gaussian_smear(c, 0.015)); }
}
