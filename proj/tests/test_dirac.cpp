#include <cmath>
#include <random>

#include <doctest.h>

#include "qtp/dirac.hpp"
#include "qtp/errors.hpp"
#include "qtp/scalar_toa.hpp"

using namespace qtp;

namespace {

double energy(double p, double m) { return std::sqrt(p * p + m * m); }

double max_abs(const std::vector<double>& a) {
  double d = 0;
  for (double v : a) d = std::max(d, std::abs(v));
  return d;
}

bool hermitian(const Mat2& M) { return (M - M.adjoint()).norm() <= 1e-12 * std::max(1.0, M.norm()); }

}  // namespace

TEST_CASE("bilinear B") {
  const double m = 1.3;
  CHECK(bilinear_B(0.0, 0.0, m) == doctest::Approx(1.0));
  CHECK(bilinear_B(1e3 * m, 1e3 * m, m) == doctest::Approx(1.0).epsilon(1e-9));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 50; ++i) {
    const double p = u(rng), q = u(rng);
    CHECK(bilinear_B(p, q, m) == doctest::Approx(bilinear_B(q, p, m)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(bilinear_B(1.0, 1.0, 0.0), PreconditionError);
}

TEST_CASE("current vector A") {
  const double m = 0.7;
  const auto A0 = current_vector_A(0.0, 0.0, m);
  CHECK((A0[0] - 2 * m * Mat2::Identity()).norm() < 1e-12);

  const double p = 2.0, e = energy(p, m);
  const auto A = current_vector_A(p, p, m);
  Mat2 s3 = Mat2::Zero();
  s3(0, 0) = 1;
  s3(1, 1) = -1;
  CHECK((A[3] - (-2 * e * s3 - 2 * p * Mat2::Identity())).norm() < 1e-12);

  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 20; ++i) {
    const double a = u(rng), b = u(rng);
    const auto M = current_vector_A(a, b, m);
    CHECK(hermitian(M[0]));
    CHECK(hermitian(M[3]));
  }
  const auto opposite = current_vector_A(1.5, -1.5, m);
  for (const auto& M : opposite) CHECK(hermitian(M));
}

TEST_CASE("symmetric Z") {
  const double m = 1.0;
  const auto [zp, zm] = zeta_pm({1.0, 0.0, 0.0}, 1.0, 3.0, m);
  CHECK(zp == doctest::Approx(bilinear_B(1.0, 3.0, m)));
  CHECK(zm == doctest::Approx(bilinear_B(1.0, 3.0, m)));

  const double p = 2.0;
  const auto [bp, bm] = zeta_pm({0.0, 2 * m, 0.0}, p, p, m);
  CHECK(bp == doctest::Approx(2 * (energy(p, m) + p)));
  CHECK(bm == 0.0);

  const Mat2 Z = symmetric_Z({1.0, 0.5, 0.2}, 1.0, 2.0, m);
  CHECK(Z(0, 1) == cplx(0.0));
  CHECK(Z(1, 0) == cplx(0.0));
  CHECK(Z(0, 0).real() == doctest::Approx(zeta_pm({1.0, 0.5, 0.2}, 2.0, 1.0, m).first));
}

TEST_CASE("zeta(p,p) = 2p alpha(p)") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 100; ++i) {
    const SymmetricKernelParams k{u(rng), u(rng), u(rng)};
    const double m = u(rng), p = u(rng);
    const auto [zp, zm] = zeta_pm(k, p, p, m);
    const auto [ap, am] = absorption_pm(k, p, m);
    CHECK(std::abs(zp - 2 * p * ap) <= 1e-12 * zp);
    CHECK(std::abs(zm - 2 * p * am) <= 1e-12 * zm);
  }
}

TEST_CASE("absorption limits") {
  const SymmetricKernelParams k{1.0, 0.7, 0.3};
  const double m = 1.0;
  {
    const double p = 1e-3 * m;
    const auto [ap, am] = absorption_pm(k, p, m);
    CHECK(std::abs(ap / ((k.a + k.b_plus) / (2 * p)) - 1) < 2e-3);
    CHECK(std::abs(am / ((k.a + k.b_minus) / (2 * p)) - 1) < 2e-3);
  }
  {
    const double p = 1e3 * m;
    const auto [ap, am] = absorption_pm(k, p, m);
    CHECK(std::abs(ap / (k.b_plus / m) - 1) < 2e-3);
    CHECK(std::abs(am / (k.a / (2 * p)) - 1) < 2e-3);
  }
  const auto [one_p, one_m] = absorption_pm({4.0, 0.0, 0.0}, 2.0, m);
  CHECK(one_p == doctest::Approx(1.0));
  CHECK(one_m == doctest::Approx(1.0));
  CHECK_THROWS_AS(absorption_pm(k, 0.0, m), PreconditionError);
}

TEST_CASE("alpha- interpolates monotonically between its limits") {
  const SymmetricKernelParams k{1.0, 0.5, 2.0};
  double prev = 1e300;
  for (double lg = -3.0; lg <= 3.0; lg += 0.25) {
    const double p = std::pow(10.0, lg);
    const double r = absorption_pm(k, p, 1.0).second * 2 * p / k.a;
    CHECK(r <= prev);
    prev = r;
  }
  CHECK(absorption_pm(k, 1e-3, 1.0).second * 2e-3 / k.a == doctest::Approx(1 + k.b_minus / k.a).epsilon(2e-3));
  CHECK(prev == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("localization S") {
  const SymmetricKernelParams k{1.0, 0.8, 0.4};
  const double m = 1.0;
  for (double p : {0.1, 1.0, 10.0}) {
    const auto [sp, sm] = localization_S_pm(k, p, p, m);
    CHECK(sp == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sm == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (double p : {1e-3, 5e-3, 1e-2})
    for (double q : {2e-3, 1e-2}) {
      const auto [sp, sm] = localization_S_pm(k, p, q, m);
      CHECK(std::abs(sp - 1) < 1e-3);
      CHECK(std::abs(sm - 1) < 1e-3);
    }
  const auto [sp, sm] = localization_S_pm(k, 1e3, 4e3, m);
  (void)sp;
  CHECK(std::abs(sm - 1.25) < 1e-3);

  CHECK_THROWS(localization_S_pm({0.0, 1.0, 1.0}, 1.0, 2.0, m));
  const auto [bp, bm] = localization_S_pm({0.0, 1.0, 1.0}, 1.0, 1.0, m, true);
  CHECK(bp == doctest::Approx(1.0));
  CHECK(bm == doctest::Approx(1.0));
}

TEST_CASE("spin probabilities") {
  const Grid1D g(0.5, 3.5, 128);
  const double m = 1.0;
  {
    const auto psi = SpinorPacket::gaussian(2.0, 0.2, m, g, 1.0, 0.0);
    const auto [pp, pm] = spin_probability(psi, {1.0, 0.3, 0.9});
    CHECK(pp == doctest::Approx(1.0));
    CHECK(pm == 0.0);
  }
  {
    const auto psi = SpinorPacket::gaussian(2.0, 0.2, m, g, 1.0, 1.0);
    const auto [pp, pm] = spin_probability(psi, {1.0, 0.0, 0.0});
    CHECK(pp == doctest::Approx(0.5).epsilon(1e-12));
    // equal nonzero b still favours + through eps + p > eps - p
    const auto [bp, bm] = spin_probability(psi, {1.0, 0.5, 0.5});
    CHECK(bp > bm);
    CHECK(pp + pm == doctest::Approx(1.0).epsilon(1e-10));
  }
  {
    const double p0 = 1e3;
    const Grid1D ur(p0 - 0.5, p0 + 0.5, 201);
    const auto psi = SpinorPacket::gaussian(p0, 0.01, m, ur, 1.0, 1.0);
    const SymmetricKernelParams k{1.0, 1.0 * m / (2 * p0), 0.0};
    const auto [pp, pm] = spin_probability(psi, k);
    const auto [ap, am] = absorption_pm(k, p0, m);
    CHECK(pp / pm == doctest::Approx(ap / am).epsilon(1e-6));
  }
}

TEST_CASE("spin operator") {
  const Grid1D g(0.5, 3.5, 16);
  const auto basis = symmetric_kernel_spin_basis(g);
  const auto S = spin_operator(basis);
  Mat2 half_s3 = Mat2::Zero();
  half_s3(0, 0) = 0.5;
  half_s3(1, 1) = -0.5;
  for (const auto& s : S) {
    CHECK((s - half_s3).norm() < 1e-14);
    CHECK(std::abs(s.trace()) < 1e-14);
  }
  auto swapped = basis;
  for (auto& b : swapped) std::swap(b[0], b[1]);
  const auto Sw = spin_operator(swapped);
  for (std::size_t i = 0; i < S.size(); ++i) CHECK((Sw[i] + S[i]).norm() < 1e-14);

  std::vector<std::array<Vec2, 2>> rotated(4);
  for (std::size_t i = 0; i < 4; ++i) {
    const double th = 0.3 * static_cast<double>(i);
    rotated[i] = {Vec2(std::cos(th), cplx(0, std::sin(th))), Vec2(cplx(0, std::sin(th)), std::cos(th))};
  }
  for (const auto& s : spin_operator(rotated)) {
    const auto e = eig_herm2(s);
    CHECK(e.values[0] == doctest::Approx(0.5));
    CHECK(e.values[1] == doctest::Approx(-0.5));
  }
  std::vector<std::array<Vec2, 2>> bad{{Vec2(1, 0), Vec2(1, 0)}};
  CHECK_THROWS(spin_operator(bad));
}

TEST_CASE("spin-resolved time of arrival") {
  const double m = 1.0, L = 30.0;
  const Grid1D g(1.0, 5.0, 96);
  DiracOptions opt;
  opt.allow_indefinite = true;

  SUBCASE("balanced packet and kernel give identical spin curves") {
    const auto psi = SpinorPacket::gaussian(3.0, 0.3, m, g, 1.0, 1.0);
    const Grid1D t(25.0, 45.0, 101);
    const auto r = toa_density_dirac(psi, {1.0, 0.0, 0.0}, t, L, opt);
    double d = 0;
    for (std::size_t i = 0; i < t.size(); ++i) d = std::max(d, std::abs(r.spin[0].values[i] - r.spin[1].values[i]));
    CHECK(d <= 1e-12 * max_abs(r.total.values));
  }

  SUBCASE("components sum to the total and normalize") {
    const auto psi = SpinorPacket::gaussian(3.0, 0.3, m, g, 0.8, 0.6);
    const double v0 = 3.0 / std::sqrt(10.0);
    const Grid1D t(L / v0 - 25.0, L / v0 + 45.0, 4001);
    const auto r = toa_density_dirac(psi, {1.0, 0.4, 0.1}, t, L, opt);
    for (std::size_t i = 0; i < t.size(); i += 50)
      CHECK(r.spin[0].values[i] + r.spin[1].values[i] == doctest::Approx(r.total.values[i]).epsilon(1e-12));
    CHECK(r.total.total_integral == doctest::Approx(1.0).epsilon(1e-3));
  }

  SUBCASE("NR regime matches the scalar density with S = 1") {
    const double mm = 1000.0;
    const Grid1D nr(0.5, 1.5, 128);
    const auto psi = SpinorPacket::gaussian(1.0, 0.05, mm, nr, 1.0, 0.0);
    const double Lnr = 1000.0;
    const Grid1D t(8e5, 1.2e6, 201);
    const auto r = toa_density_dirac(psi, {1.0, 0.3, 0.3}, t, Lnr, opt);
    WavePacket sp{nr, psi.psi[0], mm};
    const auto s = conditioned_density(sp, Glauber{1.0}, t, Lnr);
    double d = 0;
    for (std::size_t i = 0; i < t.size(); ++i) d = std::max(d, std::abs(r.total.values[i] - s.values[i]));
    CHECK(d <= 1e-3 * max_abs(s.values));
  }

  SUBCASE("UR regime favours the plus helicity") {
    const double p0 = 1e3;
    const Grid1D ur(p0 - 5.0, p0 + 5.0, 128);
    const auto psi = SpinorPacket::gaussian(p0, 0.5, m, ur, 1.0, 1.0);
    const SymmetricKernelParams k{1.0, 1.0, 1.0};
    const auto [pp, pm] = spin_probability(psi, k);
    const auto [ap, am] = absorption_pm(k, p0, m);
    CHECK(pp == doctest::Approx(ap / (ap + am)).epsilon(1e-4));
    CHECK(pp > 0.99);
  }

  SUBCASE("indefinite S is reported with a witness") {
    const auto psi = SpinorPacket::gaussian(3.0, 0.3, m, g, 1.0, 1.0);
    try {
      toa_density_dirac(psi, {1.0, 0.4, 0.4}, Grid1D(25.0, 45.0, 11), L);
      FAIL("expected IndefiniteKernelError");
    } catch (const IndefiniteKernelError& e) {
      CHECK(e.min_eigenvalue() < 0);
      CHECK(e.witness().size() == g.size());
    }
    const auto r = toa_density_dirac(psi, {1.0, 0.4, 0.4}, Grid1D(25.0, 45.0, 11), L, opt);
    CHECK_FALSE(r.total.warnings.empty());
  }

  SUBCASE("engines agree") {
    const auto psi = SpinorPacket::gaussian(3.0, 0.3, m, g, 0.8, 0.6);
    const Grid1D t(35.0, 40.0, 21);
    DiracOptions o = opt;
    const auto par = toa_density_dirac(psi, {1.0, 0.4, 0.1}, t, L, o);
    o.engine = Engine::Oracle;
    const auto orc = toa_density_dirac(psi, {1.0, 0.4, 0.1}, t, L, o);
    for (std::size_t i = 0; i < t.size(); ++i)
      CHECK(std::abs(par.total.values[i] - orc.total.values[i]) <= 1e-6 * max_abs(orc.total.values));
  }
}

TEST_CASE("kernel moments") {
  const double m = 1.0;
  const Grid1D q(0.0, 40.0, 4001);
  const auto k = kernel_moments(q, [](double x) { return std::exp(-x); }, m);
  CHECK(k.a > 0);
  CHECK(k.b_plus > k.b_minus);
  CHECK(k.b_minus > 0);
}
