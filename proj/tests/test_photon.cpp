#include <cmath>
#include <numbers>

#include <doctest.h>

#include "qtp/errors.hpp"
#include "qtp/photon.hpp"
#include "qtp/scalar_toa.hpp"

using namespace qtp;

namespace {

const Grid1D kGrid(6.0, 14.0, 96);

Mat2 diag(double a, double b) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Mat2 pauli_like(double l0, double l1) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = m(1, 1) = l0;
  m(0, 1) = m(1, 0) = l1;
  return m;
}

double max_abs(const std::vector<double>& a) {
  double d = 0;
  for (double v : a) d = std::max(d, std::abs(v));
  return d;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("decompose_polarization") {
  SUBCASE("isotropic kernel is degenerate") {
    const auto d = decompose_polarization(FactorizedPolarizedKernel{ExpDecay{1.0, 0.1, 0.0}, Mat2::Identity()}, kGrid);
    CHECK(d.any_degenerate);
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      CHECK(d.R[i][0] == doctest::Approx(d.R[i][1]));
      CHECK(std::abs(d.beta[i][0].dot(d.beta[i][1])) < 1e-12);
    }
  }
  SUBCASE("diagonal kernel keeps the standard basis") {
    const auto d = decompose_polarization(FactorizedPolarizedKernel{ExpDecay{1.0, 1.0, 0.0}, diag(2, 1)}, kGrid);
    CHECK_FALSE(d.any_degenerate);
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      CHECK(std::abs(std::abs(d.beta[i][0](0)) - 1.0) < 1e-12);
      CHECK(d.R[i][0] == doctest::Approx(2 * std::exp(-kGrid[i])));
    }
  }
  SUBCASE("pauli-x structure") {
    const double l0 = 2.0, l1 = 0.5;
    const auto d = decompose_polarization(FactorizedPolarizedKernel{Glauber{1.0}, pauli_like(l0, l1)}, kGrid);
    const double r = 1 / std::sqrt(2.0);
    for (std::size_t i = 0; i < kGrid.size(); i += 7) {
      CHECK(std::abs(d.beta[i][0](0) - r) < 1e-12);
      CHECK(std::abs(d.beta[i][0](1) - r) < 1e-12);
      CHECK(std::abs(std::abs(d.beta[i][1](0)) - r) < 1e-12);
      CHECK(std::abs(d.beta[i][1](0) + d.beta[i][1](1)) < 1e-12);
      CHECK(d.alpha(i, 0) == doctest::Approx(0.5 * kGrid[i] * (l0 + l1)));
      CHECK(d.alpha(i, 1) == doctest::Approx(0.5 * kGrid[i] * (l0 - l1)));
    }
  }
  SUBCASE("negative kernels are rejected") {
    CHECK_THROWS(decompose_polarization(FactorizedPolarizedKernel{Glauber{1.0}, diag(1, -1)}, kGrid));
  }
}

TEST_CASE("photodetection terms") {
  const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.05, 0.0}, Mat2::Identity()};
  const auto a = gaussian_mode(kGrid, 10.0, 0.5);
  const double L = 30.0;

  SUBCASE("Fock states have no Q term") {
    const auto st = PhotonState::single(kGrid, a, Vec2(1.0, 0.0));
    for (double t : {25.0, 30.0, 31.3}) CHECK(photodetection_terms(st, K, t, L, 400.0).Q == 0.0);
  }

  SUBCASE("P0 does not depend on t or L") {
    const auto st = PhotonState::coherent(kGrid, a, Vec2(1.0, 0.0));
    const double p0 = photodetection_terms(st, K, 0.0, 0.0, 400.0).P0;
    CHECK(p0 > 0);
    for (double t : {1.0, 20.0})
      for (double l : {5.0, 50.0}) CHECK(photodetection_terms(st, K, t, l, 400.0).P0 == p0);
    const auto terms = photodetection_terms(st, K, 29.0, L, 400.0);
    CHECK(terms.total == doctest::Approx(terms.P0 + terms.Q + terms.P1));
  }

  SUBCASE("Q integrates to zero") {
    const auto st = PhotonState::coherent(kGrid, a, Vec2(0.6, 0.8));
    const Grid1D t(L - 12.0, L + 12.0, 4801);
    const auto c = photodetection_curves(st, K, t, L);
    CHECK(std::abs(integrate_1d(t, c.Q)) < 1e-6 * max_abs(c.Q) * (t.max() - t.min()));
  }

  SUBCASE("curves agree with pointwise terms") {
    const auto st = PhotonState::coherent(kGrid, a, Vec2(1.0, 0.0));
    const Grid1D t(28.0, 32.0, 9);
    const auto c = photodetection_curves(st, K, t, L);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto p = photodetection_terms(st, K, t[i], L, 400.0);
      CHECK(c.Q[i] == doctest::Approx(p.Q).epsilon(1e-9));
      CHECK(c.P1[i] == doctest::Approx(p.P1).epsilon(1e-9));
    }
  }

  SUBCASE("flat kernel without cutoff is rejected for P0") {
    const FactorizedPolarizedKernel flat{Glauber{1.0}, Mat2::Identity()};
    const auto st = PhotonState::coherent(kGrid, a, Vec2(1.0, 0.0));
    CHECK_THROWS(photodetection_terms(st, flat, 0.0, 0.0));
    CHECK_NOTHROW(photodetection_terms(st, flat, 0.0, 0.0, 20.0));
  }
}

TEST_CASE("coherent P1 matches the massless scalar density per polarization") {
  const ExpDecay scalar{1.0, 0.05, 0.0};
  const FactorizedPolarizedKernel K{scalar, diag(1, 0)};
  const auto a = gaussian_mode(kGrid, 10.0, 0.5);
  const auto st = PhotonState::coherent(kGrid, a, Vec2(1.0, 0.0));
  // The photon mode amplitude a(k) corresponds to the scalar amplitude k a(k).
  std::vector<cplx> psi(kGrid.size());
  for (std::size_t i = 0; i < kGrid.size(); ++i) psi[i] = kGrid[i] * a[i];
  const ComplexField2 rho = ComplexField2::outer(kGrid, psi, psi);
  const double L = 30.0;
  for (double t : {28.0, 29.5, 30.0, 31.0}) {
    const double p1 = photodetection_terms(st, K, t, L, 400.0).P1;
    const double s = unconditional_density(rho, 0.0, scalar, t, L).value;
    CHECK(p1 == doctest::Approx(s).epsilon(1e-8));
  }
}

TEST_CASE("far-field time of arrival") {
  const auto phi = gaussian_mode(kGrid, 10.0, 0.5);

  SUBCASE("exponential isotropic kernel depends on L - t only") {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, Mat2::Identity()};
    const auto st = PhotonState::unpolarized(kGrid, phi);
    const auto a = farfield_toa(st, K, Grid1D(20.0, 40.0, 101), 30.0);
    const auto b = farfield_toa(st, K, Grid1D(27.0, 47.0, 101), 37.0);
    CHECK(max_abs_diff(a.total.values, b.total.values) <= 1e-10 * max_abs(a.total.values));
  }

  SUBCASE("state aligned with beta+ has no minus component") {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, pauli_like(2.0, 0.5)};
    const auto st = PhotonState::single(kGrid, phi, Vec2(1.0, 1.0) / std::sqrt(2.0));
    const auto r = farfield_toa(st, K, Grid1D(20.0, 40.0, 51), 30.0);
    CHECK(max_abs(r.component[1].values) < 1e-14 * max_abs(r.component[0].values));
  }

  SUBCASE("unpolarized weights follow the absorption ratio") {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, diag(2, 1)};
    const auto st = PhotonState::unpolarized(kGrid, phi);
    const Grid1D t(0.0, 60.0, 3001);
    const auto r = farfield_toa(st, K, t, 30.0);
    const double wp = integrate_1d(t, r.component[0].values), wm = integrate_1d(t, r.component[1].values);
    CHECK(wp / wm == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(wp + wm == doctest::Approx(1.0).epsilon(1e-3));
  }

  SUBCASE("components sum to the total") {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, pauli_like(2.0, 0.5)};
    const auto st = PhotonState::single(kGrid, phi, Vec2(0.8, 0.6));
    const Grid1D t(25.0, 35.0, 41);
    const auto r = farfield_toa(st, K, t, 30.0);
    const auto plus = polarization_resolved(st, K, t, 30.0, 0);
    const auto minus = polarization_resolved(st, K, t, 30.0, 1);
    for (std::size_t i = 0; i < t.size(); ++i)
      CHECK(std::abs(plus.values[i] + minus.values[i] - r.total.values[i]) <= 1e-12 * max_abs(r.total.values));
  }

  SUBCASE("state equal to beta- gives an empty plus curve") {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, diag(2, 1)};
    const auto st = PhotonState::single(kGrid, phi, Vec2(0.0, 1.0));
    const auto plus = polarization_resolved(st, K, Grid1D(25.0, 35.0, 21), 30.0, 0);
    CHECK(max_abs(plus.values) == 0.0);
  }

  SUBCASE("balanced superposition with a symmetric kernel gives equal curves") {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, Mat2::Identity()};
    const auto st = PhotonState::single(kGrid, phi, Vec2(1.0, 1.0) / std::sqrt(2.0));
    const Grid1D t(25.0, 35.0, 21);
    const auto plus = polarization_resolved(st, K, t, 30.0, 0);
    const auto minus = polarization_resolved(st, K, t, 30.0, 1);
    CHECK(max_abs_diff(plus.values, minus.values) <= 1e-12 * max_abs(plus.values));
  }

  SUBCASE("beta+ and beta- weighted equally differ only through alpha") {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, pauli_like(2.0, 0.5)};
    const auto st = PhotonState::single(kGrid, phi, Vec2(1.0, 0.0));
    const Grid1D t(20.0, 40.0, 801);
    const auto plus = polarization_resolved(st, K, t, 30.0, 0);
    const auto minus = polarization_resolved(st, K, t, 30.0, 1);
    CHECK(integrate_1d(t, plus.values) / integrate_1d(t, minus.values) == doctest::Approx(2.5 / 1.5).epsilon(1e-3));
  }

  SUBCASE("zero detection probability is an error") {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, diag(1, 0)};
    const auto st = PhotonState::single(kGrid, phi, Vec2(0.0, 1.0));
    CHECK_THROWS_AS(farfield_toa(st, K, Grid1D(25.0, 35.0, 11), 30.0), PreconditionError);
  }
}

TEST_CASE("common polarization rotation leaves curves unchanged") {
  const auto phi = gaussian_mode(kGrid, 10.0, 0.5);
  const Mat2 R = pauli_like(2.0, 0.5);
  const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, R};
  const auto st = PhotonState::single(kGrid, phi, Vec2(0.8, cplx(0.0, 0.6)));
  Mat2 U;
  const double c = std::cos(0.7), s = std::sin(0.7);
  U << cplx(c, 0), cplx(0, s), cplx(0, s), cplx(c, 0);
  const FactorizedPolarizedKernel KU{ExpDecay{1.0, 0.1, 0.0}, U * R * U.adjoint()};
  const Grid1D t(25.0, 35.0, 41);
  const auto a = farfield_toa(st, K, t, 30.0);
  const auto b = farfield_toa(st.rotated(U), KU, t, 30.0);
  CHECK(max_abs_diff(a.total.values, b.total.values) <= 1e-10 * max_abs(a.total.values));
  for (int sg = 0; sg < 2; ++sg)
    CHECK(max_abs_diff(a.component[sg].values, b.component[sg].values) <= 1e-10 * max_abs(a.total.values));
}

TEST_CASE("time-averaged observables") {
  const auto phi = gaussian_mode(kGrid, 10.0, 1.0);
  const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.1, 0.0}, diag(2, 1)};
  const auto st = PhotonState::single(kGrid, phi, Vec2(0.6, 0.8));

  SUBCASE("polarization projectors") {
    const auto p = time_averaged_observable(st, K, polarization_projectors(kGrid));
    REQUIRE(p.size() == 2);
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(p[0] / p[1] == doctest::Approx(2 * 0.36 / 0.64).epsilon(1e-6));
  }
  SUBCASE("momentum bins") {
    const auto p = time_averaged_observable(st, K, momentum_bins(kGrid, {6.0, 10.0, 14.0}));
    REQUIRE(p.size() == 2);
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-8));
    std::vector<double> w(kGrid.size()), low(kGrid.size());
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      const double k = kGrid[i];
      w[i] = std::norm(phi[i]) * 0.5 * k * std::exp(-0.1 * k) * (0.36 * 2 + 0.64 * 1);
      low[i] = k < 10.0 ? w[i] : 0.0;
    }
    CHECK(p[0] == doctest::Approx(integrate_1d(kGrid, low) / integrate_1d(kGrid, w)).epsilon(1e-10));
  }
  SUBCASE("smooth overlapping bins close") {
    const auto p = time_averaged_observable(st, K, smooth_bins(kGrid, 10.0, 0.5));
    CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-8);
  }
  SUBCASE("incomplete family is rejected") {
    auto fam = polarization_projectors(kGrid);
    fam.pop_back();
    CHECK_THROWS(time_averaged_observable(st, K, fam));
  }
}

TEST_CASE("near-field Q") {
  const Grid1D g(3.6, 16.4, 1024);
  const auto a = gaussian_mode(g, 10.0, 0.1);
  ComplexField2 zeta(g, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) zeta(i, j) = a[i] * a[j];
  const Grid1D t(-30.0, 30.0, 121);

  SUBCASE("vanishes without photon-number interference") {
    ComplexField2 zero(g, g);
    CHECK(max_abs(nearfield_Q(zero, {1.0, 0.5}, t, 0.0)) == 0.0);
  }

  SUBCASE("Glauber limit is the small-a limit of the exponential kernel") {
    const auto ref = nearfield_Q(zeta, {1.0, 0.0}, t, 0.0);
    const double dx = 2 * std::numbers::pi / (static_cast<double>(2 * g.size() + 1) * 2 * g.spacing());
    double prev = 1e300;
    for (double mult : {8.0, 4.0, 2.0}) {
      const auto q = nearfield_Q(zeta, {1.0, mult * dx}, t, 0.0);
      const double e = max_abs_diff(q, ref) / max_abs(ref);
      CHECK(e < prev);
      prev = e;
    }
    CHECK(prev < 0.02);
  }

  SUBCASE("grid mismatch") {
    ComplexField2 bad(g, Grid1D(3.6, 16.4, 512));
    CHECK_THROWS(nearfield_Q(bad, {1.0, 0.1}, t, 0.0));
  }
}

TEST_CASE("smeared Q is suppressed relative to P1") {
  const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.05, 0.0}, Mat2::Identity()};
  const double k0 = 10.0, L = 50.0;
  const Grid1D g(k0 - 0.16, k0 + 0.16, 128);
  const auto st = PhotonState::coherent(g, gaussian_mode(g, k0, 0.02), Vec2(1.0, 0.0));
  const Grid1D t(L - 200.0, L + 200.0, 801);
  for (double kt : {2.0, 4.0, 8.0}) {
    const auto c = photodetection_curves(st, K, t, L, kt / k0);
    CHECK(max_abs(c.Q) / max_abs(c.P1) < 10 * std::exp(-2 * kt * kt));
  }
}
