#include "qtp/dirac.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qtp/errors.hpp"
#include "qtp/tolerances.hpp"

namespace qtp {

namespace {

void require_mass(double m) {
  if (!(m > 0.0)) throw PreconditionError("Dirac particle needs m > 0");
}

const Mat2& sigma(int i) {
  static const std::array<Mat2, 3> s = [] {
    std::array<Mat2, 3> out;
    out[0] << 0, 1, 1, 0;
    out[1] << 0, cplx(0, -1), cplx(0, 1), 0;
    out[2] << 1, 0, 0, -1;
    return out;
  }();
  return s[static_cast<std::size_t>(i - 1)];
}

}  // namespace

SpinorPacket SpinorPacket::gaussian(double p0, double sigma_p, double m, const Grid1D& grid, cplx c_plus,
                                    cplx c_minus) {
  if (!(sigma_p > 0.0)) throw PreconditionError("spinor packet: sigma must be positive");
  SpinorPacket s{grid, {std::vector<cplx>(grid.size()), std::vector<cplx>(grid.size())}, m};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = (grid[i] - p0) / sigma_p;
    const double g = std::exp(-0.25 * u * u);
    s.psi[0][i] = c_plus * g;
    s.psi[1][i] = c_minus * g;
  }
  const double n = std::sqrt(s.norm());
  if (!(n > 0.0)) throw PreconditionError("spinor packet: zero amplitude");
  for (auto& comp : s.psi)
    for (auto& v : comp) v /= n;
  return s;
}

double SpinorPacket::norm() const {
  std::vector<double> d(grid.size(), 0.0);
  for (const auto& comp : psi)
    for (std::size_t i = 0; i < grid.size(); ++i) d[i] += std::norm(comp[i]);
  return integrate_1d(grid, std::span<const double>(d));
}

void SpinorPacket::validate() const {
  require_mass(m);
  if (!(grid.min() > 0.0)) throw PreconditionError("spinor packet: support must lie on positive momenta");
  for (const auto& comp : psi)
    if (comp.size() != grid.size()) throw PreconditionError("spinor packet: amplitude count does not match grid");
  const double n = norm();
  if (std::abs(n - 1.0) > tolerances().packet_norm) {
    std::ostringstream os;
    os << "spinor packet: norm " << n << " differs from 1";
    throw PreconditionError(os.str());
  }
}

void SymmetricKernelParams::validate() const {
  if (!(a >= 0.0 && b_plus >= 0.0 && b_minus >= 0.0))
    throw PreconditionError("symmetric kernel: a, b_plus, b_minus must be >= 0");
  if (a == 0.0 && b_plus == 0.0 && b_minus == 0.0)
    throw PreconditionError("symmetric kernel: a, b_plus, b_minus are all zero");
}

double bilinear_B(double p, double pp, double m) {
  require_mass(m);
  const double e = std::hypot(p, m), ep = std::hypot(pp, m);
  return ((e + m) * (ep + m) - p * pp) / (2.0 * m * std::sqrt(e + m) * std::sqrt(ep + m));
}

std::array<Mat2, 4> current_vector_A(double p, double pp, double m) {
  require_mass(m);
  const double es = std::hypot(p, m) + std::hypot(pp, m);
  const double ps = p + pp;
  const cplx I(0.0, 1.0);
  const Mat2 id = Mat2::Identity();
  return {es * id + ps * sigma(3), -es * sigma(1) + I * ps * sigma(2), -es * sigma(2) + I * ps * sigma(1),
          -es * sigma(3) - ps * id};
}

std::pair<double, double> zeta_pm(const SymmetricKernelParams& k, double p, double pp, double m) {
  const double B = bilinear_B(p, pp, m);
  const double es = std::hypot(p, m) + std::hypot(pp, m);
  return {k.a * B + k.b_plus / (2.0 * m) * (es + (p + pp)), k.a * B + k.b_minus / (2.0 * m) * (es - (p + pp))};
}

Mat2 symmetric_Z(const SymmetricKernelParams& k, double p, double pp, double m) {
  const auto [zp, zm] = zeta_pm(k, p, pp, m);
  Mat2 Z = Mat2::Zero();
  Z(0, 0) = zp;
  Z(1, 1) = zm;
  return Z;
}

std::pair<double, double> absorption_pm(const SymmetricKernelParams& k, double p, double m) {
  require_mass(m);
  if (!(p > 0.0)) throw PreconditionError("absorption coefficient needs p > 0");
  const double e = std::hypot(p, m);
  return {(k.a + k.b_plus * (e + p) / m) / (2.0 * p), (k.a + k.b_minus * (e - p) / m) / (2.0 * p)};
}

std::pair<double, double> localization_S_pm(const SymmetricKernelParams& k, double p, double pp, double m,
                                            bool pure_b) {
  require_mass(m);
  if (k.a == 0.0) {
    if (!pure_b) throw PreconditionError("localization_S_pm: a = 0 leaves gamma undefined; use the pure-b branch");
    const auto [zp, zm] = zeta_pm(k, p, pp, m);
    const auto [dp, dm] = zeta_pm(k, p, p, m);
    const auto [dpp, dmp] = zeta_pm(k, pp, pp, m);
    const double sp = dp * dpp > 0.0 ? zp / std::sqrt(dp * dpp) : 0.0;
    const double sm = dm * dmp > 0.0 ? zm / std::sqrt(dm * dmp) : 0.0;
    return {sp, sm};
  }
  const double B = bilinear_B(p, pp, m);
  const double e = std::hypot(p, m), ep = std::hypot(pp, m);
  auto S = [&](double gamma, double r) {
    const double num = B + gamma / (2.0 * m) * (e + ep + r * (p + pp));
    const double d1 = 1.0 + gamma * (e + r * p) / m;
    const double d2 = 1.0 + gamma * (ep + r * pp) / m;
    if (!(d1 > 0.0 && d2 > 0.0)) throw PreconditionError("localization_S_pm: non-positive denominator");
    return num / (std::sqrt(d1) * std::sqrt(d2));
  };
  return {S(k.b_plus / k.a, 1.0), S(k.b_minus / k.a, -1.0)};
}

SymmetricKernelParams kernel_moments(const Grid1D& q, const std::function<double(double)>& g, double m) {
  require_mass(m);
  std::vector<double> fa(q.size()), fp(q.size()), fm(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double e = std::hypot(q[i], m);
    const double base = g(q[i]) / (2.0 * e);
    fa[i] = base;
    fp[i] = base * (e + q[i]) / (2.0 * m);
    fm[i] = base * (e - q[i]) / (2.0 * m);
  }
  return {integrate_1d(q, std::span<const double>(fa)), integrate_1d(q, std::span<const double>(fp)),
          integrate_1d(q, std::span<const double>(fm))};
}

double dirac_total_probability(const SpinorPacket& psi, const SymmetricKernelParams& k) {
  const Grid1D& g = psi.grid;
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [ap, am] = absorption_pm(k, g[i], psi.m);
    f[i] = std::norm(psi.psi[0][i]) * ap + std::norm(psi.psi[1][i]) * am;
  }
  return integrate_1d(g, std::span<const double>(f));
}

DiracResult toa_density_dirac(const SpinorPacket& psi, const SymmetricKernelParams& k, const Grid1D& t, double L,
                              const DiracOptions& opt) {
  psi.validate();
  k.validate();
  const Grid1D& g = psi.grid;
  const std::size_t n = g.size();
  const double m = psi.m;
  DiracResult res;
  res.P_tot = dirac_total_probability(psi, k);
  if (!(res.P_tot > 0.0)) throw PreconditionError("Dirac total detection probability is zero");

  std::vector<double> eps(n), sv(n);
  for (std::size_t i = 0; i < n; ++i) {
    eps[i] = std::hypot(g[i], m);
    sv[i] = std::sqrt(g[i] / eps[i]);
  }
  res.total.axis = t;
  res.total.L = L;
  res.total.values.assign(t.size(), 0.0);

  for (int s = 0; s < 2; ++s) {
    const auto su = static_cast<std::size_t>(s);
    ProbabilityCurve& c = res.spin[su];
    c.axis = t;
    c.L = L;
    const auto& amp = psi.psi[su];
    bool empty = true;
    for (auto v : amp) empty = empty && v == cplx(0.0);
    if (empty) {
      c.values.assign(t.size(), 0.0);
      c.finalize(tolerances().normalization);
      continue;
    }

    if (opt.engine == Engine::Oracle) {
      ComplexField2 F(g, g);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const auto z = zeta_pm(k, g[i], g[j], m);
          const double zr = s == 0 ? z.first : z.second;
          F(i, j) = amp[i] * std::conj(amp[j]) * zr / (2.0 * std::sqrt(eps[i] * eps[j]));
        }
      c.values.resize(t.size());
      const auto ph = dispersion_phase(m);
      for (std::size_t q = 0; q < t.size(); ++q)
        c.values[q] = oscillatory_double_integral(F, ph, t[q], L).value.real() / res.P_tot;
    } else {
      std::vector<cplx> tl(n);
      bool undetected = true;
      for (std::size_t i = 0; i < n; ++i) {
        const auto a = absorption_pm(k, g[i], m);
        const double al = s == 0 ? a.first : a.second;
        tl[i] = amp[i] * std::sqrt(al / res.P_tot) * sv[i];
        undetected = undetected && al == 0.0;
      }
      if (undetected) {
        c.values.assign(t.size(), 0.0);
        c.finalize(tolerances().normalization);
        continue;
      }
      LocalizationOperator S{ComplexField2(g, g), Positivity::Unknown};
      bool unit = true;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const auto sp = localization_S_pm(k, g[i], g[j], m, k.a == 0.0);
          S.S(i, j) = s == 0 ? sp.first : sp.second;
          unit = unit && std::abs(S.S(i, j) - 1.0) <= 1e-12;
        }
      if (n <= tolerances().max_certify_points) {
        try {
          require_positive(S);
        } catch (const IndefiniteKernelError& e) {
          if (!opt.allow_indefinite) throw;
          c.warnings.push_back(std::string("spin ") + (s == 0 ? "+" : "-") + ": " + e.what() +
                               "; proceeding on caller override");
        }
      } else {
        c.warnings.push_back("spin localization operator not certified: grid exceeds the certification limit");
      }
      const auto w = quadrature_weights(g);
      if (unit) {
        FactoredForm f;
        f.p = g.points();
        f.eps = eps;
        Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
          v(static_cast<Eigen::Index>(i)) = w[i] * tl[i] / std::sqrt(2.0 * std::numbers::pi);
        f.factors.push_back(v);
        c.values = evaluate(f, t, L, opt.engine);
      } else {
        ComplexField2 F(g, g);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) F(i, j) = tl[i] * std::conj(tl[j]) * S.S(i, j);
        c.values = evaluate(quadratic_form(F, m), t, L, opt.engine);
      }
      std::vector<double> p = g.points();
      if (max_phase_step(p, eps, 0, t, L) > tolerances().phase_step)
        c.warnings.push_back("momentum grid too coarse for the phase");
    }
    c.finalize(tolerances().normalization);
    for (std::size_t q = 0; q < t.size(); ++q) res.total.values[q] += c.values[q];
    res.total.warnings.insert(res.total.warnings.end(), c.warnings.begin(), c.warnings.end());
  }
  res.total.finalize(tolerances().normalization);
  if (!res.total.normalized) {
    std::ostringstream os;
    os << "curve integral " << res.total.total_integral << " is outside 1 +/- " << tolerances().normalization;
    res.total.warnings.push_back(os.str());
  }
  return res;
}

std::pair<double, double> spin_probability(const SpinorPacket& psi, const SymmetricKernelParams& k) {
  psi.validate();
  k.validate();
  const Grid1D& g = psi.grid;
  const double P = dirac_total_probability(psi, k);
  if (!(P > 0.0)) throw PreconditionError("Dirac total detection probability is zero");
  std::vector<double> fp(g.size()), fm(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [ap, am] = absorption_pm(k, g[i], psi.m);
    fp[i] = std::norm(psi.psi[0][i]) * ap / P;
    fm[i] = std::norm(psi.psi[1][i]) * am / P;
  }
  return {integrate_1d(g, std::span<const double>(fp)), integrate_1d(g, std::span<const double>(fm))};
}

std::vector<Mat2> spin_operator(const std::vector<std::array<Vec2, 2>>& beta) {
  std::vector<Mat2> out;
  out.reserve(beta.size());
  const double tol = tolerances().orthonormal;
  for (const auto& b : beta) {
    if (std::abs(b[0].squaredNorm() - 1.0) > tol || std::abs(b[1].squaredNorm() - 1.0) > tol ||
        std::abs(b[0].dot(b[1])) > tol)
      throw PreconditionError("spin_operator: eigenvector branches are not orthonormal");
    out.push_back(0.5 * (b[0] * b[0].adjoint() - b[1] * b[1].adjoint()));
  }
  return out;
}

std::vector<std::array<Vec2, 2>> symmetric_kernel_spin_basis(const Grid1D& grid) {
  return std::vector<std::array<Vec2, 2>>(grid.size(), {Vec2(1.0, 0.0), Vec2(0.0, 1.0)});
}

}  // namespace qtp
