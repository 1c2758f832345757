#include "qtp/photon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qtp/errors.hpp"
#include "qtp/tolerances.hpp"

namespace qtp {

namespace {

constexpr double kPi = std::numbers::pi;

Mat2 raw_polarized(const PolarizedKernel& K, double k) {
  if (const auto* f = std::get_if<FactorizedPolarizedKernel>(&K)) return evaluate(f->scalar, k, k) * f->matrix;
  const auto& T = std::get<TabulatedPolarizedKernel>(K);
  const Grid1D& g = T.k;
  const double s = std::clamp((k - g.min()) / g.spacing(), 0.0, static_cast<double>(g.size() - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(s), g.size() - 2);
  const double f = s - static_cast<double>(i);
  return (1.0 - f) * T.values[i] + f * T.values[i + 1];
}

Mat2 rho_at(const PhotonState& s, std::size_t i, std::size_t j) {
  Mat2 m;
  for (int r = 0; r < 2; ++r)
    for (int rp = 0; rp < 2; ++rp) m(r, rp) = s.rho_rr(r, rp)(i, j);
  return m;
}

Mat2 zeta_at(const PhotonState& s, std::size_t i, std::size_t j) {
  Mat2 m;
  for (int r = 0; r < 2; ++r)
    for (int rp = 0; rp < 2; ++rp) m(r, rp) = s.zeta_rr(r, rp)(i, j);
  return m;
}

void check_state(const PhotonState& s) {
  if (!(s.grid.min() > 0.0)) throw PreconditionError("photon state: support must lie on k > 0");
  for (const auto& f : s.rho)
    if (!(f.rows() == s.grid && f.cols() == s.grid))
      throw PreconditionError("photon state: density grids differ from the state grid");
  if (s.has_zeta)
    for (const auto& f : s.zeta)
      if (!(f.rows() == s.grid && f.cols() == s.grid))
        throw PreconditionError("photon state: zeta grids differ from the state grid");
}

Vec2 normalized(const Vec2& e) {
  const double n = e.norm();
  if (!(n > 0.0)) throw PreconditionError("photon state: polarization vector is zero");
  return e / n;
}

PolarizationDecomposition even_points(const PolarizationDecomposition& h, const Grid1D& grid) {
  PolarizationDecomposition d;
  d.grid = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    d.R.push_back(h.R[2 * i]);
    d.beta.push_back(h.beta[2 * i]);
    d.degenerate.push_back(h.degenerate[2 * i]);
  }
  d.any_degenerate = h.any_degenerate;
  return d;
}

}  // namespace

Mat2 evaluate_polarized(const PolarizedKernel& K, double k) {
  if (k < 0.0) return Mat2::Zero();
  if (k == 0.0) return 0.5 * raw_polarized(K, 0.0);
  return raw_polarized(K, k);
}

PolarizationDecomposition decompose_polarization(const PolarizedKernel& K, const Grid1D& grid) {
  PolarizationDecomposition d;
  d.grid = grid;
  const double neg = tolerances().negative_eigen_abs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto e = eig_herm2(evaluate_polarized(K, grid[i]));
    if (e.values[1] < -neg) {
      std::ostringstream os;
      os << "polarized kernel is not positive at k = " << grid[i] << " (eigenvalue " << e.values[1] << ")";
      throw PreconditionError(os.str());
    }
    std::array<double, 2> R = {std::max(e.values[0], 0.0), std::max(e.values[1], 0.0)};
    std::array<Vec2, 2> b = e.vectors;
    const bool degen = e.degenerate || std::abs(R[0] - R[1]) <= tolerances().degeneracy_rel * std::abs(R[0]);
    if (i > 0) {
      const auto& prev = d.beta.back();
      if (degen) {
        b = prev;
      } else {
        if (std::abs(prev[0].dot(b[1])) > std::abs(prev[0].dot(b[0]))) {
          std::swap(b[0], b[1]);
          std::swap(R[0], R[1]);
        }
        for (int s = 0; s < 2; ++s) {
          const cplx ov = prev[static_cast<std::size_t>(s)].dot(b[static_cast<std::size_t>(s)]);
          if (std::abs(ov) > 0.0) b[static_cast<std::size_t>(s)] *= std::conj(ov) / std::abs(ov);
        }
      }
    }
    d.R.push_back(R);
    d.beta.push_back(b);
    d.degenerate.push_back(degen);
    d.any_degenerate = d.any_degenerate || degen;
  }
  return d;
}

std::vector<cplx> gaussian_mode(const Grid1D& grid, double k0, double sigma, double x0) {
  if (!(sigma > 0.0)) throw PreconditionError("gaussian mode: sigma must be positive");
  std::vector<cplx> phi(grid.size());
  std::vector<double> d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = (grid[i] - k0) / sigma;
    phi[i] = std::exp(-0.25 * u * u) * std::exp(cplx(0.0, -grid[i] * x0));
    d[i] = std::norm(phi[i]);
  }
  const double n = std::sqrt(integrate_1d(grid, std::span<const double>(d)));
  if (!(n > 0.0)) throw PreconditionError("gaussian mode: no weight on the grid");
  for (auto& v : phi) v /= n;
  return phi;
}

PhotonState PhotonState::single(const Grid1D& grid, const std::vector<cplx>& phi, const Vec2& polarization) {
  const Vec2 e = normalized(polarization);
  PhotonState s;
  s.grid = grid;
  for (int r = 0; r < 2; ++r)
    for (int rp = 0; rp < 2; ++rp) {
      auto f = ComplexField2::outer(grid, phi, phi);
      f *= e(r) * std::conj(e(rp));
      s.rho[static_cast<std::size_t>(2 * r + rp)] = f;
      s.zeta[static_cast<std::size_t>(2 * r + rp)] = ComplexField2(grid, grid);
    }
  return s;
}

PhotonState PhotonState::unpolarized(const Grid1D& grid, const std::vector<cplx>& phi) {
  PhotonState s;
  s.grid = grid;
  for (int r = 0; r < 2; ++r)
    for (int rp = 0; rp < 2; ++rp) {
      auto f = ComplexField2::outer(grid, phi, phi);
      f *= (r == rp ? 0.5 : 0.0);
      s.rho[static_cast<std::size_t>(2 * r + rp)] = f;
      s.zeta[static_cast<std::size_t>(2 * r + rp)] = ComplexField2(grid, grid);
    }
  return s;
}

PhotonState PhotonState::coherent(const Grid1D& grid, const std::vector<cplx>& a, const Vec2& polarization) {
  const Vec2 e = normalized(polarization);
  PhotonState s = single(grid, a, e);
  std::vector<cplx> abar(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) abar[i] = std::conj(a[i]);
  for (int r = 0; r < 2; ++r)
    for (int rp = 0; rp < 2; ++rp) {
      auto f = ComplexField2::outer(grid, a, abar);  // a(k) a(k')
      f *= e(r) * e(rp);
      s.zeta[static_cast<std::size_t>(2 * r + rp)] = f;
    }
  s.has_zeta = true;
  return s;
}

PhotonState PhotonState::rotated(const Mat2& U) const {
  PhotonState out = *this;
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Mat2 r = U * rho_at(*this, i, j) * U.adjoint();
      const Mat2 z = U * zeta_at(*this, i, j) * U.transpose();
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          out.rho[static_cast<std::size_t>(2 * a + b)](i, j) = r(a, b);
          out.zeta[static_cast<std::size_t>(2 * a + b)](i, j) = z(a, b);
        }
    }
  return out;
}

double vacuum_term(const PolarizedKernel& K, double k_max, std::optional<double> cutoff) {
  const double upper = cutoff.value_or(k_max);
  if (!(upper > 0.0)) throw PreconditionError("vacuum term: the k range must be positive");
  const Grid1D g(0.0, upper, 4001);
  std::vector<double> tr(g.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    tr[i] = raw_polarized(K, g[i]).trace().real();
    peak = std::max(peak, std::abs(tr[i]));
  }
  if (!cutoff && std::abs(tr.back()) > 1e-6 * peak) {
    std::ostringstream os;
    os << "vacuum term does not converge on k <= " << upper
       << ": the kernel has not decayed there; supply an explicit k cutoff";
    throw NumericError(os.str());
  }
  return integrate_1d(g, std::span<const double>(tr), Quadrature::Simpson) / (4.0 * kPi);
}

namespace {

// Coefficient fields of P1 and Q: int dk dk'/2pi F e^{i phase}.
ComplexField2 p1_field(const PhotonState& s, const PolarizedKernel& K, double tau) {
  const Grid1D& g = s.grid;
  ComplexField2 F(g, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Mat2 R = evaluate_polarized(K, 0.5 * (g[i] + g[j]));
      const double dk = g[i] - g[j];
      F(i, j) = 0.5 * std::sqrt(g[i] * g[j]) * (rho_at(s, i, j) * R).trace() * std::exp(-0.5 * dk * dk * tau * tau);
    }
  return F;
}

ComplexField2 q_field(const PhotonState& s, const PolarizedKernel& K, double tau) {
  const Grid1D& g = s.grid;
  ComplexField2 F(g, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Mat2 R = evaluate_polarized(K, 0.5 * (g[i] - g[j]));
      const double w = g[i] + g[j];
      F(i, j) = -2.0 * 0.5 * std::sqrt(g[i] * g[j]) * (zeta_at(s, i, j) * R).trace() * std::exp(-0.5 * w * w * tau * tau);
    }
  return F;
}

PhaseFunction p1_phase() {
  return [](double k, double kp, double t, double L) { return (k - kp) * (L - t); };
}

PhaseFunction q_phase() {
  return [](double k, double kp, double t, double L) { return (k + kp) * (L - t); };
}

}  // namespace

PhotonTerms photodetection_terms(const PhotonState& state, const PolarizedKernel& K, double t, double L,
                                 std::optional<double> cutoff) {
  check_state(state);
  PhotonTerms out;
  out.P0 = vacuum_term(K, state.grid.max(), cutoff);
  out.P1 = oscillatory_double_integral(p1_field(state, K, 0.0), p1_phase(), t, L).value.real();
  if (state.has_zeta) out.Q = oscillatory_double_integral(q_field(state, K, 0.0), q_phase(), t, L).value.real();
  out.total = out.P0 + out.Q + out.P1;
  return out;
}

PhotonTermCurves photodetection_curves(const PhotonState& state, const PolarizedKernel& K, const Grid1D& t, double L,
                                       double tau, Engine engine, std::optional<double> cutoff) {
  check_state(state);
  PhotonTermCurves out;
  try {
    out.P0 = vacuum_term(K, state.grid.max(), cutoff);
  } catch (const NumericError&) {
    out.P0 = NAN;  // reported by the caller; P0 never enters the conditioned curves
  }
  const auto P1F = p1_field(state, K, tau);
  out.Q.assign(t.size(), 0.0);
  if (engine == Engine::Oracle) {
    out.P1.resize(t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
      out.P1[k] = oscillatory_double_integral(P1F, p1_phase(), t[k], L).value.real();
    if (state.has_zeta) {
      const auto QF = q_field(state, K, tau);
      for (std::size_t k = 0; k < t.size(); ++k)
        out.Q[k] = oscillatory_double_integral(QF, q_phase(), t[k], L).value.real();
    }
    return out;
  }
  out.P1 = evaluate(quadratic_form(P1F, 0.0), t, L, engine);
  if (state.has_zeta) {
    auto q = quadratic_form(q_field(state, K, tau), 0.0);
    q.right_conjugated = false;
    out.Q = evaluate(q, t, L, engine);
  }
  return out;
}

double photon_total_probability(const PhotonState& state, const PolarizationDecomposition& dec) {
  const Grid1D& g = state.grid;
  std::vector<double> f(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Mat2 r = rho_at(state, i, i);
    for (int s = 0; s < 2; ++s) {
      const Vec2& b = dec.beta[i][static_cast<std::size_t>(s)];
      f[i] += dec.alpha(i, s) * (b.adjoint() * r * b)(0, 0).real();
    }
  }
  return integrate_1d(g, std::span<const double>(f));
}

ProbabilityCurve p1_conditioned_oracle(const PhotonState& state, const PolarizedKernel& K, const Grid1D& t,
                                       double L) {
  check_state(state);
  const auto dec = decompose_polarization(K, state.grid);
  const double P = photon_total_probability(state, dec);
  if (!(P > 0.0)) throw PreconditionError("photon total detection probability is zero");
  const auto F = p1_field(state, K, 0.0);
  ProbabilityCurve c;
  c.axis = t;
  c.L = L;
  c.values.resize(t.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    c.values[k] = oscillatory_double_integral(F, p1_phase(), t[k], L).value.real() / P;
  c.finalize(tolerances().normalization);
  return c;
}

std::array<ComplexField2, 4> photon_conditioned_state(const PhotonState& state, const PolarizationDecomposition& dec,
                                                      double P_tot) {
  const Grid1D& g = state.grid;
  std::array<ComplexField2, 4> out;
  for (auto& f : out) f = ComplexField2(g, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Mat2 r = rho_at(state, i, j);
      for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp) {
          const double w = std::sqrt(dec.alpha(i, s) * dec.alpha(j, sp)) / P_tot;
          if (w == 0.0) continue;
          const Vec2& bi = dec.beta[i][static_cast<std::size_t>(s)];
          const Vec2& bj = dec.beta[j][static_cast<std::size_t>(sp)];
          out[static_cast<std::size_t>(2 * s + sp)](i, j) = w * (bi.adjoint() * r * bj)(0, 0);
        }
    }
  return out;
}

FarfieldResult farfield_toa(const PhotonState& state, const PolarizedKernel& K, const Grid1D& t, double L,
                            Engine engine) {
  check_state(state);
  const Grid1D& g = state.grid;
  const std::size_t n = g.size();
  const auto half = decompose_polarization(K, g.half_grid());
  const auto dec = even_points(half, g);
  FarfieldResult res;
  res.degenerate = dec.any_degenerate;
  res.P_tot = photon_total_probability(state, dec);
  if (!(res.P_tot > 0.0)) throw PreconditionError("photon total detection probability is zero");
  const auto rt = photon_conditioned_state(state, dec, res.P_tot);

  res.total.axis = t;
  res.total.L = L;
  res.total.values.assign(t.size(), 0.0);
  for (int s = 0; s < 2; ++s) {
    const auto su = static_cast<std::size_t>(s);
    ComplexField2 F(g, g);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double den = std::sqrt(half.R[2 * i][su] * half.R[2 * j][su]);
        const double S = den > 0.0 ? half.R[i + j][su] / den : 0.0;
        F(i, j) = rt[3 * su](i, j) * S;
      }
    ProbabilityCurve& c = res.component[su];
    c.axis = t;
    c.L = L;
    if (engine == Engine::Oracle) {
      c.values.resize(t.size());
      const auto ph = dispersion_phase(0.0);
      double worst = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const auto r = oscillatory_double_integral(F, ph, t[k], L);
        c.values[k] = r.value.real();
        worst = std::max(worst, r.max_phase_step);
      }
      if (worst > tolerances().phase_step) c.warnings.push_back("momentum grid too coarse for the phase");
    } else {
      const auto q = quadratic_form(F, 0.0);
      c.values = evaluate(q, t, L, engine);
      if (max_phase_step(q.p, q.eps, 0, t, L) > tolerances().phase_step)
        c.warnings.push_back("momentum grid too coarse for the phase");
    }
    c.finalize(tolerances().normalization);
    for (std::size_t k = 0; k < t.size(); ++k) res.total.values[k] += c.values[k];
    res.total.warnings.insert(res.total.warnings.end(), c.warnings.begin(), c.warnings.end());
  }
  if (res.degenerate) res.total.warnings.push_back("kernel eigenvalues are degenerate on part of the grid");
  res.total.finalize(tolerances().normalization);
  if (!res.total.normalized) {
    std::ostringstream os;
    os << "curve integral " << res.total.total_integral << " is outside 1 +/- " << tolerances().normalization;
    res.total.warnings.push_back(os.str());
  }
  return res;
}

ProbabilityCurve polarization_resolved(const PhotonState& state, const PolarizedKernel& K, const Grid1D& t, double L,
                                       int sigma, Engine engine) {
  if (sigma != 0 && sigma != 1) throw PreconditionError("polarization index must be 0 (+) or 1 (-)");
  return farfield_toa(state, K, t, L, engine).component[static_cast<std::size_t>(sigma)];
}

ProjectorFamily polarization_projectors(const Grid1D& grid) {
  Mat2 p = Mat2::Zero(), m = Mat2::Zero();
  p(0, 0) = 1.0;
  m(1, 1) = 1.0;
  return {std::vector<Mat2>(grid.size(), p), std::vector<Mat2>(grid.size(), m)};
}

ProjectorFamily momentum_bins(const Grid1D& grid, const std::vector<double>& edges) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
    throw PreconditionError("momentum bins: need at least two increasing edges");
  ProjectorFamily fam(edges.size() - 1, std::vector<Mat2>(grid.size(), Mat2::Zero()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid[i];
    if (k < edges.front() || k > edges.back()) continue;
    std::size_t b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), k) - edges.begin());
    b = std::min(b, edges.size() - 1) - 1;
    fam[b][i] = Mat2::Identity();
  }
  return fam;
}

ProjectorFamily smooth_bins(const Grid1D& grid, double k_split, double w) {
  ProjectorFamily fam(2, std::vector<Mat2>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lo = 1.0 / (1.0 + std::exp((grid[i] - k_split) / w));
    fam[0][i] = lo * Mat2::Identity();
    fam[1][i] = (1.0 - lo) * Mat2::Identity();
  }
  return fam;
}

std::vector<double> time_averaged_observable(const PhotonState& state, const PolarizedKernel& K,
                                             const ProjectorFamily& family) {
  check_state(state);
  const Grid1D& g = state.grid;
  const std::size_t n = g.size();
  for (const auto& q : family)
    if (q.size() != n) throw PreconditionError("projector family: sample count does not match the state grid");
  for (std::size_t i = 0; i < n; ++i) {
    Mat2 sum = Mat2::Zero();
    for (const auto& q : family) {
      if (eig_herm2(q[i]).values[1] < -tolerances().negative_eigen_abs)
        throw PreconditionError("projector family: element is not positive");
      sum += q[i];
    }
    if ((sum - Mat2::Identity()).cwiseAbs().maxCoeff() > tolerances().family_closure) {
      std::ostringstream os;
      os << "projector family does not resolve the identity at k = " << g[i];
      throw PreconditionError(os.str());
    }
  }
  const auto dec = decompose_polarization(K, g);
  const double P = photon_total_probability(state, dec);
  if (!(P > 0.0)) throw PreconditionError("photon total detection probability is zero");
  const auto rt = photon_conditioned_state(state, dec, P);
  std::vector<double> out;
  for (const auto& q : family) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
      Mat2 r;
      for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp) r(s, sp) = rt[static_cast<std::size_t>(2 * s + sp)](i, i);
      f[i] = (r * q[i]).trace().real();
    }
    out.push_back(integrate_1d(g, std::span<const double>(f)));
  }
  return out;
}

std::vector<double> nearfield_Q(const ComplexField2& zeta, const NearFieldKernel& K, const Grid1D& t, double L) {
  if (!zeta.square()) throw PreconditionError("nearfield_Q: zeta must be sampled on one k grid");
  if (!(K.a >= 0.0)) throw PreconditionError("nearfield_Q: a must be >= 0");
  const Grid1D& g = zeta.rows();
  const std::size_t n = g.size();
  const auto W = wigner_weyl(zeta);
  const std::size_t nx = W.x.size();
  std::vector<cplx> G(n);
  if (K.a == 0.0) {
    const std::size_t centre = nx / 2;
    for (std::size_t c = 0; c < n; ++c) G[c] = -2.0 * K.C * W(c, centre);
  } else {
    const auto wx = quadrature_weights(W.x);
    const double a2 = 0.25 * K.a * K.a;
    for (std::size_t c = 0; c < n; ++c) {
      cplx s = 0.0;
      for (std::size_t ix = 0; ix < nx; ++ix) s += wx[ix] * W(c, ix) / (kPi * (a2 + W.x[ix] * W.x[ix]));
      G[c] = -K.C * K.a * s;
    }
  }
  const auto wk = quadrature_weights(g);
  std::vector<double> out(t.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < static_cast<long>(t.size()); ++k) {
    cplx s = 0.0;
    const double d = L - t[static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < n; ++c) s += wk[c] * G[c] * std::exp(cplx(0.0, 2.0 * g[c] * d));
    out[static_cast<std::size_t>(k)] = s.real();
  }
  return out;
}

double nearfield_Q(const ComplexField2& zeta, const NearFieldKernel& K, double t, double L) {
  return nearfield_Q(zeta, K, Grid1D(t, t + 1.0, 2), L)[0];
}

}  // namespace qtp
