#include "qtp/scalar_toa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qtp/errors.hpp"
#include "qtp/tolerances.hpp"

namespace qtp {

WavePacket WavePacket::gaussian(double p0, double sigma, double m, const Grid1D& grid, double x0) {
  if (!(sigma > 0.0)) throw PreconditionError("gaussian packet: sigma must be positive");
  WavePacket w{grid, std::vector<cplx>(grid.size()), m};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = (grid[i] - p0) / sigma;
    w.psi[i] = std::exp(-0.25 * u * u) * std::exp(cplx(0.0, -grid[i] * x0));
  }
  const double n = std::sqrt(w.norm());
  if (!(n > 0.0)) throw PreconditionError("gaussian packet: no weight on the momentum grid");
  for (auto& v : w.psi) v /= n;
  return w;
}

double WavePacket::norm() const {
  std::vector<double> d(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) d[i] = std::norm(psi[i]);
  return integrate_1d(grid, std::span<const double>(d));
}

void WavePacket::validate() const {
  if (psi.size() != grid.size()) throw PreconditionError("wave packet: amplitude count does not match grid");
  if (!(grid.min() > 0.0))
    throw PreconditionError("wave packet: support must lie on positive momenta (grid min must be > 0)");
  if (!(m >= 0.0)) throw PreconditionError("wave packet: mass must be >= 0");
  const double n = norm();
  if (std::abs(n - 1.0) > tolerances().packet_norm) {
    std::ostringstream os;
    os << "wave packet: norm " << n << " differs from 1";
    throw PreconditionError(os.str());
  }
}

ComplexField2 WavePacket::density() const {
  auto rho = ComplexField2::outer(grid, psi, psi);
  rho.mark_hermitian();
  return rho;
}

double WavePacket::mean_momentum() const {
  std::vector<double> f(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) f[i] = grid[i] * std::norm(psi[i]);
  return integrate_1d(grid, std::span<const double>(f)) / norm();
}

double WavePacket::momentum_spread() const {
  const double mu = mean_momentum();
  std::vector<double> f(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) f[i] = (grid[i] - mu) * (grid[i] - mu) * std::norm(psi[i]);
  return std::sqrt(integrate_1d(grid, std::span<const double>(f)) / norm());
}

Grid1D default_time_window(const WavePacket& psi, double L, std::size_t n) {
  const double p0 = psi.mean_momentum();
  const double s = psi.momentum_spread();
  auto vel = [&](double p) { return p / std::hypot(p, psi.m); };
  const double pmin = std::max(p0 - 4 * s, psi.grid.min());
  const double pmax = std::min(p0 + 4 * s, psi.grid.max());
  const double W = 1.0 / (s * vel(p0));
  return Grid1D(L / vel(pmax) - 10 * W, L / vel(pmin) + 10 * W, n);
}

DensityValue unconditional_density(const ComplexField2& rho, double m, const DetectionKernel& K, double t,
                                   double L) {
  if (!rho.square()) throw PreconditionError("unconditional_density: rho must be square");
  const Grid1D& g = rho.rows();
  const std::size_t n = g.size();
  std::vector<double> eps(n);
  for (std::size_t i = 0; i < n; ++i) eps[i] = std::hypot(g[i], m);
  ComplexField2 F(g, g);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double R = evaluate(K, 0.5 * (g[i] + g[j]), 0.5 * (eps[i] + eps[j]));
      F(i, j) = rho(i, j) * R / (2.0 * std::sqrt(eps[i] * eps[j]));
    }
  const auto r = oscillatory_double_integral(F, dispersion_phase(m), t, L);
  return {r.value.real(), r.max_phase_step, r.coarse_phase};
}

double total_detection_probability(const ComplexField2& rho, double m, const DetectionKernel& K) {
  const Grid1D& g = rho.rows();
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = rho(i, i).real() * absorption_scalar(K, m, g[i]);
  const double P = integrate_1d(g, std::span<const double>(f));
  if (!(P > 0.0)) throw PreconditionError("total detection probability is zero");
  return P;
}

double total_detection_probability(const WavePacket& psi, const DetectionKernel& K) {
  psi.validate();
  return total_detection_probability(psi.density(), psi.m, K);
}

ComplexField2 conditioned_state(const ComplexField2& rho, double m, const DetectionKernel& K) {
  const Grid1D& g = rho.rows();
  const double P = total_detection_probability(rho, m, K);
  std::vector<double> sa(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) sa[i] = std::sqrt(absorption_scalar(K, m, g[i]));
  ComplexField2 out(g, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) out(i, j) = rho(i, j) * sa[i] * sa[j] / P;
  return out;
}

namespace {

void note_phase(ProbabilityCurve& c, double step) {
  if (step > tolerances().phase_step) {
    std::ostringstream os;
    os << "momentum grid too coarse for the phase: max neighbour step " << step << " rad";
    c.warnings.push_back(os.str());
  }
}

bool is_unit(const ComplexField2& S) {
  for (auto v : S.data())
    if (std::abs(v - 1.0) > 1e-12) return false;
  return true;
}

void certify_or_warn(LocalizationOperator& S, bool allow_indefinite, ProbabilityCurve& c) {
  if (S.S.rows().size() > tolerances().max_certify_points) {
    c.warnings.push_back("localization operator not certified: grid exceeds the certification limit");
    return;
  }
  try {
    require_positive(S);
  } catch (const IndefiniteKernelError&) {
    if (!allow_indefinite) throw;
    c.warnings.push_back("localization operator is indefinite; proceeding on caller override");
  }
}

}  // namespace

ProbabilityCurve toa_curve(const ComplexField2& rho_tilde, double m, const LocalizationOperator& S, const Grid1D& t,
                           double L, Engine engine) {
  const Grid1D& g = rho_tilde.rows();
  if (!(S.S.rows() == g)) throw PreconditionError("toa_curve: state and localization grids differ");
  const std::size_t n = g.size();
  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(g[i] / std::hypot(g[i], m));
  ComplexField2 F(g, g);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) F(i, j) = rho_tilde(i, j) * sv[i] * sv[j] * S.S(i, j);

  ProbabilityCurve c;
  c.axis = t;
  c.L = L;
  if (engine == Engine::Oracle) {
    c.values.resize(t.size());
    const auto phase = dispersion_phase(m);
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto r = oscillatory_double_integral(F, phase, t[k], L);
      c.values[k] = r.value.real();
      worst = std::max(worst, r.max_phase_step);
    }
    note_phase(c, worst);
  } else {
    const auto q = quadratic_form(F, m);
    c.values = evaluate(q, t, L, engine);
    note_phase(c, max_phase_step(q.p, q.eps, 0, t, L));
  }
  c.finalize(tolerances().normalization);
  return c;
}

ProbabilityCurve conditioned_density(const ComplexField2& rho, double m, const DetectionKernel& K, const Grid1D& t,
                                     double L, const ToaOptions& opt) {
  validate(K);
  auto S = localization_from_kernel(K, m, rho.rows());
  ProbabilityCurve pre;
  certify_or_warn(S, opt.allow_indefinite, pre);

  ProbabilityCurve c;
  if (opt.engine == Engine::Oracle) {
    const double P = total_detection_probability(rho, m, K);
    c.axis = t;
    c.L = L;
    c.values.resize(t.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto d = unconditional_density(rho, m, K, t[k], L);
      c.values[k] = d.value / P;
      worst = std::max(worst, d.max_phase_step);
    }
    note_phase(c, worst);
    c.finalize(tolerances().normalization);
  } else {
    c = toa_curve(conditioned_state(rho, m, K), m, S, t, L, opt.engine);
  }
  c.warnings.insert(c.warnings.begin(), pre.warnings.begin(), pre.warnings.end());
  if (!c.normalized) {
    std::ostringstream os;
    os << "curve integral " << c.total_integral << " is outside 1 +/- " << tolerances().normalization
       << " (t window too narrow?)";
    c.warnings.push_back(os.str());
  }
  return c;
}

ProbabilityCurve conditioned_density(const WavePacket& psi, const DetectionKernel& K, const Grid1D& t, double L,
                                     const ToaOptions& opt) {
  psi.validate();
  validate(K);
  auto S = localization_from_kernel(K, psi.m, psi.grid);
  if (opt.engine == Engine::Oracle || !is_unit(S.S)) return conditioned_density(psi.density(), psi.m, K, t, L, opt);

  // Pure state with S = 1: P(t) = |sum_a g_a u_a|^2.
  ProbabilityCurve c;
  certify_or_warn(S, opt.allow_indefinite, c);
  const Grid1D& g = psi.grid;
  const auto w = quadrature_weights(g);
  const double P = total_detection_probability(psi, K);
  FactoredForm f;
  f.p = g.points();
  f.eps.resize(g.size());
  Eigen::VectorXcd amp(static_cast<Eigen::Index>(g.size()));
  for (std::size_t a = 0; a < g.size(); ++a) {
    f.eps[a] = std::hypot(g[a], psi.m);
    const double alpha = absorption_scalar(K, psi.m, g[a]);
    amp(static_cast<Eigen::Index>(a)) =
        w[a] * psi.psi[a] * std::sqrt(alpha / P * g[a] / f.eps[a] / (2.0 * std::numbers::pi));
  }
  f.factors.push_back(amp);
  c.axis = t;
  c.L = L;
  c.values = evaluate(f, t, L, opt.engine);
  note_phase(c, max_phase_step(f.p, f.eps, 0, t, L));
  c.finalize(tolerances().normalization);
  if (!c.normalized) {
    std::ostringstream os;
    os << "curve integral " << c.total_integral << " is outside 1 +/- " << tolerances().normalization
       << " (t window too narrow?)";
    c.warnings.push_back(os.str());
  }
  return c;
}

}  // namespace qtp
