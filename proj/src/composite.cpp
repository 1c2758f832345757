#include "qtp/composite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qtp/errors.hpp"
#include "qtp/tolerances.hpp"

namespace qtp {

namespace {

constexpr std::size_t kMaxFlavors = 16;

double wrap_phase(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

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

Grid1D odd_window(double center, double half_width, std::size_t n) {
  if (n < 3) throw PreconditionError("sampling window needs at least 3 points");
  if (n % 2 == 0) ++n;
  return Grid1D(center - half_width, center + half_width, n);
}

void check_flavors(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum) {
  if (state.flavors() != spectrum.size())
    throw PreconditionError("state and mass spectrum have different numbers of flavors");
  validate_mixing(V, spectrum.size());
}

}  // namespace

MassSpectrum::MassSpectrum(std::vector<double> masses) : m_(std::move(masses)) {
  if (m_.empty() || m_.size() > kMaxFlavors) throw PreconditionError("mass spectrum must have 1 to 16 levels");
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (!std::isfinite(m_[i]) || m_[i] < 0.0) throw PreconditionError("masses must be finite and non-negative");
    if (i > 0 && m_[i] < m_[i - 1]) throw PreconditionError("masses must be non-decreasing");
  }
}

double MassSpectrum::median() const {
  const std::size_t d = m_.size();
  return d % 2 == 1 ? m_[d / 2] : 0.5 * (m_[d / 2 - 1] + m_[d / 2]);
}

double MassSpectrum::energy(std::size_t i, double p) const { return std::hypot(p, m_[i]); }

void validate_mixing(const MixingVector& V, std::size_t d) {
  if (V.size() != d) {
    std::ostringstream os;
    os << "mixing vector has " << V.size() << " components, spectrum has " << d;
    throw PreconditionError(os.str());
  }
  double n = 0.0;
  for (auto v : V) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw PreconditionError("mixing vector not finite");
    n += std::norm(v);
  }
  if (std::abs(n - 1.0) > tolerances().mixing_norm) {
    std::ostringstream os;
    os << "mixing vector norm^2 is " << n << ", expected 1";
    throw PreconditionError(os.str());
  }
}

SourceCurrent SourceCurrent::with_width(double q0, double w) {
  if (!(w > 0.0)) throw PreconditionError("source width must be positive");
  SourceCurrent J;
  J.q0 = q0;
  J.sigma = 0.5 / w;
  J.x_c = w;
  return J;
}

SourceCurrent SourceCurrent::halved() const {
  SourceCurrent J = *this;
  J.sigma *= 2.0;
  J.x_c *= 0.5;
  return J;
}

cplx SourceCurrent::operator()(double q, double omega) const {
  if (!(sigma > 0.0)) throw PreconditionError("source current: sigma must be positive");
  const double u = (q - q0) / sigma;
  double h = 1.0;
  if (std::isfinite(sigma_omega)) {
    const double v = (std::abs(omega) - omega0) / sigma_omega;
    h = std::exp(-0.25 * v * v);
  }
  return std::exp(-0.25 * u * u) * h * std::polar(1.0, -(q - q0) * x_c);
}

double SamplingFunction::operator()(double x) const {
  if (!(width > 0.0)) throw PreconditionError("sampling function width must be positive");
  const double u = (x - center) / width;
  return std::exp(-0.5 * u * u) / (width * std::sqrt(2.0 * std::numbers::pi));
}

SampledFlavorState::SampledFlavorState(Grid1D grid, std::vector<std::vector<cplx>> psi)
    : grid_(std::move(grid)), psi_(std::move(psi)) {
  if (psi_.empty() || psi_.size() > kMaxFlavors) throw PreconditionError("flavor state needs 1 to 16 components");
  if (!(grid_.min() > 0.0)) throw PreconditionError("flavor state: support must lie on positive momenta");
  for (const auto& c : psi_)
    if (c.size() != grid_.size()) throw PreconditionError("flavor state: amplitude count does not match grid");
}

void SampledFlavorState::require_domain(double p) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(grid_.max()));
  if (p < grid_.min() - slack || p > grid_.max() + slack) {
    std::ostringstream os;
    os.precision(17);
    os << "momentum " << p << " lies outside the state grid [" << grid_.min() << ", " << grid_.max()
       << "]; extend the grid to cover it";
    throw PreconditionError(os.str());
  }
}

cplx SampledFlavorState::amplitude_at(std::size_t i, double p) const {
  require_domain(p);
  const double h = grid_.spacing();
  const double x = std::clamp((p - grid_.min()) / h, 0.0, static_cast<double>(grid_.size() - 1));
  const auto k = std::min(static_cast<std::size_t>(x), grid_.size() - 2);
  const double f = x - static_cast<double>(k);
  return (1.0 - f) * psi_[i][k] + f * psi_[i][k + 1];
}

cplx SampledFlavorState::rho(std::size_t i, std::size_t j, double p, double pp) const {
  return amplitude_at(i, p) * std::conj(amplitude_at(j, pp));
}

double SampledFlavorState::norm() const {
  std::vector<double> d(grid_.size(), 0.0);
  for (const auto& c : psi_)
    for (std::size_t k = 0; k < grid_.size(); ++k) d[k] += std::norm(c[k]);
  return integrate_1d(grid_, std::span<const double>(d));
}

SourceState::SourceState(SourceCurrent J, MixingVector U, MassSpectrum spectrum)
    : J_(J), U_(std::move(U)), spec_(std::move(spectrum)) {
  validate_mixing(U_, spec_.size());
}

void SourceState::require_domain(double p) const {
  if (!(p > 0.0)) {
    std::ostringstream os;
    os << "source state evaluated at momentum " << p << "; only p > 0 is represented";
    throw PreconditionError(os.str());
  }
}

cplx SourceState::amplitude(std::size_t i, double p) const {
  require_domain(p);
  const double e = spec_.energy(i, p);
  return U_[i] * J_(p, -e) / std::sqrt(2.0 * e);
}

cplx SourceState::rho(std::size_t i, std::size_t j, double p, double pp) const {
  return amplitude(i, p) * std::conj(amplitude(j, pp));
}

SampledFlavorState source_state(const SourceCurrent& J, const MixingVector& U, const MassSpectrum& spectrum,
                                const Grid1D& p_grid) {
  const SourceState s(J, U, spectrum);
  std::vector<std::vector<cplx>> psi(spectrum.size(), std::vector<cplx>(p_grid.size()));
  for (std::size_t i = 0; i < spectrum.size(); ++i)
    for (std::size_t k = 0; k < p_grid.size(); ++k) psi[i][k] = s.amplitude(i, p_grid[k]);
  return SampledFlavorState(p_grid, std::move(psi));
}

cplx momentum_marginal(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum, double L,
                       double q) {
  check_flavors(state, V, spectrum);
  if (!(q > 0.0)) throw PreconditionError("momentum marginal needs q > 0");
  const std::size_t d = spectrum.size();
  cplx W = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (V[i] == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (V[j] == 0.0) continue;
      const double D = spectrum.delta(j, i);
      const double s = D / (4.0 * q);
      W += V[i] * std::conj(V[j]) * state.rho(i, j, q + s, q - s) * std::polar(1.0, D * L / (2.0 * q));
    }
  }
  return W;
}

EnergyMarginal energy_marginal(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum,
                               double L, double eps) {
  check_flavors(state, V, spectrum);
  const std::size_t d = spectrum.size();
  std::vector<double> p(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    if (V[i] == 0.0) continue;
    if (!(eps > spectrum.mass(i))) {
      std::ostringstream os;
      os << "energy " << eps << " does not exceed mass " << spectrum.mass(i) << " of flavor " << i
         << " (evanescent branch)";
      throw PreconditionError(os.str());
    }
    p[i] = std::sqrt((eps - spectrum.mass(i)) * (eps + spectrum.mass(i)));
  }
  EnergyMarginal out;
  for (std::size_t i = 0; i < d; ++i) {
    if (V[i] == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (V[j] == 0.0) continue;
      const cplx c = 2.0 * eps * V[i] * std::conj(V[j]) * state.rho(i, j, p[i], p[j]);
      const double D = spectrum.delta(i, j);
      out.slow += c * std::polar(1.0, -D * L / (p[i] + p[j])) / (1.0 / p[i] + 1.0 / p[j]);
      const double gap = std::abs(p[i] - p[j]);
      if (i != j && gap > 0.0)
        out.fast += c * std::polar(1.0, -D * L / gap) / std::abs(1.0 / p[i] - 1.0 / p[j]);
    }
  }
  return out;
}

SmearedProbability smeared_probability(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum,
                                       const DetectionKernel& K, const SamplingFunction& chi_E,
                                       const SamplingFunction& chi_Q, double L, std::size_t n_q) {
  check_flavors(state, V, spectrum);
  validate(K);
  const double Q = chi_Q.center, E = chi_E.center;
  if (!(Q > 0.0)) throw PreconditionError("momentum sampling must be centred at Q > 0");
  SmearedProbability out;

  const double R0 = evaluate(K, Q, E);
  double variation = 0.0;
  for (double dq : {-3.0, 3.0})
    for (double de : {-3.0, 3.0}) {
      const double R = evaluate(K, std::max(Q + dq * chi_Q.width, 0.0), E + de * chi_E.width);
      variation = std::max(variation, R0 > 0.0 ? std::abs(R - R0) / R0 : std::abs(R));
    }
  if (variation > tolerances().kernel_variation) {
    std::ostringstream os;
    os << "kernel varies by " << variation << " across the sampling windows; the slow-kernel approximation is poor";
    out.warnings.push_back(os.str());
  }

  const double lo = Q - 8.0 * chi_Q.width;
  if (!(lo > 0.0)) throw PreconditionError("momentum sampling window reaches q <= 0; narrow chi_Q");
  const Grid1D qg = odd_window(Q, 8.0 * chi_Q.width, n_q);
  const std::size_t d = spectrum.size();
  std::vector<double> f(qg.size(), 0.0);
  double peak = 0.0;
  for (std::size_t k = 0; k < qg.size(); ++k) {
    const double q = qg[k];
    cplx acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (V[i] == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        if (V[j] == 0.0) continue;
        const double D = spectrum.delta(j, i);
        const double s = D / (4.0 * q);
        const double mi = spectrum.mass(i), mj = spectrum.mass(j);
        const double e = std::sqrt(q * q + 0.5 * (mi * mi + mj * mj) + D * D / (16.0 * q * q));
        const double wE = chi_E(e);
        if (wE == 0.0) continue;
        acc += V[i] * std::conj(V[j]) * state.rho(i, j, q + s, q - s) * std::polar(1.0, D * L / (2.0 * q)) * wE;
      }
    }
    f[k] = chi_Q(q) * acc.real();
    peak = std::max(peak, std::abs(f[k]));
  }
  if (peak == 0.0) {
    out.no_overlap = true;
    out.warnings.push_back("sampling windows do not overlap the state support");
    return out;
  }
  out.P_conditioned = integrate_1d(qg, std::span<const double>(f), Quadrature::Simpson);
  out.P = R0 / (2.0 * Q) * out.P_conditioned;
  return out;
}

SmearedEnergy smeared_energy_marginal(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum,
                                      const SamplingFunction& chi_E, double L, std::size_t n_eps) {
  const Grid1D eg = odd_window(chi_E.center, 8.0 * chi_E.width, n_eps);
  std::vector<cplx> slow(eg.size()), fast(eg.size());
  std::vector<double> fabs(eg.size());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < eg.size(); ++k) {
    const auto w = energy_marginal(state, V, spectrum, L, eg[k]);
    const double x = chi_E(eg[k]);
    slow[k] = x * w.slow;
    fast[k] = x * w.fast;
    fabs[k] = x * std::abs(w.fast);
  }
  SmearedEnergy out;
  out.slow = integrate_1d(eg, std::span<const cplx>(slow), Quadrature::Simpson);
  out.fast = integrate_1d(eg, std::span<const cplx>(fast), Quadrature::Simpson);
  out.fast_abs = integrate_1d(eg, std::span<const double>(fabs), Quadrature::Simpson);
  return out;
}

StateIndependenceReport state_independence_check(const SourceCurrent& J, const MixingVector& U, const MixingVector& V,
                                                 const MassSpectrum& spectrum, const Grid1D& L_grid, double q) {
  validate_mixing(V, spectrum.size());
  if (!(q > 0.0)) throw PreconditionError("state independence check needs q > 0");
  const SourceState a(J, U, spectrum), b(J.halved(), U, spectrum);
  const std::size_t d = spectrum.size();
  StateIndependenceReport r;
  r.threshold = tolerances().source_phase;
  for (std::size_t iL = 0; iL < L_grid.size(); ++iL) {
    const double L = L_grid[iL];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        const double D = spectrum.delta(j, i);
        const double s = D / (4.0 * q);
        const cplx osc = V[i] * std::conj(V[j]) * std::polar(1.0, D * L / (2.0 * q));
        const cplx ta = osc * a.rho(i, j, q + s, q - s);
        const cplx tb = osc * b.rho(i, j, q + s, q - s);
        if (std::abs(ta) == 0.0 || std::abs(tb) == 0.0) continue;
        r.max_phase_deviation = std::max(r.max_phase_deviation, std::abs(wrap_phase(std::arg(ta) - std::arg(tb))));
      }
  }
  r.independent = r.max_phase_deviation < r.threshold;
  return r;
}

ProbabilityCurve toa_composite_exact(const SampledFlavorState& state, const MixingVector& V,
                                     const MassSpectrum& spectrum, const DetectionKernel& K, const Grid1D& t, double L,
                                     const CompositeOptions& opt) {
  check_flavors(state, V, spectrum);
  validate(K);
  const Grid1D& g = state.grid();
  const std::size_t n = g.size(), d = spectrum.size();
  const double M = spectrum.median();
  const bool equal_masses = spectrum.mass(0) == spectrum.mass(d - 1);

  ProbabilityCurve c;
  c.axis = t;
  c.L = L;
  c.values.assign(t.size(), 0.0);
  const auto w = quadrature_weights(g);
  const double two_pi = 2.0 * std::numbers::pi;

  if (opt.engine == Engine::Oracle) {
    double worst = 0.0;
    std::vector<double> alpha(n), RM(n), eM(n);
    for (std::size_t a = 0; a < n; ++a) {
      eM[a] = std::sqrt(g[a] * g[a] + M * M);
      RM[a] = evaluate(K, g[a], eM[a]);
      alpha[a] = RM[a] / (2.0 * g[a]);
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const cplx vv = V[i] * std::conj(V[j]);
          if (vv == 0.0) continue;
          for (std::size_t a = 0; a < n; ++a) {
            const double ea = spectrum.energy(i, g[a]);
            for (std::size_t b = 0; b < n; ++b) {
              const double eb = spectrum.energy(j, g[b]);
              const double S = evaluate(K, 0.5 * (g[a] + g[b]), 0.5 * (eM[a] + eM[b])) / std::sqrt(RM[a] * RM[b]);
              const double phase = (g[a] - g[b]) * L - (ea - eb) * t[k];
              acc += w[a] * w[b] * vv * state.amplitude(i)[a] * std::conj(state.amplitude(j)[b]) *
                     std::sqrt(alpha[a] * alpha[b] * (g[a] / ea) * (g[b] / eb)) * S * std::polar(1.0, phase);
            }
          }
        }
      c.values[k] = acc.real() / two_pi;
    }
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> eps(n);
      for (std::size_t a = 0; a < n; ++a) eps[a] = spectrum.energy(i, g[a]);
      worst = std::max(worst, max_phase_step(g.points(), eps, 0, t, L));
    }
    note_phase(c, worst);
  } else {
    auto S = localization_from_kernel(K, M, g);
    if (n > tolerances().max_certify_points) {
      c.warnings.push_back("localization operator not certified: grid exceeds the certification limit");
    } else {
      try {
        require_positive(S);
      } catch (const IndefiniteKernelError&) {
        if (!opt.allow_indefinite) throw;
        c.warnings.push_back("localization operator is indefinite; proceeding on caller override");
      }
    }
    std::vector<double> p(d * n), eps(d * n);
    Eigen::VectorXcd amp(static_cast<Eigen::Index>(d * n));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t a = 0; a < n; ++a) {
        const std::size_t r = i * n + a;
        p[r] = g[a];
        eps[r] = spectrum.energy(i, g[a]);
        const double alpha = absorption_scalar(K, M, g[a]);
        amp(static_cast<Eigen::Index>(r)) =
            w[a] * V[i] * state.amplitude(i)[a] * std::sqrt(alpha * g[a] / eps[r] / two_pi);
      }
    if (is_unit(S.S)) {
      FactoredForm f{p, eps, {amp}, n};
      c.values = evaluate(f, t, L, opt.engine);
    } else {
      QuadraticForm qf;
      qf.p = p;
      qf.eps = eps;
      qf.block = n;
      qf.M = amp * amp.adjoint();
      for (std::size_t r = 0; r < d * n; ++r)
        for (std::size_t s = 0; s < d * n; ++s)
          qf.M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) *= S.S(r % n, s % n);
      c.values = evaluate(qf, t, L, opt.engine);
    }
    note_phase(c, max_phase_step(p, eps, n, t, L));
  }

  double incoherent = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> dens(n);
    for (std::size_t a = 0; a < n; ++a) dens[a] = std::norm(V[i] * state.amplitude(i)[a]) * absorption_scalar(K, M, g[a]);
    incoherent += integrate_1d(g, std::span<const double>(dens));
  }
  double P_tot = 0.0;
  if (equal_masses) {
    std::vector<double> dens(n);
    for (std::size_t a = 0; a < n; ++a) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += V[i] * state.amplitude(i)[a];
      dens[a] = std::norm(s) * absorption_scalar(K, M, g[a]);
    }
    P_tot = integrate_1d(g, std::span<const double>(dens));
  } else {
    P_tot = integrate_1d(t, std::span<const double>(c.values));
    c.warnings.push_back("unequal masses: normalized by the integral over the t window");
  }
  if (!(incoherent > 0.0)) throw PreconditionError("composite state is not detected (P_tot = 0)");
  if (!(P_tot > 1e-12 * incoherent)) {
    std::fill(c.values.begin(), c.values.end(), 0.0);
    c.total_integral = 0.0;
    c.normalized = false;
    c.warnings.push_back("detection probability vanishes (V orthogonal to the state); returning the zero curve");
    return c;
  }
  for (auto& v : c.values) v /= P_tot;
  c.finalize(tolerances().normalization);
  if (!c.normalized) {
    std::ostringstream os;
    os << "curve integral " << c.total_integral << " is outside 1 +/- " << tolerances().normalization
       << " (t window too narrow?)";
    c.warnings.push_back(os.str());
  }
  return c;
}

std::function<double(double)> gaussian_envelope(double sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("envelope width must be positive");
  return [sigma](double x) { return std::exp(-2.0 * x * x / (sigma * sigma)); };
}

namespace {

// c_ij(s) of the dispersionless model.
cplx dispersionless_term(const std::function<double(double)>& psi, const MixingVector& U, const MixingVector& V,
                         const MassSpectrum& spectrum, double p0, double L, double s, std::size_t i, std::size_t j) {
  const double M = spectrum.median();
  const double mi = spectrum.mass(i), mj = spectrum.mass(j);
  const double di = mi * mi - M * M, dj = mj * mj - M * M;
  const double D = spectrum.delta(i, j);
  const double shift = L / (2.0 * p0 * p0);
  return std::conj(V[i]) * U[i] * V[j] * std::conj(U[j]) * std::polar(1.0, D * (L + s) / (2.0 * p0)) *
         psi(s - shift * di) * psi(s - shift * dj);
}

void check_dispersionless(const MixingVector& U, const MixingVector& V, const MassSpectrum& spectrum, double p0) {
  validate_mixing(U, spectrum.size());
  validate_mixing(V, spectrum.size());
  if (!(p0 > 0.0)) throw PreconditionError("dispersionless model needs p0 > 0");
}

}  // namespace

ProbabilityCurve toa_composite_dispersionless(const std::function<double(double)>& psi, const MixingVector& U,
                                              const MixingVector& V, const MassSpectrum& spectrum, double p0,
                                              const Grid1D& t, double L) {
  check_dispersionless(U, V, spectrum, p0);
  const double v0 = p0 / std::hypot(p0, spectrum.median());
  const std::size_t d = spectrum.size();
  ProbabilityCurve c;
  c.axis = t;
  c.L = L;
  c.values.resize(t.size());
  const double split = std::abs(spectrum.delta(d - 1, 0)) / (p0 * p0);
  if (split > 0.1) {
    std::ostringstream os;
    os << "mass splitting is not small against p0^2 (ratio " << split << "); the dispersionless model is unreliable";
    c.warnings.push_back(os.str());
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double s = v0 * t[k] - L;
    cplx acc = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) acc += dispersionless_term(psi, U, V, spectrum, p0, L, s, i, j);
    c.values[k] = acc.real();
  }
  c.finalize(tolerances().normalization);
  return c;
}

double toa_fringe_contrast(const std::function<double(double)>& psi, const MixingVector& U, const MixingVector& V,
                           const MassSpectrum& spectrum, double p0, double L, const Grid1D& s) {
  check_dispersionless(U, V, spectrum, p0);
  const std::size_t d = spectrum.size();
  std::vector<cplx> f(s.size());
  auto integral = [&](std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < s.size(); ++k) f[k] = dispersionless_term(psi, U, V, spectrum, p0, L, s[k], i, j);
    return integrate_1d(s, std::span<const cplx>(f));
  };
  double diag = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    diag += integral(i, i).real();
    for (std::size_t j = i + 1; j < d; ++j) cross += 2.0 * std::abs(integral(i, j));
  }
  if (!(diag > 0.0)) throw PreconditionError("fringe contrast: no weight on the diagonal terms");
  return cross / diag;
}

double coherence_length(const MassSpectrum& spectrum, std::size_t i, std::size_t j, double sigma, double p0) {
  if (i >= spectrum.size() || j >= spectrum.size()) throw PreconditionError("coherence length: flavor out of range");
  const double D = std::abs(spectrum.delta(i, j));
  if (D == 0.0) throw PreconditionError("coherence length: degenerate mass pair");
  return sigma * p0 * p0 / D;
}

MomentumDistribution canonical_distribution(const SourceCurrent& J, double M, const Grid1D& q) {
  if (!(q.min() > 0.0)) throw PreconditionError("momentum distribution needs q > 0");
  MomentumDistribution out{q, std::vector<double>(q.size())};
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double e = std::hypot(q[k], M);
    out.f[k] = std::norm(J(q[k], -e)) / (2.0 * e);
  }
  const double n = integrate_1d(q, std::span<const double>(out.f));
  if (!(n > 0.0)) throw PreconditionError("source has no weight on the momentum grid");
  for (auto& v : out.f) v /= n;
  return out;
}

double qudit_probability(const MixingVector& U, const MixingVector& V, const MassSpectrum& spectrum,
                         const MomentumDistribution& f, double L, QuditPhase phase) {
  validate_mixing(U, spectrum.size());
  validate_mixing(V, spectrum.size());
  if (f.f.size() != f.q.size()) throw PreconditionError("momentum distribution size does not match its grid");
  if (!(f.q.min() > 0.0)) throw PreconditionError("momentum distribution needs q > 0");
  for (double v : f.f)
    if (!(v >= 0.0)) throw PreconditionError("momentum distribution must be non-negative");
  const double n = integrate_1d(f.q, std::span<const double>(f.f));
  if (std::abs(n - 1.0) > tolerances().distribution_norm) {
    std::ostringstream os;
    os << "momentum distribution integrates to " << n << ", expected 1";
    throw PreconditionError(os.str());
  }
  const double c = phase == QuditPhase::HalfL ? 0.5 : 1.0;
  std::vector<double> g(f.q.size());
  for (std::size_t k = 0; k < f.q.size(); ++k) {
    cplx a = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
      const double m = spectrum.mass(i);
      a += std::conj(V[i]) * U[i] * std::polar(1.0, -m * m * L * c / f.q[k]);
    }
    g[k] = f.f[k] * std::norm(a);
  }
  return integrate_1d(f.q, std::span<const double>(g));
}

}  // namespace qtp
