#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qtp/kernels.hpp"
#include "qtp/numerics.hpp"
#include "qtp/toa_engine.hpp"

namespace qtp {

/// Masses of the internal levels, non-decreasing, at most 16.
class MassSpectrum {
 public:
  MassSpectrum() = default;
  explicit MassSpectrum(std::vector<double> masses);

  std::size_t size() const { return m_.size(); }
  double mass(std::size_t i) const { return m_[i]; }
  const std::vector<double>& masses() const { return m_; }
  /// m_i^2 - m_j^2
  double delta(std::size_t i, std::size_t j) const { return m_[i] * m_[i] - m_[j] * m_[j]; }
  /// Median mass (mean of the two middle values for even d).
  double median() const;
  double energy(std::size_t i, double p) const;

 private:
  std::vector<double> m_;
};

using MixingVector = std::vector<cplx>;

/// Throws unless sum |V_i|^2 = 1 to the mixing tolerance and the length
/// matches d.
void validate_mixing(const MixingVector& V, std::size_t d);

/// J(q, omega) = exp(-(q - q0)^2 / 4 sigma^2) exp(-i (q - q0) x_c) h(omega),
/// h(omega) = exp(-(|omega| - omega0)^2 / 4 sigma_omega^2) (flat if
/// sigma_omega is infinite). The source occupies a region of width
/// 1/(2 sigma) centred at x_c.
struct SourceCurrent {
  double q0 = 1.0;
  double sigma = 0.1;
  double x_c = 5.0;
  double omega0 = 0.0;
  double sigma_omega = std::numeric_limits<double>::infinity();

  /// Source of spatial width w centred at x_c = w.
  static SourceCurrent with_width(double q0, double w);
  double spatial_width() const { return 0.5 / sigma; }
  /// Same source compressed by a factor 2 (width and centre halved).
  SourceCurrent halved() const;
  cplx operator()(double q, double omega) const;
};

struct SamplingFunction {
  double center = 0.0;
  double width = 1.0;
  double operator()(double x) const;  // unit-area Gaussian in x - center
};

/// rho_ij(p, p') of a flavored single-particle state.
class FlavorDensity {
 public:
  virtual ~FlavorDensity() = default;
  virtual std::size_t flavors() const = 0;
  virtual cplx rho(std::size_t i, std::size_t j, double p, double pp) const = 0;
  /// Throws PreconditionError naming the required extension when p is
  /// outside the state's domain.
  virtual void require_domain(double p) const = 0;
};

/// Pure state psi_i(p) sampled on a momentum grid; off-node values are
/// linearly interpolated.
class SampledFlavorState : public FlavorDensity {
 public:
  SampledFlavorState(Grid1D grid, std::vector<std::vector<cplx>> psi);

  std::size_t flavors() const override { return psi_.size(); }
  cplx rho(std::size_t i, std::size_t j, double p, double pp) const override;
  void require_domain(double p) const override;

  const Grid1D& grid() const { return grid_; }
  const std::vector<cplx>& amplitude(std::size_t i) const { return psi_[i]; }
  cplx amplitude_at(std::size_t i, double p) const;
  /// sum_i int |psi_i|^2
  double norm() const;

 private:
  Grid1D grid_;
  std::vector<std::vector<cplx>> psi_;
};

/// psi_i(p) = (2 eps_i)^{-1/2} U_i J(p, -eps_i) evaluated analytically.
class SourceState : public FlavorDensity {
 public:
  SourceState(SourceCurrent J, MixingVector U, MassSpectrum spectrum);

  std::size_t flavors() const override { return spec_.size(); }
  cplx rho(std::size_t i, std::size_t j, double p, double pp) const override;
  void require_domain(double p) const override;
  cplx amplitude(std::size_t i, double p) const;

  const SourceCurrent& current() const { return J_; }
  const MassSpectrum& spectrum() const { return spec_; }

 private:
  SourceCurrent J_;
  MixingVector U_;
  MassSpectrum spec_;
};

/// Samples the source state on a grid. The norm is left as generated.
SampledFlavorState source_state(const SourceCurrent& J, const MixingVector& U, const MassSpectrum& spectrum,
                                const Grid1D& p_grid);

/// W(L,q) = sum_ij V_i conj(V_j) rho_ij(q + D_ji/4q, q - D_ji/4q) exp(i D_ji L / 2q),
/// D_ij = m_i^2 - m_j^2.
cplx momentum_marginal(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum, double L,
                       double q);

struct EnergyMarginal {
  cplx slow = 0.0;
  cplx fast = 0.0;
  cplx total() const { return slow + fast; }
};

/// Energy marginal with p_i(eps) = sqrt(eps^2 - m_i^2): a slow term of phase
/// D_ij L/(p_i + p_j) and a fast term of phase D_ij L/|p_i - p_j| (i != j).
EnergyMarginal energy_marginal(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum,
                               double L, double eps);

struct SmearedProbability {
  double P = 0.0;              // [R(Q,E)/2Q] int int chi_E chi_Q W
  double P_conditioned = 0.0;  // int int chi_E chi_Q W
  bool no_overlap = false;
  std::vector<std::string> warnings;
};

/// The energy delta of the fine-grained W is integrated analytically, so
/// only the q integral is done numerically (n_q Simpson points over
/// Q +- 8 sigma_Q).
SmearedProbability smeared_probability(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum,
                                       const DetectionKernel& K, const SamplingFunction& chi_E,
                                       const SamplingFunction& chi_Q, double L, std::size_t n_q = 2001);

/// chi_E-smeared energy marginal: the slow and fast parts separately.
struct SmearedEnergy {
  cplx slow = 0.0;
  cplx fast = 0.0;
  double fast_abs = 0.0;  // int chi_E |W_fast|
  /// |int chi_E W_fast| / int chi_E |W_fast|
  double fast_contrast() const { return fast_abs > 0.0 ? std::abs(fast) / fast_abs : 0.0; }
};

SmearedEnergy smeared_energy_marginal(const FlavorDensity& state, const MixingVector& V, const MassSpectrum& spectrum,
                                      const SamplingFunction& chi_E, double L, std::size_t n_eps = 4001);

struct StateIndependenceReport {
  double max_phase_deviation = 0.0;  // radians
  double threshold = 0.0;
  bool independent = true;
};

/// Compares the phases of every interference term of W(L,q) generated by
/// J and by J.halved() over the L grid.
StateIndependenceReport state_independence_check(const SourceCurrent& J, const MixingVector& U, const MixingVector& V,
                                                 const MassSpectrum& spectrum, const Grid1D& L_grid, double q);

struct CompositeOptions {
  Engine engine = Engine::Parallel;
  bool allow_indefinite = false;
};

/// P_c(t,L) = sum_ij V_i conj(V_j) int dp dp'/2pi rho~_ij sqrt(v_ip v_jp') S(p,p') exp(...).
/// alpha and S are taken from the kernel at the median mass. The Oracle
/// engine evaluates the same expression as a direct double sum per t.
ProbabilityCurve toa_composite_exact(const SampledFlavorState& state, const MixingVector& V,
                                     const MassSpectrum& spectrum, const DetectionKernel& K, const Grid1D& t, double L,
                                     const CompositeOptions& opt = {});

/// psi(x) = exp(-2 x^2 / sigma^2): |psi|^2 has full 1/e width sigma.
std::function<double(double)> gaussian_envelope(double sigma);

/// Dispersionless model in s = v0 t - L, returned on the t grid.
ProbabilityCurve toa_composite_dispersionless(const std::function<double(double)>& psi, const MixingVector& U,
                                              const MixingVector& V, const MassSpectrum& spectrum, double p0,
                                              const Grid1D& t, double L);

/// Integrated interference visibility of the dispersionless model:
/// 2 sum_{i<j} |int c_ij ds| / sum_i int c_ii ds over the s grid.
double toa_fringe_contrast(const std::function<double(double)>& psi, const MixingVector& U, const MixingVector& V,
                           const MassSpectrum& spectrum, double p0, double L, const Grid1D& s);

/// sigma p0^2 / |m_i^2 - m_j^2|
double coherence_length(const MassSpectrum& spectrum, std::size_t i, std::size_t j, double sigma, double p0);

enum class QuditPhase { HalfL, FullL };  // exp(-i M^2 L / 2q) or exp(-i M^2 L / q)

/// Momentum distribution f(q) sampled on a grid.
struct MomentumDistribution {
  Grid1D q;
  std::vector<double> f;
};

/// f(q) = |J(q, -eps_q)|^2 / (2 eps_q) with eps_q = sqrt(q^2 + M^2), normalized on the grid.
MomentumDistribution canonical_distribution(const SourceCurrent& J, double M, const Grid1D& q);

double qudit_probability(const MixingVector& U, const MixingVector& V, const MassSpectrum& spectrum,
                         const MomentumDistribution& f, double L, QuditPhase phase = QuditPhase::HalfL);

}  // namespace qtp
