#pragma once

#include <vector>

#include "qtp/kernels.hpp"
#include "qtp/numerics.hpp"
#include "qtp/toa_engine.hpp"

namespace qtp {

/// Momentum amplitude psi(p) of a single particle moving towards the
/// detector (p > 0 on the whole grid).
struct WavePacket {
  Grid1D grid;
  std::vector<cplx> psi;
  double m = 0.0;

  /// psi(p) ~ exp(-(p - p0)^2 / 4 sigma^2 - i p x0), normalized on the grid,
  /// so |psi|^2 has standard deviation sigma.
  static WavePacket gaussian(double p0, double sigma, double m, const Grid1D& grid, double x0 = 0.0);

  double norm() const;
  /// Throws PreconditionError for p <= 0 support or a norm off by more than
  /// the packet tolerance.
  void validate() const;
  ComplexField2 density() const;
  double mean_momentum() const;
  double momentum_spread() const;
};

/// [L/v_max - 10 W, L/v_min + 10 W] with v_min, v_max taken at
/// mean -/+ 4 spread and W = 1/(spread v0).
Grid1D default_time_window(const WavePacket& psi, double L, std::size_t n);

struct DensityValue {
  double value = 0.0;
  double max_phase_step = 0.0;
  bool coarse_phase = false;
};

/// Unconditioned density: int dp dp'/2pi rho(p,p') R(pbar, epsbar) / (2 sqrt(eps eps'))
/// times the free phase, summed by the oracle integrator.
DensityValue unconditional_density(const ComplexField2& rho, double m, const DetectionKernel& K, double t,
                                   double L);

/// P_tot = int dp rho(p,p) alpha(p).
double total_detection_probability(const ComplexField2& rho, double m, const DetectionKernel& K);
double total_detection_probability(const WavePacket& psi, const DetectionKernel& K);

/// rho~(p,p') = rho(p,p') sqrt(alpha(p) alpha(p')) / P_tot.
ComplexField2 conditioned_state(const ComplexField2& rho, double m, const DetectionKernel& K);

struct ToaOptions {
  Engine engine = Engine::Parallel;
  bool allow_indefinite = false;
};

/// int dp dp'/2pi rho~ sqrt(v v') S exp(i(p-p')L - i(eps-eps')t) on t.
/// The Oracle engine instead divides the unconditioned density by P_tot.
ProbabilityCurve conditioned_density(const ComplexField2& rho, double m, const DetectionKernel& K, const Grid1D& t,
                                     double L, const ToaOptions& opt = {});
ProbabilityCurve conditioned_density(const WavePacket& psi, const DetectionKernel& K, const Grid1D& t, double L,
                                     const ToaOptions& opt = {});

/// The same density for an already conditioned state and an explicit
/// localization operator.
ProbabilityCurve toa_curve(const ComplexField2& rho_tilde, double m, const LocalizationOperator& S, const Grid1D& t,
                           double L, Engine engine = Engine::Parallel);

}  // namespace qtp
