#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "qtp/kernels.hpp"
#include "qtp/numerics.hpp"
#include "qtp/toa_engine.hpp"

namespace qtp {

/// Spin amplitudes psi_r(p), r = +1 (index 0) and r = -1 (index 1), in the
/// spinor basis along the line of flight.
struct SpinorPacket {
  Grid1D grid;
  std::array<std::vector<cplx>, 2> psi;
  double m = 1.0;

  /// Common Gaussian profile times spin weights (c_plus, c_minus); normalized.
  static SpinorPacket gaussian(double p0, double sigma, double m, const Grid1D& grid, cplx c_plus, cplx c_minus);
  double norm() const;
  void validate() const;
};

/// Symmetric detection kernel reduced to its three moments.
struct SymmetricKernelParams {
  double a = 1.0;
  double b_plus = 0.0;
  double b_minus = 0.0;
  void validate() const;
};

double bilinear_B(double p, double pp, double m);

/// A^rho_{rr'}(p,p') for rho = 0..3 as printed. A^1 and A^2 carry
/// i(p+p') sigma terms and are Hermitian only when p + p' = 0.
std::array<Mat2, 4> current_vector_A(double p, double pp, double m);

/// diag(zeta_+, zeta_-) with zeta_r = a B + (b_r / 2m)(eps + eps' + r (p + p')).
Mat2 symmetric_Z(const SymmetricKernelParams& k, double p, double pp, double m);
std::pair<double, double> zeta_pm(const SymmetricKernelParams& k, double p, double pp, double m);

/// (alpha_+, alpha_-) = (1/2p)[a + b_pm (eps +- p)/m].
std::pair<double, double> absorption_pm(const SymmetricKernelParams& k, double p, double m);

/// S_pm in terms of gamma_pm = b_pm / a. With a = 0 this throws unless
/// pure_b is set, in which case S is formed from zeta ratios directly.
std::pair<double, double> localization_S_pm(const SymmetricKernelParams& k, double p, double pp, double m,
                                            bool pure_b = false);

/// a = int dq/(2 eps_q) g(q),  b_pm = (1/2m) int dq/(2 eps_q) g(q)(eps_q +- q)
/// for a sampled trace g(q) = eta^{mu nu} R_{mu nu}(q, eps_q). The explicit
/// 1/2m in b_pm may double count the 1/2m of the Z display; treat the
/// result as indicative.
SymmetricKernelParams kernel_moments(const Grid1D& q, const std::function<double(double)>& g, double m);

struct DiracOptions {
  Engine engine = Engine::Parallel;
  bool allow_indefinite = false;
};

struct DiracResult {
  ProbabilityCurve total;
  std::array<ProbabilityCurve, 2> spin;  // sigma = +, -
  double P_tot = 0.0;
};

double dirac_total_probability(const SpinorPacket& psi, const SymmetricKernelParams& k);

DiracResult toa_density_dirac(const SpinorPacket& psi, const SymmetricKernelParams& k, const Grid1D& t, double L,
                              const DiracOptions& opt = {});

/// (P(+), P(-)) = int dp |psi~_sigma|^2.
std::pair<double, double> spin_probability(const SpinorPacket& psi, const SymmetricKernelParams& k);

/// S_rr'(p) = (1/2)[beta+ beta+^dagger - beta- beta-^dagger] per momentum.
std::vector<Mat2> spin_operator(const std::vector<std::array<Vec2, 2>>& beta);

/// Eigenvectors of the symmetric-kernel Z: the standard basis at every p.
std::vector<std::array<Vec2, 2>> symmetric_kernel_spin_basis(const Grid1D& grid);

}  // namespace qtp
