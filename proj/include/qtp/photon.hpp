#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "qtp/kernels.hpp"
#include "qtp/numerics.hpp"
#include "qtp/toa_engine.hpp"

namespace qtp {

/// R_rr'(k) = R(k, omega = k) * matrix.
struct FactorizedPolarizedKernel {
  DetectionKernel scalar = Glauber{};
  Mat2 matrix = Mat2::Identity();
};

/// Entrywise linear interpolation of 2x2 samples over k, clamped at the
/// table ends.
struct TabulatedPolarizedKernel {
  Grid1D k;
  std::vector<Mat2> values;
};

using PolarizedKernel = std::variant<FactorizedPolarizedKernel, TabulatedPolarizedKernel>;

/// R_rr'(k) for k > 0, half of it at k = 0 and zero for k < 0.
Mat2 evaluate_polarized(const PolarizedKernel& K, double k);

struct PolarizationDecomposition {
  Grid1D grid;
  std::vector<std::array<double, 2>> R;  // [+, -]
  std::vector<std::array<Vec2, 2>> beta;
  std::vector<bool> degenerate;
  bool any_degenerate = false;

  double alpha(std::size_t i, int s) const { return 0.5 * grid[i] * R[i][static_cast<std::size_t>(s)]; }
};

/// Per-k eigensystem of the kernel. Branches follow the eigenvector with the
/// largest overlap with the previous grid point; at degenerate points the
/// previous eigenvectors are kept.
PolarizationDecomposition decompose_polarization(const PolarizedKernel& K, const Grid1D& grid);

/// Single-photon density rho_rr'(k,k') and photon-number interference
/// zeta_rr'(k,k'), stored as fields indexed by 2 r + r'.
struct PhotonState {
  Grid1D grid;
  std::array<ComplexField2, 4> rho;
  std::array<ComplexField2, 4> zeta;
  bool has_zeta = false;

  const ComplexField2& rho_rr(int r, int rp) const { return rho[static_cast<std::size_t>(2 * r + rp)]; }
  const ComplexField2& zeta_rr(int r, int rp) const { return zeta[static_cast<std::size_t>(2 * r + rp)]; }

  /// Fock state with one photon: rho = phi(k) conj(phi(k')) e e^dagger, zeta = 0.
  static PhotonState single(const Grid1D& grid, const std::vector<cplx>& phi, const Vec2& polarization);
  /// One photon with the polarization maximally mixed.
  static PhotonState unpolarized(const Grid1D& grid, const std::vector<cplx>& phi);
  /// Coherent state of mode amplitude a(k) e: rho = a(k) conj(a(k')) e e^dagger,
  /// zeta = a(k) a(k') e e^T.
  static PhotonState coherent(const Grid1D& grid, const std::vector<cplx>& a, const Vec2& polarization);

  /// Applies a common unitary to the polarization index.
  PhotonState rotated(const Mat2& U) const;
};

/// Gaussian mode function exp(-(k-k0)^2/4 sigma^2 - i k x0), unit L2 norm on the grid.
std::vector<cplx> gaussian_mode(const Grid1D& grid, double k0, double sigma, double x0 = 0.0);

struct PhotonTerms {
  double P0 = 0.0;
  double Q = 0.0;
  double P1 = 0.0;
  double total = 0.0;
};

struct PhotonTermCurves {
  double P0 = 0.0;
  std::vector<double> Q;
  std::vector<double> P1;
};

/// Vacuum term sum_r int_0^kc dk/4pi R_rr(k). Without an explicit cutoff the
/// integral runs to kc = k_max, which must lie where the kernel has decayed.
double vacuum_term(const PolarizedKernel& K, double k_max, std::optional<double> cutoff = std::nullopt);

PhotonTerms photodetection_terms(const PhotonState& state, const PolarizedKernel& K, double t, double L,
                                 std::optional<double> cutoff = std::nullopt);

/// Q and P1 on a t grid. tau > 0 applies Gaussian time smearing of width tau
/// analytically (a factor exp(-omega^2 tau^2 / 2) per frequency omega).
PhotonTermCurves photodetection_curves(const PhotonState& state, const PolarizedKernel& K, const Grid1D& t,
                                       double L, double tau = 0.0, Engine engine = Engine::Parallel,
                                       std::optional<double> cutoff = std::nullopt);

/// P1 / P_tot evaluated by direct double sums. Equals the far-field curve
/// whenever the kernel eigenvectors do not depend on k.
ProbabilityCurve p1_conditioned_oracle(const PhotonState& state, const PolarizedKernel& K, const Grid1D& t, double L);

double photon_total_probability(const PhotonState& state, const PolarizationDecomposition& dec);

struct FarfieldResult {
  ProbabilityCurve total;
  std::array<ProbabilityCurve, 2> component;  // sigma = +, -
  double P_tot = 0.0;
  bool degenerate = false;
};

/// Conditioned state rho~_{sigma sigma'}(k,k') in the kernel eigenbasis.
std::array<ComplexField2, 4> photon_conditioned_state(const PhotonState& state, const PolarizationDecomposition& on_grid,
                                                      double P_tot);

FarfieldResult farfield_toa(const PhotonState& state, const PolarizedKernel& K, const Grid1D& t, double L,
                            Engine engine = Engine::Parallel);

ProbabilityCurve polarization_resolved(const PhotonState& state, const PolarizedKernel& K, const Grid1D& t, double L,
                                       int sigma, Engine engine = Engine::Parallel);

/// Sigma(k; q) as 2x2 matrices in the (sigma, sigma') kernel eigenbasis:
/// family[q][ik].
using ProjectorFamily = std::vector<std::vector<Mat2>>;

ProjectorFamily polarization_projectors(const Grid1D& grid);
ProjectorFamily momentum_bins(const Grid1D& grid, const std::vector<double>& edges);
/// Two smooth complementary bins split at k_split with logistic width w.
ProjectorFamily smooth_bins(const Grid1D& grid, double k_split, double w);

std::vector<double> time_averaged_observable(const PhotonState& state, const PolarizedKernel& K,
                                             const ProjectorFamily& family);

struct NearFieldKernel {
  double C = 1.0;
  double a = 0.0;  // a = 0 selects the Glauber limit
};

/// Near-field interference term for one polarization, from the Wigner
/// transform of zeta.
std::vector<double> nearfield_Q(const ComplexField2& zeta, const NearFieldKernel& K, const Grid1D& t, double L);
double nearfield_Q(const ComplexField2& zeta, const NearFieldKernel& K, double t, double L);

}  // namespace qtp
