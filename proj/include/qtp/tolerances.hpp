#pragma once

#include <numbers>
#include <string_view>

namespace qtp {

/// Every numerical threshold used by the library lives here.
struct Tolerances {
  double hermitian_field_rel = 1e-12;   // ComplexField2 Hermitian flag
  double herm2_abs = 1e-9;              // eig_herm2 input check
  double positivity_rel = 1e-10;        // certify_positivity: lambda_min >= -tol * lambda_max
  std::size_t max_certify_points = 512;
  double normalization = 1e-3;          // |int P_c dt - 1|
  double packet_norm = 1e-8;            // wave packet normalization
  double mixing_norm = 1e-12;           // sum |V_i|^2 = 1
  double distribution_norm = 1e-8;      // qudit f(q)
  double phase_step = std::numbers::pi / 4;  // coarse-grid warning threshold
  double degeneracy_rel = 1e-12;        // polarization degeneracy flag
  double negative_eigen_abs = 1e-9;     // polarized kernel PSD check
  double family_closure = 1e-6;         // POVM family resolves identity
  double smear_min_spacings = 2.0;      // tau >= this many grid spacings
  double kernel_variation = 0.10;       // smeared_probability slow-kernel check
  double source_phase = 1e-3;           // state-independence threshold [rad]
  double orthonormal = 1e-10;           // eigenvector branches / spin operator input

  static Tolerances defaults() { return {}; }

  static Tolerances strict() {
    Tolerances t;
    t.positivity_rel = 1e-12;
    t.normalization = 1e-4;
    t.phase_step = std::numbers::pi / 8;
    t.kernel_variation = 0.05;
    return t;
  }
};

/// Process-wide active profile. Set once at startup (the CLI does this from
/// --tolerance-profile); library code only reads it.
const Tolerances& tolerances();
void set_tolerances(const Tolerances& t);
/// Accepts "default" or "strict"; throws std::invalid_argument otherwise.
void set_tolerance_profile(std::string_view name);

}  // namespace qtp
