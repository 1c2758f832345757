#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "qtp/numerics.hpp"

namespace qtp {

/// Flat response R(p, eps) = C.
struct Glauber {
  double C = 1.0;
};

/// R(p, eps) = C exp(-a p - b eps). Every member of this family localizes
/// maximally (S = 1).
struct ExpDecay {
  double C = 1.0;
  double a = 0.0;
  double b = 0.0;
};

/// Gaussian response around (p0, eps0). An infinite width switches off the
/// dependence on that variable.
struct GaussianBump {
  double C = 1.0;
  double p0 = 0.0;
  double sigma_p = std::numeric_limits<double>::infinity();
  double eps0 = 0.0;
  double sigma_eps = std::numeric_limits<double>::infinity();
};

/// Bilinear interpolation of a table over (p, eps); clamped to the table
/// edges outside it.
struct TabulatedKernel {
  Grid1D p_axis;
  Grid1D eps_axis;
  std::vector<double> values;  // values[ip * eps_axis.size() + ie]
};

using DetectionKernel = std::variant<Glauber, ExpDecay, GaussianBump, TabulatedKernel>;

/// R(p, eps); zero for eps < 0.
double evaluate(const DetectionKernel& K, double p, double eps);
/// log R(p, eps); -inf where the kernel vanishes. Used for ratios so that
/// strongly decaying kernels do not underflow.
double log_evaluate(const DetectionKernel& K, double p, double eps);
DetectionKernel scaled(const DetectionKernel& K, double c);
std::string kernel_name(const DetectionKernel& K);
/// Throws PreconditionError on negative parameters or table values.
void validate(const DetectionKernel& K);

enum class Positivity { Unknown, Positive, Indefinite };

struct PositivityCertificate {
  Positivity status = Positivity::Unknown;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  std::vector<cplx> witness;  // eigenvector of min_eigenvalue when indefinite
};

struct LocalizationOperator {
  ComplexField2 S;
  Positivity certificate = Positivity::Unknown;
};

/// S(p,p') = R(pbar, epsbar) / sqrt(R(p,eps_p) R(p',eps_p')).
LocalizationOperator localization_from_kernel(const DetectionKernel& K, double m, const Grid1D& grid);

/// Eigenvalue test on the sampled matrix. This certifies the grid matrix,
/// not the continuum operator.
PositivityCertificate certify_positivity(const LocalizationOperator& S);

/// Certifies S in place; throws IndefiniteKernelError with the witness on
/// failure.
void require_positive(LocalizationOperator& S);

/// alpha(p) = R(p, eps_p) / 2p.
double absorption_scalar(const DetectionKernel& K, double m, double p);

}  // namespace qtp
