#include "qtp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qtp/errors.hpp"
#include "qtp/tolerances.hpp"

namespace qtp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double gaussian_factor(double x, double x0, double sigma) {
  if (std::isinf(sigma)) return 1.0;
  const double u = (x - x0) / sigma;
  return std::exp(-0.5 * u * u);
}

double interpolate(const TabulatedKernel& T, double p, double eps) {
  auto locate = [](const Grid1D& g, double x, std::size_t& i, double& f) {
    const double s = std::clamp((x - g.min()) / g.spacing(), 0.0, static_cast<double>(g.size() - 1));
    i = std::min(static_cast<std::size_t>(s), g.size() - 2);
    f = s - static_cast<double>(i);
  };
  std::size_t ip, ie;
  double fp, fe;
  locate(T.p_axis, p, ip, fp);
  locate(T.eps_axis, eps, ie, fe);
  const std::size_t ne = T.eps_axis.size();
  auto v = [&](std::size_t a, std::size_t b) { return T.values[a * ne + b]; };
  return (1 - fp) * ((1 - fe) * v(ip, ie) + fe * v(ip, ie + 1)) +
         fp * ((1 - fe) * v(ip + 1, ie) + fe * v(ip + 1, ie + 1));
}

}  // namespace

double log_evaluate(const DetectionKernel& K, double p, double eps) {
  if (eps < 0.0) return -INFINITY;
  auto log_gauss = [](double x, double x0, double sigma) {
    if (std::isinf(sigma)) return 0.0;
    const double u = (x - x0) / sigma;
    return -0.5 * u * u;
  };
  return std::visit(overloaded{
                        [](const Glauber& k) { return std::log(k.C); },
                        [&](const ExpDecay& k) { return std::log(k.C) - k.a * p - k.b * eps; },
                        [&](const GaussianBump& k) {
                          return std::log(k.C) + log_gauss(p, k.p0, k.sigma_p) + log_gauss(eps, k.eps0, k.sigma_eps);
                        },
                        [&](const TabulatedKernel& k) { return std::log(interpolate(k, p, eps)); },
                    },
                    K);
}

double evaluate(const DetectionKernel& K, double p, double eps) {
  if (eps < 0.0) return 0.0;
  return std::visit(overloaded{
                        [](const Glauber& k) { return k.C; },
                        [&](const ExpDecay& k) { return k.C * std::exp(-k.a * p - k.b * eps); },
                        [&](const GaussianBump& k) {
                          return k.C * gaussian_factor(p, k.p0, k.sigma_p) * gaussian_factor(eps, k.eps0, k.sigma_eps);
                        },
                        [&](const TabulatedKernel& k) { return interpolate(k, p, eps); },
                    },
                    K);
}

DetectionKernel scaled(const DetectionKernel& K, double c) {
  return std::visit(overloaded{
                        [c](Glauber k) -> DetectionKernel { k.C *= c; return k; },
                        [c](ExpDecay k) -> DetectionKernel { k.C *= c; return k; },
                        [c](GaussianBump k) -> DetectionKernel { k.C *= c; return k; },
                        [c](TabulatedKernel k) -> DetectionKernel {
                          for (auto& v : k.values) v *= c;
                          return k;
                        },
                    },
                    K);
}

std::string kernel_name(const DetectionKernel& K) {
  static const char* names[] = {"glauber", "exp_decay", "gaussian_bump", "tabulated"};
  return names[K.index()];
}

void validate(const DetectionKernel& K) {
  std::visit(overloaded{
                 [](const Glauber& k) {
                   if (!(k.C > 0)) throw PreconditionError("glauber kernel: C must be positive");
                 },
                 [](const ExpDecay& k) {
                   if (!(k.C > 0)) throw PreconditionError("exp_decay kernel: C must be positive");
                   if (!(k.a >= 0 && k.b >= 0)) throw PreconditionError("exp_decay kernel: a and b must be >= 0");
                 },
                 [](const GaussianBump& k) {
                   if (!(k.C > 0)) throw PreconditionError("gaussian_bump kernel: C must be positive");
                   if (!(k.sigma_p > 0 && k.sigma_eps > 0))
                     throw PreconditionError("gaussian_bump kernel: widths must be positive");
                 },
                 [](const TabulatedKernel& k) {
                   if (k.values.size() != k.p_axis.size() * k.eps_axis.size())
                     throw PreconditionError("tabulated kernel: table size does not match its axes");
                   for (double v : k.values)
                     if (!(v >= 0.0) || !std::isfinite(v))
                       throw PreconditionError("tabulated kernel: values must be finite and >= 0");
                 },
             },
             K);
}

LocalizationOperator localization_from_kernel(const DetectionKernel& K, double m, const Grid1D& grid) {
  if (!(grid.min() > 0.0)) throw PreconditionError("localization operator: momentum grid must lie in p > 0");
  const std::size_t n = grid.size();
  std::vector<double> eps(n), diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    eps[i] = std::hypot(grid[i], m);
    diag[i] = log_evaluate(K, grid[i], eps[i]);
    if (!std::isfinite(diag[i])) {
      std::ostringstream os;
      os << "zero detection efficiency at p = " << grid[i] << " (grid index " << i << ")";
      throw PreconditionError(os.str());
    }
  }
  LocalizationOperator out{ComplexField2(grid, grid), Positivity::Unknown};
  for (std::size_t i = 0; i < n; ++i) {
    out.S(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double mid = log_evaluate(K, 0.5 * (grid[i] + grid[j]), 0.5 * (eps[i] + eps[j]));
      const double s = std::exp(mid - 0.5 * (diag[i] + diag[j]));
      out.S(i, j) = s;
      out.S(j, i) = s;
    }
  }
  out.S.mark_hermitian();
  return out;
}

PositivityCertificate certify_positivity(const LocalizationOperator& S) {
  const std::size_t n = S.S.rows().size();
  if (!S.S.square()) throw PreconditionError("certify_positivity: S must be square");
  if (n > tolerances().max_certify_points) {
    std::ostringstream os;
    os << "certify_positivity: grid of " << n << " points exceeds the limit of " << tolerances().max_certify_points;
    throw PreconditionError(os.str());
  }
  Eigen::MatrixXcd M = S.S.to_matrix();
  M = 0.5 * (M + M.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  if (es.info() != Eigen::Success) throw NumericError("certify_positivity: eigensolver failed");
  PositivityCertificate c;
  c.min_eigenvalue = es.eigenvalues()(0);
  c.max_eigenvalue = es.eigenvalues()(static_cast<Eigen::Index>(n) - 1);
  const double floor = -tolerances().positivity_rel * std::max(std::abs(c.max_eigenvalue), 1e-300);
  if (c.min_eigenvalue >= floor) {
    c.status = Positivity::Positive;
  } else {
    c.status = Positivity::Indefinite;
    const auto v = es.eigenvectors().col(0);
    c.witness.assign(v.data(), v.data() + v.size());
  }
  return c;
}

void require_positive(LocalizationOperator& S) {
  const auto c = certify_positivity(S);
  S.certificate = c.status;
  if (c.status == Positivity::Indefinite) {
    std::ostringstream os;
    os << "localization operator is indefinite on the grid (min eigenvalue " << c.min_eigenvalue
       << ", max " << c.max_eigenvalue << ")";
    throw IndefiniteKernelError(os.str(), c.min_eigenvalue, c.witness);
  }
}

double absorption_scalar(const DetectionKernel& K, double m, double p) {
  if (!(p > 0.0)) throw PreconditionError("absorption coefficient needs p > 0");
  return evaluate(K, p, std::hypot(p, m)) / (2.0 * p);
}

}  // namespace qtp
