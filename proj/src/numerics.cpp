#include "qtp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "qtp/errors.hpp"
#include "qtp/tolerances.hpp"

namespace qtp {

Grid1D::Grid1D(double min, double max, std::size_t n) : min_(min), max_(max), n_(n) {
  if (!(std::isfinite(min) && std::isfinite(max)) || !(min < max))
    throw PreconditionError("Grid1D: need finite min < max");
  if (n < 2) throw PreconditionError("Grid1D: need at least 2 points");
}

std::vector<double> Grid1D::points() const {
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = (*this)[i];
  return x;
}

std::vector<double> quadrature_weights(const Grid1D& g, Quadrature rule) {
  const std::size_t n = g.size();
  const double h = g.spacing();
  std::vector<double> w(n, h);
  if (rule == Quadrature::Trapezoid) {
    w.front() = w.back() = 0.5 * h;
    return w;
  }
  if (n % 2 == 0) throw PreconditionError("Simpson quadrature needs an odd number of points");
  for (std::size_t i = 0; i < n; ++i) w[i] = h / 3.0 * ((i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0));
  return w;
}

namespace {

template <class T>
T integrate_impl(const Grid1D& g, std::span<const T> f, Quadrature rule) {
  if (f.size() != g.size()) throw PreconditionError("integrate_1d: sample count does not match grid");
  const std::size_t n = g.size();
  if (rule == Quadrature::Simpson && n % 2 == 0)
    throw PreconditionError("Simpson quadrature needs an odd number of points");
  T sum{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool finite;
    if constexpr (std::is_same_v<T, cplx>)
      finite = std::isfinite(f[i].real()) && std::isfinite(f[i].imag());
    else
      finite = std::isfinite(f[i]);
    if (!finite) {
      std::ostringstream os;
      os << "integrate_1d: non-finite sample at grid index " << i << " (x = " << g[i] << ")";
      throw NumericError(os.str());
    }
    double w = 1.0;
    if (rule == Quadrature::Trapezoid)
      w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    else
      w = ((i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0)) / 3.0;
    sum += w * f[i];
  }
  return sum * (g.max() - g.min()) / static_cast<double>(n - 1);
}

}  // namespace

double integrate_1d(const Grid1D& g, std::span<const double> f, Quadrature rule) {
  return integrate_impl<double>(g, f, rule);
}

cplx integrate_1d(const Grid1D& g, std::span<const cplx> f, Quadrature rule) {
  return integrate_impl<cplx>(g, f, rule);
}

ComplexField2::ComplexField2(Grid1D rows, Grid1D cols)
    : rows_(rows), cols_(cols), data_(rows.size() * cols.size()) {}

ComplexField2 ComplexField2::outer(const Grid1D& g, std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != g.size() || b.size() != g.size())
    throw PreconditionError("ComplexField2::outer: amplitude size does not match grid");
  ComplexField2 out(g, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) out(i, j) = a[i] * std::conj(b[j]);
  return out;
}

double ComplexField2::max_abs() const {
  double m = 0.0;
  for (auto v : data_) m = std::max(m, std::abs(v));
  return m;
}

double ComplexField2::hermiticity_defect() const {
  if (!square()) return INFINITY;
  const double scale = max_abs();
  if (scale == 0.0) return 0.0;
  double d = 0.0;
  const std::size_t n = rows_.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return d / scale;
}

void ComplexField2::mark_hermitian() {
  const double d = hermiticity_defect();
  if (d > tolerances().hermitian_field_rel) {
    std::ostringstream os;
    os << "field is not Hermitian (relative defect " << d << ")";
    throw NumericError(os.str());
  }
  hermitian_ = true;
}

ComplexField2& ComplexField2::operator*=(cplx c) {
  for (auto& v : data_) v *= c;
  if (c.imag() != 0.0) hermitian_ = false;
  return *this;
}

ComplexField2& ComplexField2::operator+=(const ComplexField2& o) {
  if (!(rows_ == o.rows_ && cols_ == o.cols_)) throw PreconditionError("ComplexField2: grid mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

Eigen::MatrixXcd ComplexField2::to_matrix() const {
  Eigen::MatrixXcd m(rows_.size(), cols_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (std::size_t j = 0; j < cols_.size(); ++j) m(i, j) = (*this)(i, j);
  return m;
}

Vec2 canonical_phase(const Vec2& v) {
  const double scale = v.norm();
  for (int c = 0; c < 2; ++c) {
    if (std::abs(v(c)) > 1e-14 * scale) return v * (std::abs(v(c)) / v(c));
  }
  return v;
}

EigHerm2 eig_herm2(const Mat2& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tolerances().herm2_abs * scale)
    throw NumericError("eig_herm2: matrix is not Hermitian");

  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const cplx c = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  const double mean = 0.5 * (a + d);
  const double half = 0.5 * (a - d);
  const double r = std::hypot(half, std::abs(c));

  EigHerm2 out;
  out.values = {mean + r, mean - r};
  const double mag = std::max(std::abs(out.values[0]), std::abs(out.values[1]));
  if (r <= 1e-15 * mag || r == 0.0) {
    out.degenerate = true;
    out.vectors = {Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
    return out;
  }
  Vec2 v;
  if (half >= 0.0)
    v = Vec2(half + r, std::conj(c));  // (lambda_+ - d, conj c)
  else
    v = Vec2(c, r - half);             // (c, lambda_+ - a)
  v.normalize();
  const Vec2 w(-std::conj(v(1)), std::conj(v(0)));
  out.vectors = {canonical_phase(v), canonical_phase(w)};
  return out;
}

PhaseFunction dispersion_phase(double m) {
  return [m](double p, double pp, double t, double L) {
    return (p - pp) * L - (std::hypot(p, m) - std::hypot(pp, m)) * t;
  };
}

OscillatoryResult oscillatory_double_integral(const ComplexField2& F, const PhaseFunction& phase,
                                              double t, double L) {
  const Grid1D& gp = F.rows();
  const Grid1D& gq = F.cols();
  const auto wp = quadrature_weights(gp);
  const auto wq = quadrature_weights(gq);
  const std::size_t n = gp.size(), m = gq.size();

  OscillatoryResult out{};
  std::vector<double> prev(m), cur(m);
  cplx sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double ph = phase(gp[i], gq[j], t, L);
      cur[j] = ph;
      if (j > 0) out.max_phase_step = std::max(out.max_phase_step, std::abs(ph - cur[j - 1]));
      if (i > 0) out.max_phase_step = std::max(out.max_phase_step, std::abs(ph - prev[j]));
      const cplx f = F(i, j);
      if (f != cplx(0.0)) sum += wp[i] * wq[j] * f * std::exp(cplx(0.0, ph));
    }
    std::swap(prev, cur);
  }
  out.value = sum / (2.0 * std::numbers::pi);
  out.coarse_phase = out.max_phase_step > tolerances().phase_step;
  return out;
}

WignerTransform wigner_weyl(const ComplexField2& A) {
  if (!A.square()) throw PreconditionError("wigner_weyl: needs a square field on one grid");
  const Grid1D& g = A.rows();
  const std::size_t n = g.size();
  const std::size_t N = 2 * n + 1;
  const double h = g.spacing();
  const double dx = 2.0 * std::numbers::pi / (static_cast<double>(N) * 2.0 * h);
  const double half_span = dx * static_cast<double>(n);

  WignerTransform out{g, Grid1D(-half_span, half_span, N), std::vector<cplx>(n * N)};

  auto* buf = fftw_alloc_complex(N);
  fftw_plan plan;
#pragma omp critical(qtp_fftw_plan)
  plan = fftw_plan_dft_1d(static_cast<int>(N), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);

  const double pref = 2.0 * h / (2.0 * std::numbers::pi);
  for (std::size_t c = 0; c < n; ++c) {
    std::fill(reinterpret_cast<cplx*>(buf), reinterpret_cast<cplx*>(buf) + N, cplx(0.0));
    const std::size_t reach = std::min(c, n - 1 - c);
    for (std::size_t mm = 0; mm <= reach; ++mm) {
      reinterpret_cast<cplx*>(buf)[mm] = A(c + mm, c - mm);
      if (mm > 0) reinterpret_cast<cplx*>(buf)[N - mm] = A(c - mm, c + mm);
    }
    fftw_execute(plan);
    // x_l = l dx, l in [-n, n]; FFT bin l mod N.
    for (std::size_t ix = 0; ix < N; ++ix) {
      const long l = static_cast<long>(ix) - static_cast<long>(n);
      const std::size_t bin = static_cast<std::size_t>((l + static_cast<long>(N)) % static_cast<long>(N));
      out.values[c * N + ix] = pref * reinterpret_cast<cplx*>(buf)[bin];
    }
  }
#pragma omp critical(qtp_fftw_plan)
  fftw_destroy_plan(plan);
  fftw_free(buf);
  return out;
}

cplx wigner_at(const ComplexField2& A, std::size_t ik, double x) {
  if (!A.square()) throw PreconditionError("wigner_at: needs a square field on one grid");
  const std::size_t n = A.rows().size();
  if (ik >= n) throw PreconditionError("wigner_at: k index out of range");
  const double h = A.rows().spacing();
  const std::size_t reach = std::min(ik, n - 1 - ik);
  cplx sum = A(ik, ik);
  for (std::size_t mm = 1; mm <= reach; ++mm) {
    const double xi = 2.0 * h * static_cast<double>(mm);
    sum += A(ik + mm, ik - mm) * std::exp(cplx(0.0, xi * x)) + A(ik - mm, ik + mm) * std::exp(cplx(0.0, -xi * x));
  }
  return sum * (2.0 * h / (2.0 * std::numbers::pi));
}

void ProbabilityCurve::finalize(double tol) {
  total_integral = integrate_1d(axis, std::span<const double>(values));
  normalized = std::abs(total_integral - 1.0) <= tol;
}

double ProbabilityCurve::peak_position() const {
  auto it = std::max_element(values.begin(), values.end());
  return axis[static_cast<std::size_t>(it - values.begin())];
}

double ProbabilityCurve::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

ProbabilityCurve gaussian_smear(const ProbabilityCurve& curve, double tau) {
  if (!(tau > 0.0)) throw PreconditionError("gaussian_smear: tau must be positive");
  const double h = curve.axis.spacing();
  if (tau < tolerances().smear_min_spacings * h)
    throw NumericError("gaussian_smear: tau is smaller than two grid spacings");
  const std::size_t n = curve.values.size();
  const long reach = static_cast<long>(std::ceil(12.0 * tau / h));
  std::vector<double> kern(static_cast<std::size_t>(reach) + 1);
  for (long j = 0; j <= reach; ++j) {
    const double s = static_cast<double>(j) * h / tau;
    kern[static_cast<std::size_t>(j)] = std::exp(-0.5 * s * s);
  }

  ProbabilityCurve out = curve;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    const long lo = std::max(0L, i - reach);
    const long hi = std::min(static_cast<long>(n) - 1, i + reach);
    double num = 0.0, den = 0.0;
    for (long j = lo; j <= hi; ++j) {
      const double w = kern[static_cast<std::size_t>(std::abs(i - j))];
      num += w * curve.values[static_cast<std::size_t>(j)];
      den += w;
    }
    out.values[static_cast<std::size_t>(i)] = num / den;
  }
  out.finalize(tolerances().normalization);
  return out;
}

}  // namespace qtp
