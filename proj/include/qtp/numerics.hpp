#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qtp {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

/// Uniform sampling of [min, max] with n points (both endpoints included).
class Grid1D {
 public:
  Grid1D() = default;
  Grid1D(double min, double max, std::size_t n);

  double min() const { return min_; }
  double max() const { return max_; }
  std::size_t size() const { return n_; }
  double spacing() const { return (max_ - min_) / static_cast<double>(n_ - 1); }
  double operator[](std::size_t i) const { return min_ + spacing() * static_cast<double>(i); }
  std::vector<double> points() const;

  /// Same interval sampled at twice the density: 2n-1 points, so the
  /// midpoints (x_i + x_j)/2 of the original grid are the nodes i+j.
  Grid1D half_grid() const { return Grid1D(min_, max_, 2 * n_ - 1); }

  bool operator==(const Grid1D& o) const {
    return min_ == o.min_ && max_ == o.max_ && n_ == o.n_;
  }

 private:
  double min_ = 0.0;
  double max_ = 1.0;
  std::size_t n_ = 2;
};

enum class Quadrature { Trapezoid, Simpson };

/// Simpson needs an odd number of points.
std::vector<double> quadrature_weights(const Grid1D& g, Quadrature rule = Quadrature::Trapezoid);

double integrate_1d(const Grid1D& g, std::span<const double> f,
                    Quadrature rule = Quadrature::Trapezoid);
cplx integrate_1d(const Grid1D& g, std::span<const cplx> f,
                  Quadrature rule = Quadrature::Trapezoid);

/// Complex samples F(x_i, y_j) on a product grid, row-major in i.
class ComplexField2 {
 public:
  ComplexField2() = default;
  ComplexField2(Grid1D rows, Grid1D cols);

  template <class F>
  static ComplexField2 sample(const Grid1D& rows, const Grid1D& cols, F&& f) {
    ComplexField2 out(rows, cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = f(rows[i], cols[j]);
    return out;
  }

  /// Outer product g(x) conj(h(y)).
  static ComplexField2 outer(const Grid1D& g, std::span<const cplx> a, std::span<const cplx> b);

  const Grid1D& rows() const { return rows_; }
  const Grid1D& cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_.size() + j]; }
  cplx operator()(std::size_t i, std::size_t j) const { return data_[i * cols_.size() + j]; }
  std::span<const cplx> data() const { return data_; }
  std::span<cplx> data() { return data_; }

  /// Sets the Hermitian flag after checking F(x,y) = conj F(y,x) to the
  /// active tolerance; throws NumericError otherwise.
  void mark_hermitian();
  bool hermitian() const { return hermitian_; }
  /// Largest |F(i,j) - conj F(j,i)| relative to max |F|.
  double hermiticity_defect() const;
  double max_abs() const;

  ComplexField2& operator*=(cplx c);
  ComplexField2& operator+=(const ComplexField2& o);

  Eigen::MatrixXcd to_matrix() const;

 private:
  Grid1D rows_, cols_;
  std::vector<cplx> data_;
  bool hermitian_ = false;
};

struct EigHerm2 {
  std::array<double, 2> values;  // descending
  std::array<Vec2, 2> vectors;   // first nonzero component real positive
  bool degenerate = false;
};

/// Closed-form eigensystem of a 2x2 Hermitian matrix.
EigHerm2 eig_herm2(const Mat2& m);

/// Fixes the phase so that the first nonzero component is real positive.
Vec2 canonical_phase(const Vec2& v);

using PhaseFunction = std::function<double(double p, double pp, double t, double L)>;

/// (p - p')L - (eps_p - eps_p')t for dispersion eps = sqrt(p^2 + m^2).
PhaseFunction dispersion_phase(double m);

struct OscillatoryResult {
  cplx value;
  double max_phase_step = 0.0;
  bool coarse_phase = false;
};

/// Direct trapezoid double sum of  int dp dp'/2pi F(p,p') exp(i phase).
/// One std::exp per grid pair and no factorization: this is the brute-force
/// reference everything else is checked against.
OscillatoryResult oscillatory_double_integral(const ComplexField2& F, const PhaseFunction& phase,
                                              double t, double L);

struct WignerTransform {
  Grid1D k;                 // same as the input grid
  Grid1D x;                 // symmetric, contains x = 0
  std::vector<cplx> values; // values[ik * x.size() + ix]
  cplx operator()(std::size_t ik, std::size_t ix) const { return values[ik * x.size() + ix]; }
};

/// W_A(k,x) = int dxi/2pi A(k + xi/2, k - xi/2) e^{i xi x} on the input
/// k-grid. The anti-diagonal sum is zero padded to 2n+1 samples and
/// transformed with FFTW.
WignerTransform wigner_weyl(const ComplexField2& A);

/// Same transform evaluated directly at one (k index, x) pair.
cplx wigner_at(const ComplexField2& A, std::size_t ik, double x);

/// Generic sampled density over a uniform axis.
struct ProbabilityCurve {
  Grid1D axis;
  std::string axis_name = "t";
  std::vector<double> values;
  double L = 0.0;
  double total_integral = 0.0;
  bool normalized = false;
  std::vector<std::string> warnings;

  /// Recomputes total_integral and the normalized flag.
  void finalize(double tol);
  double peak_position() const;
  double max_abs() const;
};

/// Convolution with a unit-area Gaussian of width tau. Near the ends the
/// truncated kernel is renormalized, so constants pass through unchanged.
ProbabilityCurve gaussian_smear(const ProbabilityCurve& curve, double tau);

}  // namespace qtp
