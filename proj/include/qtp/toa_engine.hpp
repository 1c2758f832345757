#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qtp/numerics.hpp"

namespace qtp {

/// Which evaluator a time-of-arrival curve is computed with.
///   Parallel  - quadratic form, OpenMP over blocks of t
///   Reference - the same quadratic form, serial plain loops
///   Oracle    - oscillatory_double_integral at every t
enum class Engine { Parallel, Reference, Oracle };

/// P(t) = Re sum_ab u_a(t) M_ab conj(u_b(t)),   u_a(t) = exp(i(p_a L - eps_a t)).
/// With right_conjugated = false the right vector is u itself (the
/// counter-rotating photon term). Modes come in blocks of equal length (one block per flavor / spin);
/// consecutive modes in a block are neighbours on the momentum grid.
struct QuadraticForm {
  std::vector<double> p;
  std::vector<double> eps;
  Eigen::MatrixXcd M;
  std::size_t block = 0;  // 0: a single block
  bool right_conjugated = true;
};

/// Rank-r form M = sum_r g_r g_r^H, used for pure states with S = 1.
struct FactoredForm {
  std::vector<double> p;
  std::vector<double> eps;
  std::vector<Eigen::VectorXcd> factors;
  std::size_t block = 0;
};

/// M_ab = w_a w_b F(p_a, p_b) / 2pi with trapezoid weights, eps = sqrt(p^2 + m^2).
QuadraticForm quadratic_form(const ComplexField2& F, double m);

/// Curve of a form on t with the engine's evaluator (Oracle is not valid here).
std::vector<double> evaluate(const QuadraticForm& q, const Grid1D& t, double L, Engine engine);
std::vector<double> evaluate(const FactoredForm& f, const Grid1D& t, double L, Engine engine);

std::vector<double> evaluate_parallel(const QuadraticForm& q, const Grid1D& t, double L);
std::vector<double> evaluate_reference(const QuadraticForm& q, const Grid1D& t, double L);
std::vector<double> evaluate_parallel(const FactoredForm& f, const Grid1D& t, double L);
std::vector<double> evaluate_reference(const FactoredForm& f, const Grid1D& t, double L);

/// Largest phase jump between neighbouring modes over the t window.
double max_phase_step(const std::vector<double>& p, const std::vector<double>& eps, std::size_t block,
                      const Grid1D& t, double L);

}  // namespace qtp
