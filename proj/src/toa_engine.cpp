#include "qtp/toa_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qtp/errors.hpp"

namespace qtp {

namespace {

constexpr long kChunk = 32;

void check_modes(const std::vector<double>& p, const std::vector<double>& eps, Eigen::Index n) {
  if (p.size() != eps.size() || static_cast<Eigen::Index>(p.size()) != n)
    throw PreconditionError("toa engine: mode arrays do not match the form size");
}

Eigen::MatrixXcd phase_block(const std::vector<double>& p, const std::vector<double>& eps,
                             const Grid1D& t, long first, long count, double L) {
  const Eigen::Index n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXcd U(n, count);
  for (long j = 0; j < count; ++j) {
    const double tj = t[static_cast<std::size_t>(first + j)];
    for (Eigen::Index a = 0; a < n; ++a) {
      const double ph = p[a] * L - eps[a] * tj;
      U(a, j) = cplx(std::cos(ph), std::sin(ph));
    }
  }
  return U;
}

}  // namespace

QuadraticForm quadratic_form(const ComplexField2& F, double m) {
  if (!F.square()) throw PreconditionError("quadratic_form: field must be square");
  const Grid1D& g = F.rows();
  const std::size_t n = g.size();
  const auto w = quadrature_weights(g);
  QuadraticForm q;
  q.p = g.points();
  q.eps.resize(n);
  for (std::size_t a = 0; a < n; ++a) q.eps[a] = std::hypot(q.p[a], m);
  q.M.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      q.M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = w[a] * w[b] * inv2pi * F(a, b);
  return q;
}

std::vector<double> evaluate(const QuadraticForm& q, const Grid1D& t, double L, Engine engine) {
  if (engine == Engine::Oracle) throw PreconditionError("the oracle engine has no quadratic-form evaluator");
  return engine == Engine::Parallel ? evaluate_parallel(q, t, L) : evaluate_reference(q, t, L);
}

std::vector<double> evaluate(const FactoredForm& f, const Grid1D& t, double L, Engine engine) {
  if (engine == Engine::Oracle) throw PreconditionError("the oracle engine has no quadratic-form evaluator");
  return engine == Engine::Parallel ? evaluate_parallel(f, t, L) : evaluate_reference(f, t, L);
}

std::vector<double> evaluate_parallel(const QuadraticForm& q, const Grid1D& t, double L) {
  check_modes(q.p, q.eps, q.M.rows());
  const long nt = static_cast<long>(t.size());
  std::vector<double> out(t.size());
  const long chunks = (nt + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < chunks; ++c) {
    const long first = c * kChunk;
    const long count = std::min(kChunk, nt - first);
    const Eigen::MatrixXcd U = phase_block(q.p, q.eps, t, first, count, L);
    const Eigen::MatrixXcd Y = q.right_conjugated ? Eigen::MatrixXcd(q.M * U.conjugate()) : Eigen::MatrixXcd(q.M * U);
    for (long j = 0; j < count; ++j)
      out[static_cast<std::size_t>(first + j)] = (U.col(j).cwiseProduct(Y.col(j))).sum().real();
  }
  return out;
}

std::vector<double> evaluate_reference(const QuadraticForm& q, const Grid1D& t, double L) {
  check_modes(q.p, q.eps, q.M.rows());
  const std::size_t n = q.p.size();
  std::vector<double> out(t.size());
  std::vector<cplx> u(n);
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (std::size_t a = 0; a < n; ++a) u[a] = std::exp(cplx(0.0, q.p[a] * L - q.eps[a] * t[k]));
    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      cplx row = 0.0;
      for (std::size_t b = 0; b < n; ++b)
        row += q.M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
               (q.right_conjugated ? std::conj(u[b]) : u[b]);
      sum += (u[a] * row).real();
    }
    out[k] = sum;
  }
  return out;
}

std::vector<double> evaluate_parallel(const FactoredForm& f, const Grid1D& t, double L) {
  const Eigen::Index n = static_cast<Eigen::Index>(f.p.size());
  for (const auto& g : f.factors) check_modes(f.p, f.eps, g.size());
  const long nt = static_cast<long>(t.size());
  std::vector<double> out(t.size(), 0.0);
  const long chunks = (nt + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < chunks; ++c) {
    const long first = c * kChunk;
    const long count = std::min(kChunk, nt - first);
    const Eigen::MatrixXcd U = phase_block(f.p, f.eps, t, first, count, L);
    for (const auto& g : f.factors) {
      const Eigen::VectorXcd amp = U.transpose() * g.head(n);
      for (long j = 0; j < count; ++j) out[static_cast<std::size_t>(first + j)] += std::norm(amp(j));
    }
  }
  return out;
}

std::vector<double> evaluate_reference(const FactoredForm& f, const Grid1D& t, double L) {
  for (const auto& g : f.factors) check_modes(f.p, f.eps, g.size());
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (const auto& g : f.factors) {
      cplx amp = 0.0;
      for (std::size_t a = 0; a < f.p.size(); ++a)
        amp += g(static_cast<Eigen::Index>(a)) * std::exp(cplx(0.0, f.p[a] * L - f.eps[a] * t[k]));
      out[k] += std::norm(amp);
    }
  }
  return out;
}

double max_phase_step(const std::vector<double>& p, const std::vector<double>& eps, std::size_t block,
                      const Grid1D& t, double L) {
  const std::size_t bs = block == 0 ? p.size() : block;
  double worst = 0.0;
  for (std::size_t a = 0; a + 1 < p.size(); ++a) {
    if ((a + 1) % bs == 0) continue;
    const double dp = p[a + 1] - p[a];
    const double de = eps[a + 1] - eps[a];
    worst = std::max({worst, std::abs(dp * L - de * t.min()), std::abs(dp * L - de * t.max())});
  }
  return worst;
}

}  // namespace qtp
