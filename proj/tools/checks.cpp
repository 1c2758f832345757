#include "checks.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "qtp/composite.hpp"
#include "qtp/dirac.hpp"
#include "qtp/errors.hpp"
#include "qtp/kernels.hpp"
#include "qtp/photon.hpp"
#include "qtp/scalar_toa.hpp"
#include "qtp/tolerances.hpp"

namespace qtp::checks {

namespace {

constexpr double kPi = std::numbers::pi;

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    os_ << v;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

CheckResult timed(const std::string& name, const std::function<bool(Detail&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  r.name = name;
  Detail d;
  try {
    r.pass = body(d);
    r.detail = d.str();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = d.str() + " exception: " + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

double sup_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

/// Mean spacing of the interior local maxima, refined by parabolic interpolation.
double fitted_wavelength(const Grid1D& x, const std::vector<double>& y) {
  std::vector<double> peaks;
  const double h = x.spacing();
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) {
      const double den = y[i - 1] - 2.0 * y[i] + y[i + 1];
      const double off = den != 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / den : 0.0;
      peaks.push_back(x[i] + off * h);
    }
  }
  if (peaks.size() < 2) throw NumericError("fewer than two peaks in the scan");
  return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

/// R(p) = sum_k c_k exp(-a_k p) tabulated on the given momentum axis with a
/// flat energy dependence. Mixtures of exponentials are log-convex.
TabulatedKernel log_convex_table(const Grid1D& axis, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(0.2, 2.0), a(0.0, 0.6);
  const int terms = 1 + static_cast<int>(rng() % 3);
  std::vector<std::pair<double, double>> mix;
  for (int k = 0; k < terms; ++k) mix.emplace_back(c(rng), a(rng));
  TabulatedKernel T{axis, Grid1D(0.0, 1e4, 2), {}};
  for (std::size_t i = 0; i < axis.size(); ++i) {
    double r = 0.0;
    for (auto [ck, ak] : mix) r += ck * std::exp(-ak * axis[i]);
    T.values.push_back(r);
    T.values.push_back(r);
  }
  return T;
}

/// The same family times exp(-b eps), tabulated on an energy axis as well.
TabulatedKernel log_convex_table_2d(const Grid1D& p_axis, const Grid1D& eps_axis, double b, std::mt19937_64& rng) {
  const TabulatedKernel base = log_convex_table(p_axis, rng);
  TabulatedKernel T{p_axis, eps_axis, {}};
  for (std::size_t i = 0; i < p_axis.size(); ++i)
    for (std::size_t j = 0; j < eps_axis.size(); ++j) T.values.push_back(base.values[2 * i] * std::exp(-b * eps_axis[j]));
  return T;
}

MixingVector maximal_mixing() { return {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}; }

// ---------------------------------------------------------------- criteria

CheckResult normalization_scalar() {
  return timed("scalar_normalization", [](Detail& d) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto psi = WavePacket::gaussian(10.0, 1.0, 1.0, Grid1D(2.0, 18.0, 256));
    const double L = 200.0;
    const auto t = default_time_window(psi, L, 2048);
    const auto c = conditioned_density(psi, ExpDecay{1.0, 0.05, 0.02}, t, L);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d << "integral=" << c.total_integral << " runtime=" << secs << "s";
    return c.total_integral >= 0.999 && c.total_integral <= 1.001 && secs < 10.0;
  });
}

CheckResult cauchy_schwarz() {
  return timed("cauchy_schwarz_bound", [](Detail& d) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> C(0.5, 2.0), ab(0.0, 0.5);
    const Grid1D grid(1.0, 10.0, 64);
    double worst = -1e300;
    for (int k = 0; k < 50; ++k) {
      DetectionKernel K;
      if (k < 25)
        K = ExpDecay{C(rng), ab(rng), ab(rng)};
      else
        K = log_convex_table(grid.half_grid(), rng);
      const auto S = localization_from_kernel(K, 1.0, grid);
      for (auto v : S.S.data()) worst = std::max(worst, v.real());
    }
    bool flagged = false;
    std::size_t witness = 0;
    try {
      auto S = localization_from_kernel(GaussianBump{1.0, 5.0, 1.0}, 1.0, grid);
      require_positive(S);
    } catch (const IndefiniteKernelError& e) {
      flagged = true;
      witness = e.witness().size();
    }
    d << "max S=" << worst << " gaussian_bump_flagged=" << flagged << " witness_len=" << witness;
    return worst <= 1.0 + 1e-9 && flagged && witness == grid.size();
  });
}

CheckResult maximal_localization() {
  return timed("maximal_localization", [](Detail& d) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> C(0.1, 5.0), ab(0.0, 2.0), m(0.0, 3.0);
    double worst = 0.0;
    const std::vector<Grid1D> grids = {Grid1D(0.1, 1.0, 16), Grid1D(1.0, 30.0, 64), Grid1D(0.5, 200.0, 200),
                                       Grid1D(5.0, 15.0, 301)};
    for (const auto& g : grids)
      for (int k = 0; k < 10; ++k) {
        const auto S = localization_from_kernel(ExpDecay{C(rng), ab(rng), ab(rng)}, m(rng), g);
        for (auto v : S.S.data()) worst = std::max(worst, std::abs(v - 1.0));
      }
    d << "max|S-1|=" << worst;
    return worst < 1e-12;
  });
}

struct PhotonCase {
  std::string name;
  PhotonState state;
  PolarizedKernel K;
  std::function<std::array<double, 2>(double)> R;      // eigenvalues (+, -)
  std::function<std::array<Vec2, 2>(double)> beta;     // eigenvectors (+, -)
};

Mat2 rotation(double th) {
  Mat2 r;
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return r;
}

std::vector<PhotonCase> photon_cases(const Grid1D& g) {
  const auto phi = gaussian_mode(g, 10.0, 1.0, 0.0);
  std::vector<PhotonCase> out;
  {
    Mat2 m = Mat2::Zero();
    m(0, 0) = 2.0;
    m(1, 1) = 1.0;
    const ExpDecay base{1.0, 0.05, 0.0};
    out.push_back({"expdecay_diag_unpolarized", PhotonState::unpolarized(g, phi), FactorizedPolarizedKernel{base, m},
                   [base](double k) {
                     const double r = evaluate(DetectionKernel(base), k, k);
                     return std::array<double, 2>{2.0 * r, r};
                   },
                   [](double) { return std::array<Vec2, 2>{Vec2(1.0, 0.0), Vec2(0.0, 1.0)}; }});
  }
  {
    Mat2 m;
    m << 1.0, 0.5, 0.5, 1.0;
    const double s = 1.0 / std::sqrt(2.0);
    out.push_back({"glauber_offdiag_linear", PhotonState::single(g, phi, Vec2(0.8, 0.6)),
                   FactorizedPolarizedKernel{Glauber{1.0}, m},
                   [](double) { return std::array<double, 2>{1.5, 0.5}; },
                   [s](double) { return std::array<Vec2, 2>{Vec2(s, s), Vec2(s, -s)}; }});
  }
  {
    auto theta = [](double k) { return 0.3 + 0.05 * (k - 10.0); };
    auto lam = [](double k) { return std::array<double, 2>{2.0 * std::exp(-0.05 * k), 0.5 * std::exp(-0.1 * k)}; };
    const Grid1D h = g.half_grid();
    TabulatedPolarizedKernel T{h, {}};
    for (std::size_t i = 0; i < h.size(); ++i) {
      const auto l = lam(h[i]);
      Mat2 D = Mat2::Zero();
      D(0, 0) = l[0];
      D(1, 1) = l[1];
      const Mat2 r = rotation(theta(h[i]));
      T.values.push_back(r * D * r.transpose());
    }
    out.push_back({"rotating_tabulated", PhotonState::single(g, phi, Vec2(1.0, 0.0)), T, lam,
                   [theta](double k) {
                     const double th = theta(k);
                     return std::array<Vec2, 2>{Vec2(std::cos(th), std::sin(th)), Vec2(-std::sin(th), std::cos(th))};
                   }});
  }
  return out;
}

/// Far-field photon curve assembled from two massless scalar runs.
std::vector<double> photon_as_scalar_sum(const PhotonCase& pc, const Grid1D& t, double L) {
  const Grid1D& g = pc.state.grid;
  const std::size_t n = g.size();
  std::array<ComplexField2, 2> rs = {ComplexField2(g, g), ComplexField2(g, g)};
  std::vector<std::array<Vec2, 2>> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = pc.beta(g[i]);
  double P = 0.0;
  std::array<std::vector<double>, 2> alpha;
  for (std::size_t s = 0; s < 2; ++s) {
    alpha[s].resize(n);
    for (std::size_t i = 0; i < n; ++i) alpha[s][i] = 0.5 * g[i] * pc.R(g[i])[s];
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cplx v = 0.0;
        for (int r = 0; r < 2; ++r)
          for (int rp = 0; rp < 2; ++rp)
            v += std::conj(b[i][s](r)) * pc.state.rho_rr(r, rp)(i, j) * b[j][s](rp);
        rs[s](i, j) = v;
        if (i == j) diag[i] = v.real() * alpha[s][i];
      }
    P += integrate_1d(g, std::span<const double>(diag));
  }
  std::vector<double> total(t.size(), 0.0);
  for (std::size_t s = 0; s < 2; ++s) {
    const Grid1D h = g.half_grid();
    TabulatedKernel T{h, Grid1D(0.0, 1e4, 2), {}};
    for (std::size_t i = 0; i < h.size(); ++i) {
      T.values.push_back(pc.R(h[i])[s]);
      T.values.push_back(pc.R(h[i])[s]);
    }
    const auto S = localization_from_kernel(T, 0.0, g);
    ComplexField2 rt(g, g);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) rt(i, j) = rs[s](i, j) * std::sqrt(alpha[s][i] * alpha[s][j]) / P;
    const auto c = toa_curve(rt, 0.0, S, t, L);
    for (std::size_t k = 0; k < t.size(); ++k) total[k] += c.values[k];
  }
  return total;
}

CheckResult photon_mixture() {
  return timed("photon_mixture", [](Detail& d) {
    const Grid1D g(5.0, 15.0, 96);
    const double L = 100.0;
    const WavePacket proxy{g, gaussian_mode(g, 10.0, 1.0, 0.0), 0.0};
    const auto t = default_time_window(proxy, L, 512);
    bool ok = true;
    for (const auto& pc : photon_cases(g)) {
      const auto ff = farfield_toa(pc.state, pc.K, t, L);
      const auto ref = photon_as_scalar_sum(pc, t, L);
      double diff = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) diff = std::max(diff, std::abs(ff.total.values[k] - ref[k]));
      d << pc.name << ":" << diff << " ";
      ok = ok && diff <= 1e-8;
    }
    return ok;
  });
}

CheckResult q_term_identities() {
  return timed("q_term_identities", [](Detail& d) {
    const FactorizedPolarizedKernel K{ExpDecay{1.0, 0.05, 0.0}, Mat2::Identity()};
    const double L = 50.0;
    bool ok = true;
    {
      const Grid1D g(6.0, 14.0, 128);
      const auto st = PhotonState::coherent(g, gaussian_mode(g, 10.0, 0.5, 0.0), Vec2(1.0, 0.0));
      const Grid1D t(L - 12.0, L + 12.0, 4801);
      const auto c = photodetection_curves(st, K, t, L);
      const double iq = integrate_1d(t, std::span<const double>(c.Q));
      const double ip = integrate_1d(t, std::span<const double>(c.P1));
      d << "intQ/intP1=" << std::abs(iq / ip);
      ok = ok && std::abs(iq / ip) < 1e-6;

      const auto fock = PhotonState::single(g, gaussian_mode(g, 10.0, 0.5, 0.0), Vec2(1.0, 0.0));
      const auto cf = photodetection_curves(fock, K, t, L);
      double qmax = 0.0;
      for (double v : cf.Q) qmax = std::max(qmax, std::abs(v));
      d << " fock_maxQ=" << qmax;
      ok = ok && qmax == 0.0;
    }
    {
      const double k0 = 10.0;
      const Grid1D g(k0 - 0.16, k0 + 0.16, 128);
      const auto st = PhotonState::coherent(g, gaussian_mode(g, k0, 0.02, 0.0), Vec2(1.0, 0.0));
      const Grid1D t(L - 200.0, L + 200.0, 801);
      for (double kt : {2.0, 4.0, 8.0}) {
        const double tau = kt / k0;
        const auto c = photodetection_curves(st, K, t, L, tau);
        double q = 0.0, p = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
          q = std::max(q, std::abs(c.Q[i]));
          p = std::max(p, std::abs(c.P1[i]));
        }
        const double bound = 10.0 * std::exp(-2.0 * kt * kt);
        d << " ktau=" << kt << ":" << q / p << "<" << bound;
        ok = ok && q / p < bound;
      }
    }
    return ok;
  });
}

CheckResult dirac_limits() {
  return timed("dirac_limits", [](Detail& d) {
    const SymmetricKernelParams k{1.0, 1.0, 1.0};
    const double m = 1.0;
    bool ok = true;
    {
      const double p = 1e-3, pp = 4e-3;
      const auto S = localization_S_pm(k, p, pp, m);
      const auto a = absorption_pm(k, p, m);
      const double ap = (k.a + k.b_plus) / (2.0 * p), am = (k.a + k.b_minus) / (2.0 * p);
      const double es = std::max(std::abs(S.first - 1.0), std::abs(S.second - 1.0));
      const double ea = std::max(std::abs(a.first / ap - 1.0), std::abs(a.second / am - 1.0));
      d << "NR: |S-1|=" << es << " alpha_rel=" << ea;
      ok = ok && es < 1e-3 && ea < 2e-3;
    }
    {
      const double p = 1e3, pp = 4e3;
      const auto a = absorption_pm(k, p, m);
      const auto S = localization_S_pm(k, p, pp, m);
      const double ep = std::abs(a.first / (k.b_plus / m) - 1.0);
      const double em = std::abs(a.second / (k.a / (2.0 * p)) - 1.0);
      const double target = (p + pp) / (2.0 * std::sqrt(p * pp));
      const double es = std::abs(S.second - target);
      d << " UR: alpha+_rel=" << ep << " alpha-_rel=" << em << " |S- - target|=" << es;
      ok = ok && ep < 2e-3 && em < 2e-3 && es < 1e-3;
    }
    return ok;
  });
}

struct TwoFlavor {
  MassSpectrum spectrum{{0.1, std::sqrt(0.012)}};
  double q0 = 1.0;
  double delta() const { return spectrum.delta(1, 0); }
  double wavelength() const { return 4.0 * kPi * q0 / delta(); }
};

CheckResult oscillation_wavelength() {
  return timed("oscillation_wavelength", [](Detail& d) {
    const TwoFlavor tf;
    const SourceState st(SourceCurrent::with_width(tf.q0, 0.5), maximal_mixing(), tf.spectrum);
    const double lam = tf.wavelength();
    const Grid1D Ls(0.0, 3.25 * lam, 6001);
    std::vector<double> W(Ls.size());
    for (std::size_t i = 0; i < Ls.size(); ++i) W[i] = momentum_marginal(st, maximal_mixing(), tf.spectrum, Ls[i], tf.q0).real();
    const double fit = fitted_wavelength(Ls, W);
    d << "fitted=" << fit << " analytic=" << lam << " rel=" << std::abs(fit / lam - 1.0);
    return std::abs(fit / lam - 1.0) < 5e-3;
  });
}

CheckResult energy_universality() {
  return timed("energy_momentum_universality", [](Detail& d) {
    const TwoFlavor tf;
    const SourceCurrent J{tf.q0, 0.2, 2.5};
    const SourceState st(J, maximal_mixing(), tf.spectrum);
    const auto V = maximal_mixing();
    const double M = tf.spectrum.median();
    const double E = std::hypot(tf.q0, M);
    const double sigma_E = 0.01;
    const SamplingFunction chi{E, sigma_E};
    const double lam = tf.wavelength();

    const Grid1D Ls(0.0, 3.25 * lam, 651);
    std::vector<double> wq(Ls.size()), we(Ls.size());
    for (std::size_t i = 0; i < Ls.size(); ++i) {
      wq[i] = momentum_marginal(st, V, tf.spectrum, Ls[i], tf.q0).real();
      we[i] = smeared_energy_marginal(st, V, tf.spectrum, chi, Ls[i]).slow.real();
    }
    const double kq = 2.0 * kPi / fitted_wavelength(Ls, wq);
    const double ke = 2.0 * kPi / fitted_wavelength(Ls, we);
    const double rel = std::abs(ke - kq) / kq;
    const double bound = 2.0 * std::sqrt(tf.delta()) / tf.q0;
    d << "K_q=" << kq << " K_E=" << ke << " rel=" << rel << "<" << bound;
    bool ok = rel < bound;

    const double vE = std::sqrt(E * E - M * M) / E;
    for (double x : {2.0, 4.0}) {
      const double L = x * vE / sigma_E;
      const auto s = smeared_energy_marginal(st, V, tf.spectrum, chi, L);
      const double bound_fast = 10.0 * std::exp(-x * x);
      d << " fast_contrast(" << x << ")=" << s.fast_contrast() << "<" << bound_fast;
      ok = ok && s.fast_contrast() < bound_fast;
    }
    return ok;
  });
}

CheckResult source_independence() {
  return timed("source_independence", [](Detail& d) {
    const TwoFlavor tf;
    const double lam = tf.wavelength();
    const Grid1D Ls(0.0, 3.0 * lam, 61);
    const auto narrow = state_independence_check(SourceCurrent::with_width(tf.q0, 0.5), maximal_mixing(),
                                                 maximal_mixing(), tf.spectrum, Ls, tf.q0);
    const auto broad = state_independence_check(SourceCurrent::with_width(tf.q0, lam), maximal_mixing(),
                                                maximal_mixing(), tf.spectrum, Ls, tf.q0);
    d << "narrow=" << narrow.max_phase_deviation << " broad=" << broad.max_phase_deviation;
    return narrow.independent && narrow.max_phase_deviation < 1e-3 && !broad.independent;
  });
}

struct CoherenceSetup {
  MassSpectrum spectrum{{0.5, 1.0}};
  double p0 = 10.0;
  double sigma_p = 0.1;
  double sigma() const { return std::sqrt(2.0) / sigma_p; }
  double L_coh() const { return coherence_length(spectrum, 0, 1, sigma(), p0); }
};

CheckResult toa_coherence() {
  return timed("toa_coherence", [](Detail& d) {
    const CoherenceSetup cs;
    const auto U = maximal_mixing(), V = maximal_mixing();
    const auto env = gaussian_envelope(cs.sigma());
    const Grid1D s(-120.0, 120.0, 4001);
    const double c_near = toa_fringe_contrast(env, U, V, cs.spectrum, cs.p0, cs.L_coh() / 10.0, s);
    const double c_far = toa_fringe_contrast(env, U, V, cs.spectrum, cs.p0, 5.0 * cs.L_coh(), s);
    d << "L_coh=" << cs.L_coh() << " contrast(L_coh/10)=" << c_near << " contrast(5 L_coh)=" << c_far;
    bool ok = c_near > 0.5 && c_far < 0.05;

    const double L = cs.L_coh() / 5.0;
    const Grid1D pg(cs.p0 - 8.0 * cs.sigma_p, cs.p0 + 8.0 * cs.sigma_p, 256);
    const auto pkt = WavePacket::gaussian(cs.p0, cs.sigma_p, cs.spectrum.median(), pg);
    std::vector<std::vector<cplx>> psi(2, pkt.psi);
    for (std::size_t i = 0; i < 2; ++i)
      for (auto& v : psi[i]) v *= U[i];
    const SampledFlavorState st(pg, psi);
    const double v0 = cs.p0 / std::hypot(cs.p0, cs.spectrum.median());
    const Grid1D t((L - 70.0) / v0, (L + 70.0) / v0, 1401);
    const auto exact = toa_composite_exact(st, V, cs.spectrum, Glauber{1.0}, t, L);
    const auto model = toa_composite_dispersionless(env, U, V, cs.spectrum, cs.p0, t, L);
    std::vector<double> a(t.size()), b(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      a[k] = exact.values[k] / exact.total_integral;
      b[k] = model.values[k] / model.total_integral;
    }
    const double err = sup_rel(b, a);
    d << " exact_vs_model=" << err;
    return ok && err < 0.02;
  });
}

MomentumDistribution narrow_distribution(double q0, double width) {
  const Grid1D q(q0 - 10.0 * width, q0 + 10.0 * width, 2001);
  MomentumDistribution f{q, std::vector<double>(q.size())};
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double u = (q[k] - q0) / width;
    f.f[k] = std::exp(-0.5 * u * u);
  }
  const double n = integrate_1d(q, std::span<const double>(f.f));
  for (auto& v : f.f) v /= n;
  return f;
}

MixingVector column(const Eigen::MatrixXcd& Q, Eigen::Index c) {
  MixingVector v(static_cast<std::size_t>(Q.rows()));
  for (Eigen::Index r = 0; r < Q.rows(); ++r) v[static_cast<std::size_t>(r)] = Q(r, c);
  return v;
}

CheckResult qudit_closed_form() {
  return timed("qudit_closed_form", [](Detail& d) {
    const TwoFlavor tf;
    const auto f = narrow_distribution(tf.q0, 1e-6);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double L = 2.0 * tf.wavelength() * k / 19.0;
      const double P = qudit_probability(maximal_mixing(), maximal_mixing(), tf.spectrum, f, L);
      const double s = std::sin(tf.delta() * L / (4.0 * tf.q0));
      worst = std::max(worst, std::abs(P - (1.0 - s * s)));
    }
    d << "closed_form_err=" << worst;
    bool ok = worst < 1e-6;

    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> mass(0.0, 0.3);
    double comp = 0.0;
    for (int dim : {2, 3, 4}) {
      Eigen::MatrixXcd A(dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) A(r, c) = cplx(nd(rng), nd(rng));
      const Eigen::MatrixXcd Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(A).householderQ();
      std::vector<double> ms(static_cast<std::size_t>(dim));
      for (auto& m : ms) m = mass(rng);
      std::sort(ms.begin(), ms.end());
      const MassSpectrum spec(ms);
      Eigen::VectorXcd u(dim);
      for (int r = 0; r < dim; ++r) u(r) = cplx(nd(rng), nd(rng));
      u.normalize();
      MixingVector U(u.data(), u.data() + dim);
      const auto broad = narrow_distribution(1.0, 0.05);
      for (double L : {0.0, 37.0, 1234.5}) {
        double sum = 0.0;
        for (int c = 0; c < dim; ++c) sum += qudit_probability(U, column(Q, c), spec, broad, L);
        comp = std::max(comp, std::abs(sum - 1.0));
      }
    }
    d << " completeness_err=" << comp;
    return ok && comp < 1e-10;
  });
}

struct OracleCase {
  std::string name;
  std::function<std::pair<std::vector<double>, std::vector<double>>()> run;  // (fast, oracle)
};

std::vector<OracleCase> oracle_cases() {
  std::vector<OracleCase> cases;
  const std::size_t n = 128;
  cases.push_back({"scalar_expdecay", [n] {
                     const auto psi = WavePacket::gaussian(10.0, 1.0, 1.0, Grid1D(6.0, 14.0, n));
                     const auto t = default_time_window(psi, 20.0, 160);
                     const DetectionKernel K = ExpDecay{1.0, 0.1, 0.05};
                     return std::pair{conditioned_density(psi, K, t, 20.0).values,
                                      conditioned_density(psi, K, t, 20.0, {Engine::Oracle, false}).values};
                   }});
  cases.push_back({"scalar_tabulated", [n] {
                     const Grid1D g(6.0, 14.0, n);
                     const auto psi = WavePacket::gaussian(10.0, 1.0, 1.0, g);
                     std::mt19937_64 rng(5);
                     const DetectionKernel K = log_convex_table(g.half_grid(), rng);
                     const auto t = default_time_window(psi, 20.0, 160);
                     return std::pair{conditioned_density(psi, K, t, 20.0).values,
                                      conditioned_density(psi, K, t, 20.0, {Engine::Oracle, false}).values};
                   }});
  cases.push_back({"photon_farfield", [n] {
                     const Grid1D g(6.0, 14.0, n);
                     const auto pc = photon_cases(g)[2];
                     const WavePacket proxy{g, gaussian_mode(g, 10.0, 1.0, 0.0), 0.0};
                     const auto t = default_time_window(proxy, 20.0, 160);
                     return std::pair{farfield_toa(pc.state, pc.K, t, 20.0).total.values,
                                      farfield_toa(pc.state, pc.K, t, 20.0, Engine::Oracle).total.values};
                   }});
  cases.push_back({"dirac", [n] {
                     const auto psi = SpinorPacket::gaussian(3.0, 0.5, 1.0, Grid1D(1.0, 5.0, n), 0.8, 0.6);
                     const SymmetricKernelParams k{1.0, 0.5, 1.0};
                     const WavePacket proxy{psi.grid, psi.psi[0], 1.0};
                     const auto t = default_time_window(proxy, 20.0, 160);
                     return std::pair{toa_density_dirac(psi, k, t, 20.0, {Engine::Parallel, true}).total.values,
                                      toa_density_dirac(psi, k, t, 20.0, {Engine::Oracle, true}).total.values};
                   }});
  cases.push_back({"composite_exact", [n] {
                     const Grid1D g(6.0, 14.0, n);
                     const MassSpectrum spec({0.5, 1.0});
                     const auto pkt = WavePacket::gaussian(10.0, 1.0, 0.75, g);
                     std::vector<std::vector<cplx>> psi = {pkt.psi, pkt.psi};
                     for (auto& v : psi[0]) v *= 0.6;
                     for (auto& v : psi[1]) v *= 0.8;
                     const SampledFlavorState st(g, psi);
                     std::mt19937_64 rng(9);
                     const DetectionKernel K = log_convex_table_2d(g.half_grid(), Grid1D(0.0, 20.0, 401), 0.05, rng);
                     const MixingVector V = {0.6, 0.8};
                     const auto t = default_time_window(pkt, 20.0, 160);
                     return std::pair{toa_composite_exact(st, V, spec, K, t, 20.0, {Engine::Parallel, true}).values,
                                      toa_composite_exact(st, V, spec, K, t, 20.0, {Engine::Oracle, true}).values};
                   }});
  return cases;
}

CheckResult oracle_equivalence() {
  return timed("oracle_equivalence", [](Detail& d) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (const auto& oc : oracle_cases()) {
      const auto [fast, oracle] = oc.run();
      const double e = sup_rel(fast, oracle);
      d << oc.name << ":" << e << " ";
      ok = ok && e < 1e-6;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d << "runtime=" << secs << "s";
    return ok && secs < 300.0;
  });
}

// ------------------------------------------------------ supplementary checks

CheckResult photon_normalization() {
  return timed("photon_normalization", [](Detail& d) {
    const Grid1D g(5.0, 15.0, 96);
    const WavePacket proxy{g, gaussian_mode(g, 10.0, 1.0, 0.0), 0.0};
    const auto t = default_time_window(proxy, 50.0, 1024);
    bool ok = true;
    for (const auto& pc : photon_cases(g)) {
      const auto ff = farfield_toa(pc.state, pc.K, t, 50.0);
      d << pc.name << ":" << ff.total.total_integral << " ";
      ok = ok && std::abs(ff.total.total_integral - 1.0) < 1e-3;
    }
    return ok;
  });
}

CheckResult dirac_normalization() {
  return timed("dirac_normalization", [](Detail& d) {
    const auto psi = SpinorPacket::gaussian(3.0, 0.5, 1.0, Grid1D(0.5, 5.5, 200), 0.8, cplx(0.0, 0.6));
    const WavePacket proxy{psi.grid, psi.psi[0], 1.0};
    const auto t = default_time_window(proxy, 30.0, 1024);
    const auto r = toa_density_dirac(psi, {1.0, 0.5, 1.0}, t, 30.0, {Engine::Parallel, true});
    d << "integral=" << r.total.total_integral;
    return std::abs(r.total.total_integral - 1.0) < 1e-3;
  });
}

CheckResult composite_normalization() {
  return timed("composite_equal_mass_normalization", [](Detail& d) {
    const Grid1D g(6.0, 14.0, 200);
    const MassSpectrum spec({1.0, 1.0, 1.0});
    const auto pkt = WavePacket::gaussian(10.0, 1.0, 1.0, g);
    std::vector<std::vector<cplx>> psi = {pkt.psi, pkt.psi, pkt.psi};
    const double c = 1.0 / std::sqrt(3.0);
    for (auto& comp : psi)
      for (auto& v : comp) v *= c;
    const SampledFlavorState st(g, psi);
    const MixingVector V = {std::sqrt(0.5), std::sqrt(0.3), std::sqrt(0.2)};
    const auto t = default_time_window(pkt, 50.0, 1024);
    const auto cu = toa_composite_exact(st, V, spec, ExpDecay{1.0, 0.1, 0.0}, t, 50.0);
    d << "integral=" << cu.total_integral;
    return std::abs(cu.total_integral - 1.0) < 1e-3;
  });
}

CheckResult dirac_indefinite_reported() {
  return timed("dirac_indefinite_reported", [](Detail& d) {
    const auto psi = SpinorPacket::gaussian(3.0, 0.5, 1.0, Grid1D(1.0, 5.0, 64), 1.0, 0.0);
    const WavePacket proxy{psi.grid, psi.psi[0], 1.0};
    const auto t = default_time_window(proxy, 20.0, 64);
    try {
      toa_density_dirac(psi, {1.0, 0.5, 1.0}, t, 20.0);
    } catch (const IndefiniteKernelError& e) {
      d << "min_eigenvalue=" << e.min_eigenvalue();
      return !e.witness().empty();
    }
    d << "no error raised";
    return false;
  });
}

CheckResult glauber_limit() {
  return timed("photon_glauber_limit", [](Detail& d) {
    const double k0 = 10.0, sigma = 0.1;
    const Grid1D g(3.6, 16.4, 1024);
    const auto a = gaussian_mode(g, k0, sigma, 0.0);
    ComplexField2 zeta(g, g);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) zeta(i, j) = a[i] * a[j];
    const Grid1D t(-30.0, 30.0, 121);
    const auto ref = nearfield_Q(zeta, {1.0, 0.0}, t, 0.0);
    const double h = g.spacing();
    const double dx = 2.0 * kPi / (static_cast<double>(2 * g.size() + 1) * 2.0 * h);
    double prev = 1e300;
    bool ok = true;
    for (double mult : {8.0, 4.0, 2.0}) {
      const auto q = nearfield_Q(zeta, {1.0, mult * dx}, t, 0.0);
      const double e = sup_rel(q, ref);
      d << "a=" << mult << "dx:" << e << " ";
      ok = ok && e < prev;
      prev = e;
    }
    return ok && prev < 0.02;
  });
}

}  // namespace

CheckResult acceptance(int index) {
  switch (index) {
    case 1: return normalization_scalar();
    case 2: return cauchy_schwarz();
    case 3: return maximal_localization();
    case 4: return photon_mixture();
    case 5: return q_term_identities();
    case 6: return dirac_limits();
    case 7: return oscillation_wavelength();
    case 8: return energy_universality();
    case 9: return source_independence();
    case 10: return toa_coherence();
    case 11: return qudit_closed_form();
    case 12: return oracle_equivalence();
    default: throw std::out_of_range("acceptance criteria are numbered 1 to 12");
  }
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"normalization", "positivity", "limits", "oscillation", "oracle"};
  return names;
}

std::vector<CheckResult> run_suite(std::string_view suite) {
  using Fn = CheckResult (*)();
  static const std::map<std::string, std::vector<Fn>, std::less<>> suites = {
      {"normalization", {normalization_scalar, photon_normalization, dirac_normalization, composite_normalization}},
      {"positivity", {cauchy_schwarz, maximal_localization, dirac_indefinite_reported}},
      {"limits", {dirac_limits, glauber_limit, q_term_identities}},
      {"oscillation",
       {oscillation_wavelength, energy_universality, source_independence, toa_coherence, qudit_closed_form}},
      {"oracle", {oracle_equivalence, photon_mixture}},
  };
  const auto it = suites.find(suite);
  if (it == suites.end()) {
    std::string msg = "unknown suite '" + std::string(suite) + "'; available:";
    for (const auto& n : suite_names()) msg += " " + n;
    throw std::invalid_argument(msg);
  }
  std::vector<CheckResult> out;
  for (Fn f : it->second) out.push_back(f());
  return out;
}

}  // namespace qtp::checks
