#include "scenario.hpp"

#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qtp/errors.hpp"
#include "qtp/tolerances.hpp"

namespace qtp::cli {

namespace {

using json = nlohmann::json;

/// Unknown keys collected across the whole tree.
struct Issues {
  std::vector<std::string> unknown;
};

/// A JSON object whose reads are recorded, so that finish() can report
/// every key nobody asked for.
class Node {
 public:
  Node(const json& j, std::string path, Issues& issues) : j_(j), path_(std::move(path)), issues_(issues) {
    if (!j_.is_object()) fail("expected an object");
  }
  Node(const Node&) = delete;
  ~Node() {
    if (std::uncaught_exceptions() == 0) finish();
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double num(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail(key + ": expected a number");
    return v.get<double>();
  }
  double num_or(const std::string& key, double def) { return has(key) ? num(key) : def; }

  std::size_t count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key + ": expected a non-negative integer");
    return v.get<std::size_t>();
  }

  bool flag_or(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key + ": expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail(key + ": expected a string");
    return v.get<std::string>();
  }
  std::string str_or(const std::string& key, const std::string& def) { return has(key) ? str(key) : def; }

  std::string choice(const std::string& key, const std::vector<std::string>& options, const std::string& def) {
    const std::string v = str_or(key, def);
    for (const auto& o : options)
      if (o == v) return v;
    std::string msg = key + ": '" + v + "' is not one of";
    for (const auto& o : options) msg += " " + o;
    fail(msg);
  }

  const json& raw(const std::string& key) { return at(key); }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  Issues& issues() { return issues_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SchemaError((path_.empty() ? std::string("(root)") : path_) + ": " + msg);
  }

 private:
  const json& at(const std::string& key) {
    if (!j_.contains(key)) fail("missing required key '" + key + "'");
    used_.insert(key);
    return j_.at(key);
  }

  void finish() {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) issues_.unknown.push_back(child_path(k));
  }

  const json& j_;
  std::string path_;
  Issues& issues_;
  std::set<std::string> used_;
};

Grid1D grid_of(Node& parent, const std::string& key) {
  Node g(parent.raw(key), parent.child_path(key), parent.issues());
  const double lo = g.num("min"), hi = g.num("max");
  const std::size_t n = g.count("n");
  try {
    return Grid1D(lo, hi, n);
  } catch (const std::exception& e) {
    g.fail(e.what());
  }
}

cplx complex_of(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw SchemaError(path + ": expected a number or a [re, im] pair");
}

std::vector<cplx> complex_list(Node& parent, const std::string& key) {
  const json& v = parent.raw(key);
  const std::string path = parent.child_path(key);
  if (!v.is_array()) throw SchemaError(path + ": expected an array");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(complex_of(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> real_list(Node& parent, const std::string& key) {
  const json& v = parent.raw(key);
  const std::string path = parent.child_path(key);
  if (!v.is_array()) throw SchemaError(path + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw SchemaError(path + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Mat2 matrix_of(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_array() || v[0].size() != 2 || !v[1].is_array() || v[1].size() != 2)
    throw SchemaError(path + ": expected a 2x2 array");
  Mat2 m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const auto ur = static_cast<std::size_t>(r), uc = static_cast<std::size_t>(c);
      m(r, c) = complex_of(v[ur][uc], path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  return m;
}

DetectionKernel kernel_of(Node& parent, const std::string& key) {
  Node k(parent.raw(key), parent.child_path(key), parent.issues());
  const std::string type = k.choice("type", {"glauber", "exp_decay", "gaussian_bump", "tabulated"}, "glauber");
  const double inf = std::numeric_limits<double>::infinity();
  DetectionKernel K;
  if (type == "glauber") {
    K = Glauber{k.num_or("C", 1.0)};
  } else if (type == "exp_decay") {
    K = ExpDecay{k.num_or("C", 1.0), k.num_or("a", 0.0), k.num_or("b", 0.0)};
  } else if (type == "gaussian_bump") {
    K = GaussianBump{k.num_or("C", 1.0), k.num_or("p0", 0.0), k.num_or("sigma_p", inf), k.num_or("eps0", 0.0),
                     k.num_or("sigma_eps", inf)};
  } else {
    TabulatedKernel T{grid_of(k, "p_axis"), grid_of(k, "eps_axis"), real_list(k, "values")};
    if (T.values.size() != T.p_axis.size() * T.eps_axis.size())
      k.fail("values must hold p_axis.n * eps_axis.n entries");
    K = T;
  }
  validate(K);
  return K;
}

PolarizedKernel polarized_kernel_of(Node& parent, const std::string& key) {
  Node k(parent.raw(key), parent.child_path(key), parent.issues());
  const std::string type = k.choice("type", {"factorized", "tabulated"}, "factorized");
  if (type == "factorized") {
    FactorizedPolarizedKernel F;
    if (k.has("scalar")) F.scalar = kernel_of(k, "scalar");
    if (k.has("matrix")) F.matrix = matrix_of(k.raw("matrix"), k.child_path("matrix"));
    return F;
  }
  TabulatedPolarizedKernel T{grid_of(k, "k_grid"), {}};
  const json& v = k.raw("values");
  if (!v.is_array() || v.size() != T.k.size()) k.fail("values must hold one 2x2 matrix per k_grid point");
  for (std::size_t i = 0; i < v.size(); ++i)
    T.values.push_back(matrix_of(v[i], k.child_path("values") + "[" + std::to_string(i) + "]"));
  return T;
}

SamplingFunction sampling_of(Node& parent, const std::string& key) {
  Node s(parent.raw(key), parent.child_path(key), parent.issues());
  SamplingFunction f{s.num("center"), s.num("width")};
  if (!(f.width > 0.0)) s.fail("width must be positive");
  return f;
}

Engine engine_of(Node& run) {
  const std::string e = run.choice("engine", {"parallel", "reference", "oracle"}, "parallel");
  return e == "parallel" ? Engine::Parallel : e == "reference" ? Engine::Reference : Engine::Oracle;
}

void parse_run_common(Node& run, Scenario& s, bool needs_L) {
  if (needs_L) s.L = run.num("L");
  else s.L = run.num_or("L", 0.0);
  if (run.has("t_grid")) s.t_grid = grid_of(run, "t_grid");
  if (run.has("n_t")) s.n_t = run.count("n_t");
  if (s.n_t < 2) run.fail("n_t must be at least 2");
  s.engine = engine_of(run);
  s.output = run.str_or("output", s.output);
  if (s.output.empty() || s.output.find('/') != std::string::npos)
    run.fail("output must be a plain file name inside the output directory");
}

ScalarRun parse_scalar(Node& particle, Node& root, Scenario& s) {
  ScalarRun r;
  const double m = particle.num("mass"), p0 = particle.num("p0"), sigma = particle.num("sigma");
  const double x0 = particle.num_or("x0", 0.0);
  const Grid1D grid = grid_of(particle, "grid");
  r.packet = WavePacket::gaussian(p0, sigma, m, grid, x0);
  r.packet.validate();
  Node det(root.raw("detector"), "detector", root.issues());
  r.kernel = kernel_of(det, "kernel");
  r.allow_indefinite = det.flag_or("allow_indefinite", false);
  Node run(root.raw("run"), "run", root.issues());
  parse_run_common(run, s, true);
  s.output = run.str_or("output", "toa.csv");
  return r;
}

PhotonRun parse_photon(Node& particle, Node& root, Scenario& s) {
  PhotonRun r;
  const Grid1D grid = grid_of(particle, "grid");
  const double k0 = particle.num("k0"), sigma = particle.num("sigma"), x0 = particle.num_or("x0", 0.0);
  const std::string kind = particle.choice("state", {"single", "unpolarized", "coherent"}, "single");
  Vec2 e(1.0, 0.0);
  if (particle.has("polarization")) {
    const auto pv = complex_list(particle, "polarization");
    if (pv.size() != 2) particle.fail("polarization must have two components");
    e = Vec2(pv[0], pv[1]);
  }
  const double amp = particle.num_or("amplitude", 1.0);
  auto phi = gaussian_mode(grid, k0, sigma, x0);
  if (kind == "unpolarized") {
    r.state = PhotonState::unpolarized(grid, phi);
  } else if (kind == "single") {
    r.state = PhotonState::single(grid, phi, e);
  } else {
    for (auto& v : phi) v *= amp;
    r.state = PhotonState::coherent(grid, phi, e);
  }
  Node det(root.raw("detector"), "detector", root.issues());
  r.kernel = polarized_kernel_of(det, "kernel");
  Node run(root.raw("run"), "run", root.issues());
  parse_run_common(run, s, true);
  r.mode = run.choice("mode", {"farfield", "terms"}, "farfield");
  r.tau = run.num_or("tau", 0.0);
  if (run.has("cutoff")) r.cutoff = run.num("cutoff");
  s.output = run.str_or("output", r.mode == "terms" ? "terms.csv" : "toa.csv");
  return r;
}

DiracRun parse_dirac(Node& particle, Node& root, Scenario& s) {
  DiracRun r;
  const double m = particle.num("mass"), p0 = particle.num("p0"), sigma = particle.num("sigma");
  const Grid1D grid = grid_of(particle, "grid");
  const cplx cp = particle.has("c_plus") ? complex_of(particle.raw("c_plus"), "particle.c_plus") : cplx(1.0);
  const cplx cm = particle.has("c_minus") ? complex_of(particle.raw("c_minus"), "particle.c_minus") : cplx(0.0);
  r.packet = SpinorPacket::gaussian(p0, sigma, m, grid, cp, cm);
  r.packet.validate();
  Node det(root.raw("detector"), "detector", root.issues());
  r.kernel = {det.num_or("a", 1.0), det.num_or("b_plus", 0.0), det.num_or("b_minus", 0.0)};
  r.kernel.validate();
  r.allow_indefinite = det.flag_or("allow_indefinite", false);
  Node run(root.raw("run"), "run", root.issues());
  parse_run_common(run, s, true);
  s.output = run.str_or("output", "toa.csv");
  return r;
}

CompositeRun parse_composite(Node& particle, Node& root, Scenario& s) {
  CompositeRun r;
  r.spectrum = MassSpectrum(real_list(particle, "masses"));
  r.U = complex_list(particle, "U");
  r.V = complex_list(particle, "V");
  validate_mixing(r.U, r.spectrum.size());
  validate_mixing(r.V, r.spectrum.size());

  Node src(root.raw("source"), "source", root.issues());
  r.source.q0 = src.num("q0");
  r.source.sigma = src.num("sigma");
  if (!(r.source.sigma > 0.0)) src.fail("sigma must be positive");
  r.source.x_c = src.num_or("x_c", r.source.spatial_width());
  r.source.omega0 = src.num_or("omega0", 0.0);
  r.source.sigma_omega = src.num_or("sigma_omega", std::numeric_limits<double>::infinity());

  Node run(root.raw("run"), "run", root.issues());
  r.mode = run.choice("mode", {"momentum_marginal", "energy_marginal", "smeared", "toa", "dispersionless", "qudit"},
                      "momentum_marginal");
  const bool toa = r.mode == "toa" || r.mode == "dispersionless";
  parse_run_common(run, s, toa);
  s.output = run.str_or("output", toa ? "toa.csv" : "sweep.csv");
  if (!toa) r.L_grid = grid_of(run, "L_grid");
  if (r.mode == "momentum_marginal") r.q = run.num_or("q", r.source.q0);
  if (r.mode == "energy_marginal") r.eps = run.num("eps");
  if (r.mode == "toa") r.p_grid = grid_of(run, "p_grid");
  if (r.mode == "qudit") {
    r.q_grid = grid_of(run, "q_grid");
    r.phase = run.choice("phase", {"half", "full"}, "half") == "half" ? QuditPhase::HalfL : QuditPhase::FullL;
  }
  if (r.mode == "dispersionless") r.envelope_sigma = run.num("envelope_sigma");
  if (toa && !s.t_grid) run.fail("t_grid is required for composite time-of-arrival runs");

  const bool needs_detector = r.mode == "smeared" || r.mode == "toa";
  if (needs_detector || root.has("detector")) {
    Node det(root.raw("detector"), "detector", root.issues());
    if (det.has("kernel") || needs_detector) r.kernel = kernel_of(det, "kernel");
    r.allow_indefinite = det.flag_or("allow_indefinite", false);
    if (det.has("chi_E") || r.mode == "smeared") r.chi_E = sampling_of(det, "chi_E");
    if (det.has("chi_Q") || r.mode == "smeared") r.chi_Q = sampling_of(det, "chi_Q");
  }
  return r;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  Issues issues;
  Scenario s;
  {
    Node root(j, "", issues);
    s.unit = root.str_or("unit", "");
    if (root.has("numerics")) {
      Node num(root.raw("numerics"), "numerics", issues);
      s.tolerance_profile = num.choice("tolerance_profile", {"default", "strict"}, "default");
      for (const char* key : {"normalization", "phase_step", "positivity_rel", "kernel_variation", "source_phase"})
        if (num.has(key)) s.tolerance_overrides.emplace_back(key, num.num(key));
    }
    Node particle(root.raw("particle"), "particle", issues);
    const std::string type = particle.choice("type", {"scalar", "photon", "dirac", "composite"}, "scalar");
    if (type == "scalar") s.particle = parse_scalar(particle, root, s);
    else if (type == "photon") s.particle = parse_photon(particle, root, s);
    else if (type == "dirac") s.particle = parse_dirac(particle, root, s);
    else s.particle = parse_composite(particle, root, s);
  }
  if (!issues.unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& k : issues.unknown) msg += " " + k;
    throw SchemaError(msg);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

namespace {

void append(std::vector<std::string>& to, const std::vector<std::string>& from, const std::string& prefix = "") {
  for (const auto& w : from) to.push_back(prefix + w);
}

Grid1D time_grid(const Scenario& s, const WavePacket& proxy) {
  return s.t_grid ? *s.t_grid : default_time_window(proxy, s.L, s.n_t);
}

RunOutput curve_output(const ProbabilityCurve& c, const std::vector<const ProbabilityCurve*>& extra,
                       const std::vector<std::string>& columns) {
  RunOutput out;
  out.table.columns = columns;
  for (std::size_t k = 0; k < c.axis.size(); ++k) {
    std::vector<double> row = {c.axis[k], c.values[k]};
    for (const auto* e : extra) row.push_back(e->values[k]);
    out.table.rows.push_back(std::move(row));
  }
  out.normalization = c.total_integral;
  append(out.warnings, c.warnings);
  return out;
}

/// Evaluates f over a grid in parallel; the first exception is rethrown
/// after the loop.
template <class F>
std::vector<std::vector<double>> sweep(const Grid1D& g, F&& f) {
  std::vector<std::vector<double>> rows(g.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(g.size()); ++i) {
    try {
      rows[static_cast<std::size_t>(i)] = f(g[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(qtp_sweep_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return rows;
}

RunOutput run_scalar(const Scenario& s, const ScalarRun& r) {
  const auto t = time_grid(s, r.packet);
  const auto c = conditioned_density(r.packet, r.kernel, t, s.L, {s.engine, r.allow_indefinite});
  auto out = curve_output(c, {}, {"t", "P"});
  out.scalars.emplace_back("P_tot", total_detection_probability(r.packet, r.kernel));
  return out;
}

RunOutput run_photon(const Scenario& s, const PhotonRun& r) {
  const Grid1D& g = r.state.grid;
  std::vector<cplx> phi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    phi[i] = std::sqrt(std::abs(r.state.rho_rr(0, 0)(i, i).real()) + std::abs(r.state.rho_rr(1, 1)(i, i).real()));
  const WavePacket proxy{g, phi, 0.0};
  const auto t = time_grid(s, proxy);
  if (r.mode == "farfield") {
    if (r.tau > 0.0) throw PreconditionError("run.tau applies to mode 'terms' only");
    const auto res = farfield_toa(r.state, r.kernel, t, s.L, s.engine);
    auto out = curve_output(res.total, {&res.component[0], &res.component[1]}, {"t", "P", "P_plus", "P_minus"});
    out.scalars.emplace_back("P_tot", res.P_tot);
    return out;
  }
  const auto c = photodetection_curves(r.state, r.kernel, t, s.L, r.tau, s.engine, r.cutoff);
  RunOutput out;
  out.table.columns = {"t", "P1", "Q"};
  for (std::size_t k = 0; k < t.size(); ++k) out.table.rows.push_back({t[k], c.P1[k], c.Q[k]});
  out.scalars.emplace_back("P0", c.P0);
  if (std::isnan(c.P0)) out.warnings.push_back("vacuum term not computed: kernel has not decayed and no cutoff given");
  return out;
}

RunOutput run_dirac(const Scenario& s, const DiracRun& r) {
  std::vector<cplx> amp(r.packet.grid.size());
  for (std::size_t i = 0; i < amp.size(); ++i)
    amp[i] = std::sqrt(std::norm(r.packet.psi[0][i]) + std::norm(r.packet.psi[1][i]));
  const WavePacket env{r.packet.grid, amp, r.packet.m};
  const auto t = time_grid(s, env);
  const auto res = toa_density_dirac(r.packet, r.kernel, t, s.L, {s.engine, r.allow_indefinite});
  auto out = curve_output(res.total, {&res.spin[0], &res.spin[1]}, {"t", "P", "P_plus", "P_minus"});
  for (const auto& c : res.spin) append(out.warnings, c.warnings, "spin component: ");
  out.scalars.emplace_back("P_tot", res.P_tot);
  return out;
}

RunOutput run_composite(const Scenario& s, const CompositeRun& r) {
  RunOutput out;
  const SourceState src(r.source, r.U, r.spectrum);
  if (r.mode == "momentum_marginal") {
    out.table.columns = {"L", "P"};
    out.table.rows = sweep(*r.L_grid, [&](double L) {
      return std::vector<double>{L, momentum_marginal(src, r.V, r.spectrum, L, r.q).real()};
    });
  } else if (r.mode == "energy_marginal") {
    out.table.columns = {"L", "P", "P_slow", "P_fast"};
    out.table.rows = sweep(*r.L_grid, [&](double L) {
      if (r.chi_E) {
        const auto w = smeared_energy_marginal(src, r.V, r.spectrum, *r.chi_E, L);
        return std::vector<double>{L, (w.slow + w.fast).real(), w.slow.real(), w.fast.real()};
      }
      const auto w = energy_marginal(src, r.V, r.spectrum, L, r.eps);
      return std::vector<double>{L, w.total().real(), w.slow.real(), w.fast.real()};
    });
  } else if (r.mode == "smeared") {
    out.table.columns = {"L", "P", "P_c"};
    const Grid1D& Lg = *r.L_grid;
    out.table.rows = sweep(Lg, [&](double L) {
      const auto p = smeared_probability(src, r.V, r.spectrum, *r.kernel, *r.chi_E, *r.chi_Q, L);
      return std::vector<double>{L, p.P, p.P_conditioned};
    });
    const auto first = smeared_probability(src, r.V, r.spectrum, *r.kernel, *r.chi_E, *r.chi_Q, Lg[0]);
    append(out.warnings, first.warnings);
  } else if (r.mode == "qudit") {
    const auto f = canonical_distribution(r.source, r.spectrum.median(), *r.q_grid);
    out.table.columns = {"L", "P"};
    out.table.rows = sweep(*r.L_grid, [&](double L) {
      return std::vector<double>{L, qudit_probability(r.U, r.V, r.spectrum, f, L, r.phase)};
    });
  } else if (r.mode == "toa") {
    const auto st = source_state(r.source, r.U, r.spectrum, *r.p_grid);
    const auto c = toa_composite_exact(st, r.V, r.spectrum, *r.kernel, *s.t_grid, s.L, {s.engine, r.allow_indefinite});
    out = curve_output(c, {}, {"t", "P_c"});
    out.scalars.emplace_back("state_norm", st.norm());
  } else {
    const auto c = toa_composite_dispersionless(gaussian_envelope(r.envelope_sigma), r.U, r.V, r.spectrum,
                                                r.source.q0, *s.t_grid, s.L);
    out = curve_output(c, {}, {"t", "P_c"});
    out.normalization.reset();
  }
  return out;
}

}  // namespace

RunOutput execute(const Scenario& s) {
  return std::visit(
      [&](const auto& r) -> RunOutput {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ScalarRun>) return run_scalar(s, r);
        else if constexpr (std::is_same_v<T, PhotonRun>) return run_photon(s, r);
        else if constexpr (std::is_same_v<T, DiracRun>) return run_dirac(s, r);
        else return run_composite(s, r);
      },
      s.particle);
}

void apply_tolerances(const Scenario& s) {
  if (!s.tolerance_profile.empty()) set_tolerance_profile(s.tolerance_profile);
  Tolerances t = tolerances();
  for (const auto& [key, v] : s.tolerance_overrides) {
    if (!(v > 0.0)) throw SchemaError("numerics." + key + ": must be positive");
    if (key == "normalization") t.normalization = v;
    else if (key == "phase_step") t.phase_step = v;
    else if (key == "positivity_rel") t.positivity_rel = v;
    else if (key == "kernel_variation") t.kernel_variation = v;
    else t.source_phase = v;
  }
  set_tolerances(t);
}

}  // namespace qtp::cli
