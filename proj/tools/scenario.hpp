#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qtp/composite.hpp"
#include "qtp/dirac.hpp"
#include "qtp/kernels.hpp"
#include "qtp/photon.hpp"
#include "qtp/scalar_toa.hpp"

namespace qtp::cli {

/// The file could not be read or is not valid JSON (exit code 2).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The JSON is well formed but does not match the scenario schema (exit code 3).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScalarRun {
  WavePacket packet;
  DetectionKernel kernel;
  bool allow_indefinite = false;
};

struct PhotonRun {
  PhotonState state;
  PolarizedKernel kernel;
  std::string mode = "farfield";  // farfield | terms
  double tau = 0.0;
  std::optional<double> cutoff;
};

struct DiracRun {
  SpinorPacket packet;
  SymmetricKernelParams kernel;
  bool allow_indefinite = false;
};

struct CompositeRun {
  MassSpectrum spectrum;
  MixingVector U, V;
  SourceCurrent source;
  std::optional<DetectionKernel> kernel;
  bool allow_indefinite = false;
  std::optional<SamplingFunction> chi_E, chi_Q;
  // momentum_marginal | energy_marginal | smeared | toa | dispersionless | qudit
  std::string mode = "momentum_marginal";
  std::optional<Grid1D> L_grid, p_grid, q_grid;
  double q = 0.0;
  double eps = 0.0;
  double envelope_sigma = 0.0;
  QuditPhase phase = QuditPhase::HalfL;
};

struct Scenario {
  std::string unit;
  std::variant<ScalarRun, PhotonRun, DiracRun, CompositeRun> particle;
  double L = 0.0;
  std::optional<Grid1D> t_grid;
  std::size_t n_t = 1024;
  Engine engine = Engine::Parallel;
  std::string output = "result.csv";
  std::string tolerance_profile;  // empty: leave the process-wide profile alone
  std::vector<std::pair<std::string, double>> tolerance_overrides;
};

/// Parses and validates a scenario. Unknown keys anywhere in the tree are
/// collected and reported together.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

/// Tabular result of a run: one x column followed by y columns.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunOutput {
  Table table;
  std::optional<double> normalization;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> scalars;  // extra named results (P0, P_tot, ...)
};

RunOutput execute(const Scenario& s);

/// Selects the scenario's tolerance profile and applies its overrides.
void apply_tolerances(const Scenario& s);

}  // namespace qtp::cli
