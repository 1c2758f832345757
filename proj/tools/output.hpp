#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scenario.hpp"

namespace qtp::cli {

/// Header row plus %.17g rows, comma separated, LF line endings.
std::string format_csv(const Table& t);
void write_file(const std::string& path, const std::string& bytes);
std::string sha256_hex(const std::string& bytes);

/// Line plot of every y column against the first column.
std::string format_svg(const Table& t, const std::string& title);

struct OutputFile {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunReport {
  std::string scenario;
  std::string status = "error";
  int exit_code = 1;
  std::string error_kind;
  std::string error;
  std::optional<double> normalization;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> results;
  double wall_time = 0.0;
  std::vector<OutputFile> outputs;
  std::optional<double> min_eigenvalue;
  std::vector<std::complex<double>> witness;
  bool dry_run = false;
};

std::string format_report(const RunReport& r);

}  // namespace qtp::cli
