#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtp {

/// Violated physics precondition (zero detection efficiency, evanescent
/// branch, invalid kernel...). Maps to CLI exit code 4.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: non-finite samples, grids that cannot resolve the
/// requested quantity, tolerance violations. Maps to CLI exit code 5.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a localization operator fails its positivity certificate.
/// Carries the eigenvector of the most negative eigenvalue.
class IndefiniteKernelError : public PreconditionError {
 public:
  IndefiniteKernelError(const std::string& what, double min_eigenvalue,
                        std::vector<std::complex<double>> witness)
      : PreconditionError(what),
        min_eigenvalue_(min_eigenvalue),
        witness_(std::move(witness)) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  const std::vector<std::complex<double>>& witness() const noexcept { return witness_; }

 private:
  double min_eigenvalue_;
  std::vector<std::complex<double>> witness_;
};

}  // namespace qtp
