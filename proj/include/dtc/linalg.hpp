#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dtc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

// Errors split into two families so the CLI can map them onto exit codes:
// ConfigError -> 2, NumericalError -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};

struct InvalidDimension : ConfigError {
  using ConfigError::ConfigError;
};
struct StructuralError : ConfigError {
  using ConfigError::ConfigError;
};
struct DimensionOverflow : ConfigError {
  using ConfigError::ConfigError;
};
struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};
struct NormalizationError : ConfigError {
  using ConfigError::ConfigError;
};
struct ValidationError : NumericalError {
  using NumericalError::NumericalError;
};
struct TrackingError : NumericalError {
  using NumericalError::NumericalError;
};
struct AccuracyError : NumericalError {
  using NumericalError::NumericalError;
};
struct GateStructureError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace dtc
