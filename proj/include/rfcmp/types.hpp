#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rfcmp {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;

using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

using SparseRealMatrix = Eigen::SparseMatrix<double>;
using SparseIntMatrix = Eigen::SparseMatrix<int>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr Complex kI{0.0, 1.0};

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or topologically invalid mesh input.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Invalid user or call-site configuration (bad parameter ranges, sizes).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to converge or broke down.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rfcmp
