#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qtik {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Error hierarchy. The CLI maps each category to a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files or inconsistent dimensions in user-supplied data.
class InputError : public Error {
 public:
  using Error::Error;
};

// Numerical failures: SVD non-convergence, singular denominators, infinite
// condition numbers.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The requested simulation would exceed the state-vector width limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// The phase register cannot resolve the spectrum it is asked to invert.
class SpectralError : public Error {
 public:
  using Error::Error;
};

}  // namespace qtik
