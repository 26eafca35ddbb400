// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace d2dmimo {

using Point = Eigen::Vector2d;

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using CVectorXd = CVector<double>;
using CMatrixXd = CMatrix<double>;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Receiver or training configuration outside its feasible set.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Numerical procedure failed to meet its tolerance (rank loss, quadrature).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Bad configuration text, key, or value.
class ConfigError : public Error {
public:
  using Error::Error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

} // namespace d2dmimo
