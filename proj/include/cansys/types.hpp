#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cansys {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

inline constexpr cplx I1{0.0, 1.0};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input outside the domain of an operation (branch cut, off-grid point...).
struct DomainError : Error {
    using Error::Error;
};

// Malformed file or inconsistent dimensions.
struct FormatError : Error {
    using Error::Error;
};

// Ill-conditioned solve; carries the reciprocal condition estimate.
struct SingularError : Error {
    double rcond;
    SingularError(const std::string& what, double rc) : Error(what), rcond(rc) {}
};

struct NumericalError : Error {
    using Error::Error;
};

} // namespace cansys
