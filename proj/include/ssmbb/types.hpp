#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/multiprecision/complex128.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

namespace ssmbb {

using Quad = boost::multiprecision::float128;

template <class Real>
struct ComplexOf {
    using type = std::complex<Real>;
};

template <>
struct ComplexOf<Quad> {
    using type = boost::multiprecision::complex128;
};

template <class Real>
using Complex = typename ComplexOf<Real>::type;

using cdouble = std::complex<double>;

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { Model = 1, Resonance = 2, Numerical = 3 };

class SsmError : public std::runtime_error {
public:
    SsmError(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void model_error(const std::string& msg) {
    throw SsmError(ErrorKind::Model, msg);
}
[[noreturn]] inline void resonance_error(const std::string& msg) {
    throw SsmError(ErrorKind::Resonance, msg);
}
[[noreturn]] inline void numerical_error(const std::string& msg) {
    throw SsmError(ErrorKind::Numerical, msg);
}

/// Converts a scalar between the double and extended-precision worlds.
template <class To, class From>
To scalar_cast(const From& x) {
    if constexpr (std::is_same_v<To, From>) {
        return x;
    } else {
        return static_cast<To>(x);
    }
}

template <class ToReal, class FromReal>
Complex<ToReal> complex_cast(const Complex<FromReal>& z) {
    return Complex<ToReal>(static_cast<ToReal>(z.real()), static_cast<ToReal>(z.imag()));
}

}  // namespace ssmbb
