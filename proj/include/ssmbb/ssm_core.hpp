#pragma once

#include <map>
#include <utility>
#include <vector>

#include "ssmbb/mech_model.hpp"
#include "ssmbb/polynomial.hpp"
#include "ssmbb/spectral.hpp"

namespace ssmbb {

/// G(y) = V^{-1} G_nlin(V y), expanded exactly in the modal variables y.
template <class Real>
struct DiagonalizedNonlinearity {
    PolynomialField<Complex<Real>> field;

    /// g_j^m for 0-based output slot j.
    Complex<Real> coefficient(const Exponent& e, int j) const;
};

template <class Real>
DiagonalizedNonlinearity<Real> diagonalize_nonlinearity(const FirstOrderSystem& fos, const Spectrum<Real>& spec);

/// Key (m, n) of the monomial z^m conj(z)^n.
using BiIndex = std::pair<int, int>;

template <class Real>
struct SSMCoefficients {
    using C = Complex<Real>;

    int master_index = 1;
    int order_m = 1;
    C lambda_l{};
    /// beta_1..beta_M.
    std::vector<C> beta;
    /// Physical coordinates x = W_0(z).
    std::map<BiIndex, Vec<C>> w0;
    /// Modal coordinates y = V^{-1} W_0(z).
    std::map<BiIndex, Vec<C>> w_modal;

    int max_degree() const { return 2 * order_m + 1; }
    Vec<C> coefficient(int m, int n) const;
};

struct SsmOptions {
    /// |m lambda_l + n conj(lambda_l) - lambda_j| below this times |Im lambda_l| is an error.
    double small_denominator = 1e-3;
};

/// Closed-form cubic parameterization and beta_1.
template <class Real>
SSMCoefficients<Real> compute_ssm_order3(const DiagonalizedNonlinearity<Real>& g, const Spectrum<Real>& spec, int mode,
                                         const SsmOptions& opts = {});

/// Order-by-order solution of the autonomous invariance equation up to degree 2M+1.
template <class Real>
SSMCoefficients<Real> compute_ssm_general(const DiagonalizedNonlinearity<Real>& g, const Spectrum<Real>& spec, int mode,
                                          int order_m, const SsmOptions& opts = {});

/// || A W(z) + G_nlin(W(z)) - DW(z) R(z) || with the untruncated nonlinearity.
template <class Real>
Real invariance_residual(const SSMCoefficients<Real>& ssm, const FirstOrderSystem& fos, const Complex<Real>& z);

/// W_0(z) evaluated with conj(z) as second argument.
template <class Real>
Vec<Complex<Real>> evaluate_parameterization(const SSMCoefficients<Real>& ssm, const Complex<Real>& z);

/// First component of R_0(z): lambda_l z + sum_m beta_m z^{m+1} conj(z)^m.
template <class Real>
Complex<Real> reduced_dynamics(const SSMCoefficients<Real>& ssm, const Complex<Real>& z);

/// Polar slow flow  rho' = a(rho) + ..., theta' = b(rho) + ...
struct SlowDynamics {
    /// Re(lambda_l), Re(beta_1), ..., Re(beta_M)
    std::vector<double> a_coeffs;
    /// Im(lambda_l), Im(beta_1), ..., Im(beta_M)
    std::vector<double> b_coeffs;

    int order_m() const { return static_cast<int>(a_coeffs.size()) - 1; }

    double a(double rho) const;
    double b(double rho) const;
    double da(double rho) const;
    double db(double rho) const;
    /// sum_m m Im(beta_m) rho^{2m}
    double s_term(double rho) const;
    /// A(u) = a(rho)/rho and B(u) = b(rho) as polynomials in u = rho^2 (ascending powers).
    std::vector<double> a_over_rho_in_u() const { return a_coeffs; }
    std::vector<double> b_in_u() const { return b_coeffs; }
};

SlowDynamics slow_dynamics(const SSMCoefficients<double>& ssm);

template <class Real>
SSMCoefficients<double> to_double(const SSMCoefficients<Real>& ssm);

struct ValidityRadius {
    double radius = 0.0;
    std::vector<std::pair<double, double>> scan;  // (|z|, max relative residual)
};

/// Largest |z| on a log grid where the residual stays below `fraction` of |R_0(z)|.
ValidityRadius validity_radius(const SSMCoefficients<double>& ssm, const FirstOrderSystem& fos,
                               double fraction = 0.01, double z_min = 1e-4, double z_max = 10.0, int points = 61);

}  // namespace ssmbb
