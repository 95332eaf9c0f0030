#pragma once

#include <map>
#include <string>
#include <vector>

#include "ssmbb/polynomial.hpp"
#include "ssmbb/types.hpp"

namespace ssmbb {

/// One Fourier component f^k e^{i<k, Omega> t} of the external forcing.
struct ForcingHarmonic {
    std::vector<int> wave_vector;
    VectorXc amplitude;
};

/// Quasi-periodic forcing  epsilon * sum_k f^k exp(i <k, Omega> t).
struct ForcingDefinition {
    std::vector<ForcingHarmonic> harmonics;
    std::vector<double> base_frequencies;
    double epsilon = 0.0;

    /// f cos(Omega t), stored as the conjugate pair k = +-1 with f^{+-1} = f/2.
    static ForcingDefinition single_harmonic(const VectorXd& f, double epsilon, double omega);

    bool empty() const { return harmonics.empty(); }
    int n_frequencies() const { return static_cast<int>(base_frequencies.size()); }

    /// True when only k = +1 and k = -1 of a single base frequency are present.
    bool is_single_harmonic() const;

    /// Physical force vector f of f cos(Omega t); requires is_single_harmonic().
    VectorXd single_harmonic_vector() const;
    double frequency() const;

    /// epsilon * f_ext(t) without dropping the imaginary part.
    VectorXc evaluate_complex(double t) const;
    VectorXd evaluate(double t) const { return evaluate_complex(t).real(); }

    ForcingDefinition with_frequency(double omega) const;
    ForcingDefinition with_epsilon(double eps) const;
};

/// M q'' + (C + G) q' + (K + N) q + f_nlin(q, q') = eps f_ext(t).
struct MechanicalSystem {
    std::string name;
    int n_dof = 0;
    MatrixXd mass;
    MatrixXd damping;
    MatrixXd gyroscopic;
    MatrixXd stiffness;
    MatrixXd follower;
    /// Variables (q, q'), N outputs, appearing on the left-hand side.
    PolynomialField<double> nonlinearity;
    ForcingDefinition forcing;

    /// Zero-initialized system with the given number of degrees of freedom.
    static MechanicalSystem zeros(int n_dof);
};

/// x' = A x + G_nlin(x) + eps sum_k g^k e^{i<k,Omega>t},  x = (q, q').
struct FirstOrderSystem {
    int n_dof = 0;
    MatrixXd a_matrix;
    MatrixXd mass;
    MatrixXd mass_inverse;
    PolynomialField<double> nonlinearity;
    ForcingDefinition forcing;
    /// g^k = (0, M^{-1} f^k), parallel to forcing.harmonics.
    std::vector<VectorXc> lifted_forcing;

    int dim() const { return 2 * n_dof; }

    VectorXd forcing_at(double t) const;
    VectorXd rhs(double t, const VectorXd& x) const;
    MatrixXd jacobian(const VectorXd& x) const;

    /// Lifted single-harmonic amplitude g^{(+1)}; requires single-harmonic forcing.
    VectorXc g_plus() const;

    FirstOrderSystem with_frequency(double omega) const;
    FirstOrderSystem with_epsilon(double eps) const;
};

struct FirstOrderOptions {
    double max_condition = 1e12;
};

FirstOrderSystem first_order_form(const MechanicalSystem& sys, const FirstOrderOptions& opts = {});

/// Symmetry/definiteness diagnostics; empty when every invariant holds.
std::vector<std::string> validate_model(const MechanicalSystem& sys, double tol = 1e-10);

enum class BuiltinModel { ShawPierre, SpringSystem, OscillatorChain };

BuiltinModel builtin_from_name(const std::string& name);
std::string builtin_name(BuiltinModel model);

/// The three example systems. Unknown parameter keys are rejected; absent keys
/// take the published default values.
MechanicalSystem builtin_model(BuiltinModel model, const std::map<std::string, double>& params = {});

VectorXd evaluate_field(const PolynomialField<double>& field, const VectorXd& x);

}  // namespace ssmbb
