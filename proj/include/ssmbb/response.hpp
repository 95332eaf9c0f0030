#pragma once

#include <array>
#include <map>
#include <vector>

#include "ssmbb/ssm_forced.hpp"

namespace ssmbb {

struct StabilityResult {
    bool stable = false;
    double trace = 0.0;
    double det = 0.0;
    std::array<cdouble, 2> eigenvalues{};
};

struct ResponsePoint {
    double omega = 0.0;
    double rho = 0.0;
    /// Phase shift in [0, pi]; z = rho exp(i (psi + Omega t)).
    double psi = 0.0;
    bool stable = false;
    std::array<cdouble, 2> jac_eigs{};
};

struct BackbonePoint {
    double rho = 0.0;
    double omega = 0.0;
    double psi = 0.0;
};

struct FRFBranch {
    /// +1 for Omega_plus, -1 for Omega_minus.
    int side = 1;
    std::vector<ResponsePoint> points;
};

struct BoundaryPoint {
    double rho = 0.0;
    bool valid = false;
    double omega_minus = 0.0;
    double omega_plus = 0.0;
};

/// Complex amplitudes x_{j Omega} of the physical state, j in [-(2M+1), 2M+1].
struct HarmonicSpectrum {
    std::map<int, VectorXc> amplitudes;

    VectorXc at(int j) const;
    int max_harmonic() const;
};

/// Real positive roots of a real polynomial (ascending coefficients), polished by Newton.
std::vector<double> positive_real_roots(std::vector<double> coeffs, double imag_tol = 1e-9,
                                        std::vector<double>* borderline = nullptr);

/// f(rho, Omega) = a^2 + (b - Omega)^2 rho^2 - eps^2 r^2.
double response_function(const SlowDynamics& sd, double r, double epsilon, double omega, double rho);

/// All rho > 0 with f(rho, Omega) = 0, ascending.
std::vector<double> response_amplitudes(const SlowDynamics& sd, double r, double epsilon, double omega,
                                        std::vector<double>* borderline = nullptr);

/// arccos([Omega - b] rho / (eps r)) in [0, pi].
double phase_shift(const SlowDynamics& sd, double rho, double r, double epsilon, double omega);

/// Signed phase atan2(sin psi, cos psi) used for reconstruction.
double phase_signed(const SlowDynamics& sd, double rho, double r, double epsilon, double omega);

StabilityResult stability(const SlowDynamics& sd, double rho, double omega);

ResponsePoint response_point(const SlowDynamics& sd, double r, double epsilon, double omega, double rho);

std::vector<ResponsePoint> response_points(const SlowDynamics& sd, double r, double epsilon, double omega);

std::vector<BackbonePoint> backbone_curve(const SlowDynamics& sd, const std::vector<double>& rho_grid);

/// Positive roots of a(rho)^2 = eps^2 r^2.
std::vector<double> max_amplitude(const SlowDynamics& sd, double r, double epsilon);

/// Branches Omega_pm(rho) = b(rho) +- sqrt(eps^2 r^2 - a^2) / rho over contiguous runs of
/// admissible grid points; runs are split where the grid is interrupted.
std::vector<FRFBranch> frf_sweep(const SlowDynamics& sd, double r, double epsilon, const std::vector<double>& rho_grid);

std::vector<BoundaryPoint> stability_boundaries(const SlowDynamics& sd, const std::vector<double>& rho_grid);

/// Amplitudes where trace(J) = a' + a/rho changes sign.
std::vector<double> trace_critical_amplitudes(const SlowDynamics& sd);

HarmonicSpectrum physical_harmonics(const ForcedSSM& fssm, double rho, double psi);

/// Modal coordinates p = E^{-1} q of the displacement part of a harmonic amplitude.
VectorXc modal_projection(const Spectrum<double>& spec, const VectorXc& state_amplitude);

/// Amplitude of modal coordinate `mode` at harmonic j: 2|p| for j != 0, |p| for j = 0.
double modal_amplitude(const Spectrum<double>& spec, const HarmonicSpectrum& h, int mode, int j);

/// Real state sum_j X_j e^{i j Omega t}.
VectorXd reconstruct_state(const HarmonicSpectrum& h, double omega, double t);

/// Predicted physical harmonics at a response point of the reduced model.
HarmonicSpectrum predicted_harmonics(const ReducedModel& rm, double omega, double rho);

/// |t_l X_1|: the reduced amplitude rho read off a first-harmonic state amplitude.
double reduced_first_harmonic(const Spectrum<double>& spec, const HarmonicSpectrum& h, int mode);

/// Evenly spaced grid with `points` entries in [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int points);

}  // namespace ssmbb
