#pragma once

#include <string>
#include <vector>

#include "ssmbb/mech_model.hpp"
#include "ssmbb/response.hpp"
#include "ssmbb/spectral.hpp"

namespace ssmbb {

struct IntegrateOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 1e-3;
    long max_steps = 5'000'000;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<VectorXd> x;
};

/// Adaptive Dormand-Prince integration of the forced first-order system, reporting the
/// state at every requested time (each one is hit exactly, not interpolated).
Trajectory integrate(const FirstOrderSystem& fos, const VectorXd& x0, const std::vector<double>& times,
                     const IntegrateOptions& opts = {});

struct PeriodicOrbit {
    double omega = 0.0;
    double period = 0.0;
    VectorXd initial_state;
    /// States at t_k = k T / n, k = 0..n-1.
    std::vector<VectorXd> samples;
    MatrixXd monodromy;
    VectorXc floquet_multipliers;
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;

    bool stable() const;
    double max_multiplier() const;
};

struct ShootingOptions {
    IntegrateOptions integrate;
    double tol = 1e-9;
    int max_iterations = 25;
    int samples = 256;
};

PeriodicOrbit find_periodic_orbit(const FirstOrderSystem& fos, double omega, const VectorXd& x_guess,
                                  const ShootingOptions& opts = {});

/// Uniform samples of one period of the orbit starting at orbit.initial_state.
void sample_orbit(const FirstOrderSystem& fos, PeriodicOrbit& orbit, int samples,
                  const IntegrateOptions& opts = {});

struct ContinuationOptions {
    ShootingOptions shooting;
    double initial_step = 1e-3;
    double min_step = 1e-7;
    double max_step = 0.02;
    int max_corrector_steps = 4;
    int max_points = 20000;
    /// +1 continues towards increasing Omega from the seed, -1 towards decreasing.
    int direction = 1;
};

struct Branch {
    std::vector<PeriodicOrbit> orbits;
    /// Omega at detected turning points.
    std::vector<double> fold_points;
    bool terminated = false;
    std::string status;
};

Branch continue_branch(const FirstOrderSystem& fos, double omega_lo, double omega_hi, const PeriodicOrbit& seed,
                       const ContinuationOptions& opts = {});

/// Fourier coefficients X_j, j = -j_max..j_max, of every state coordinate, with
/// x(t) = sum_j X_j e^{i j Omega t}.
HarmonicSpectrum harmonic_amplitudes(const PeriodicOrbit& orbit, int j_max);

/// max_t |p_mode(t)| with p = E^{-1} q over the orbit samples.
double modal_time_max(const Spectrum<double>& spec, const PeriodicOrbit& orbit, int mode);

}  // namespace ssmbb
