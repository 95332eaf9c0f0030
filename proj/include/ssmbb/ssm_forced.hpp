#pragma once

#include <map>
#include <vector>

#include "ssmbb/ssm_core.hpp"

namespace ssmbb {

/// Non-resonant forced correction: x_1(phi) = eps * sum_k harmonics[k] e^{i<k,phi>}.
struct QuasiPeriodicCorrection {
    std::map<std::vector<int>, VectorXc> harmonics;
};

/// Forcing frequencies closer than this many |Re lambda_j| to Im lambda_j count as resonant.
inline constexpr double kResonanceBandFactor = 10.0;

QuasiPeriodicCorrection quasiperiodic_correction(const Spectrum<double>& spec, const FirstOrderSystem& fos,
                                                 double band_factor = kResonanceBandFactor);

/// Autonomous SSM plus the near-resonant time-periodic correction of mode l.
struct ForcedSSM {
    SSMCoefficients<double> base;
    int mode = 1;
    VectorXc w_plus;
    VectorXc w_minus;
    cdouble r_c;
    /// Im(r_c) after normalization.
    double r = 0.0;
    double omega = 0.0;
    double epsilon = 0.0;
};

/// W_plus/W_minus and r for the forcing of `fos` at frequency omega. The spectrum must
/// already be normalized so that r_c is purely imaginary.
ForcedSSM resonant_correction(const Spectrum<double>& spec, const FirstOrderSystem& fos, int mode, double omega,
                              const SSMCoefficients<double>& base);

struct PipelineOptions {
    int order_m = 2;
    SpectrumOptions spectrum;
    ResonanceOptions resonance;
    SsmOptions ssm;
    /// Reject models that fail any nonresonance check.
    bool resonance_gate = true;
};

/// Everything derived from one model and master mode.
struct ReducedModel {
    FirstOrderSystem fos;
    /// Normalized so that r_c = i r with r > 0.
    Spectrum<double> spectrum;
    ResonanceReport resonance;
    SSMCoefficients<double> ssm;
    SlowDynamics slow;
    ForcedSSM forced;

    /// W_plus/W_minus are frequency dependent; this recomputes them.
    ForcedSSM forced_at(double omega) const;
    double epsilon() const { return fos.forcing.epsilon; }
    double r() const { return forced.r; }
};

ReducedModel build_reduced_model(const MechanicalSystem& sys, int mode, const PipelineOptions& opts = {});
ReducedModel build_reduced_model(const FirstOrderSystem& fos, int mode, const PipelineOptions& opts = {});

}  // namespace ssmbb
