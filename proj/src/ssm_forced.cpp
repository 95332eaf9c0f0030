#include "ssmbb/ssm_forced.hpp"

#include <cmath>
#include <sstream>

namespace ssmbb {

QuasiPeriodicCorrection quasiperiodic_correction(const Spectrum<double>& spec, const FirstOrderSystem& fos,
                                                 double band_factor) {
    QuasiPeriodicCorrection out;
    const ForcingDefinition& forcing = fos.forcing;
    const int dim = spec.dim();
    for (std::size_t h = 0; h < forcing.harmonics.size(); ++h) {
        const std::vector<int>& k = forcing.harmonics[h].wave_vector;
        double freq = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i) freq += k[i] * forcing.base_frequencies[i];
        VectorXc modal = spec.v_inverse * fos.lifted_forcing[h];
        for (int j = 0; j < dim; ++j) {
            const cdouble lam = spec.eigenvalues[j];
            if (std::abs(freq - lam.imag()) < band_factor * std::abs(lam.real())) {
                model_error("forcing harmonic is near-resonant; use resonant_correction for mode " +
                            std::to_string(j % spec.n_dof + 1));
            }
            modal[j] /= cdouble(0.0, freq) - lam;
        }
        out.harmonics[k] = spec.v_matrix * modal;
    }
    return out;
}

ForcedSSM resonant_correction(const Spectrum<double>& spec, const FirstOrderSystem& fos, int mode, double omega,
                              const SSMCoefficients<double>& base) {
    if (!fos.forcing.is_single_harmonic()) model_error("resonant correction requires single-harmonic forcing");
    const int n = spec.n_dof;
    const int l = mode - 1;
    const VectorXc g = fos.g_plus();

    ForcedSSM out;
    out.base = base;
    out.mode = mode;
    out.omega = omega;
    out.epsilon = fos.forcing.epsilon;
    out.r_c = reduced_forcing(spec, g, mode);
    if (std::abs(out.r_c) == 0.0) model_error("forcing orthogonal to master subspace (response is the origin)");
    if (std::abs(out.r_c.real()) > 1e-12 * std::abs(out.r_c)) {
        numerical_error("spectrum is not normalized for an imaginary reduced forcing");
    }
    out.r = out.r_c.imag();

    VectorXc plus = spec.v_inverse * g;
    VectorXc minus = spec.v_inverse * g.conjugate();
    for (int j = 0; j < 2 * n; ++j) {
        plus[j] = j == l ? cdouble(0.0) : plus[j] / (cdouble(0.0, omega) - spec.eigenvalues[j]);
        minus[j] = j == l + n ? cdouble(0.0) : minus[j] / (cdouble(0.0, -omega) - spec.eigenvalues[j]);
    }
    out.w_plus = spec.v_matrix * plus;
    out.w_minus = spec.v_matrix * minus;
    return out;
}

ForcedSSM ReducedModel::forced_at(double omega) const {
    return resonant_correction(spectrum, fos, forced.mode, omega, ssm);
}

ReducedModel build_reduced_model(const MechanicalSystem& sys, int mode, const PipelineOptions& opts) {
    return build_reduced_model(first_order_form(sys), mode, opts);
}

ReducedModel build_reduced_model(const FirstOrderSystem& fos, int mode, const PipelineOptions& opts) {
    ReducedModel rm;
    rm.fos = fos;
    Spectrum<double> raw = compute_spectrum(fos, opts.spectrum);
    if (mode < 1 || mode > raw.n_dof) model_error("mode index out of range");
    rm.spectrum = normalize_for_imaginary_rc(raw, fos.g_plus(), mode);

    ResonanceOptions ropts = opts.resonance;
    ropts.expansion_order = std::max(ropts.expansion_order, 2 * opts.order_m + 1);
    rm.resonance = check_nonresonance(rm.spectrum, mode, ropts);
    if (opts.resonance_gate && !rm.resonance.ok()) {
        std::ostringstream msg;
        msg << "nonresonance check failed for mode " << mode << ":";
        for (const auto& v : rm.resonance.inner_violations) msg << " inner(m=" << v.m << ", j=" << v.slot << ")";
        for (const auto& v : rm.resonance.outer_violations) msg << " outer(m=" << v.m << ", j=" << v.slot << ")";
        for (const auto& v : rm.resonance.near_violations) {
            msg << " near(m1=" << v.m1 << ", m2=" << v.m2 << ", j=" << v.slot << ")";
        }
        resonance_error(msg.str());
    }

    const DiagonalizedNonlinearity<double> g = diagonalize_nonlinearity(fos, rm.spectrum);
    rm.ssm = compute_ssm_general(g, rm.spectrum, mode, opts.order_m, opts.ssm);
    rm.slow = slow_dynamics(rm.ssm);
    rm.forced = resonant_correction(rm.spectrum, fos, mode, fos.forcing.frequency(), rm.ssm);
    return rm;
}

}  // namespace ssmbb
