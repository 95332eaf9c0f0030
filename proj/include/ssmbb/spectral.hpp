#pragma once

#include <vector>

#include "ssmbb/mech_model.hpp"
#include "ssmbb/types.hpp"

namespace ssmbb {

/// Eigen-structure of the first-order matrix A.
///
/// Indices follow the conjugate-pair convention: slots 0..N-1 hold the
/// eigenvalues with positive imaginary part in ascending frequency, slot j+N
/// holds the conjugate of slot j. Public functions take 1-based mode numbers
/// l in 1..N; slot l-1 and slot l-1+N span the modal subspace E_l.
template <class Real>
struct Spectrum {
    using C = Complex<Real>;

    int n_dof = 0;
    Vec<C> eigenvalues;
    Mat<C> v_matrix;
    Mat<C> v_inverse;
    /// Column j is e_j, the upper half of v_j (j < N).
    Mat<C> mode_shapes;
    /// Slot (0-based, < N) of an eigenvalue with the most negative real part.
    int lambda_min_index = 0;

    int dim() const { return 2 * n_dof; }
    const C& lambda(int mode) const { return eigenvalues[mode - 1]; }
    /// Row t_j of V^{-1}, 0-based slot.
    auto t_row(int slot) const { return v_inverse.row(slot); }
};

struct SpectrumOptions {
    double pairing_tol = 1e-8;
    double semisimple_tol = 1e-8;
};

Spectrum<double> compute_spectrum(const FirstOrderSystem& fos, const SpectrumOptions& opts = {});

/// Newton-refines every eigenpair of a double-precision spectrum in extended
/// precision and rebuilds V, V^{-1} there. Phase conventions (including any
/// r_c normalization applied to the input) are carried over.
Spectrum<Quad> refine_spectrum(const FirstOrderSystem& fos, const Spectrum<double>& spec);

/// r_c = t_l g for the lifted forcing amplitude g = g^{(+1)}.
cdouble reduced_forcing(const Spectrum<double>& spec, const VectorXc& g_plus, int mode);

/// Rotates columns l, l+N of V by e^{+-i phi} (rows of V^{-1} by e^{-+i phi})
/// so that r_c = i r with r > 0.
Spectrum<double> normalize_for_imaginary_rc(const Spectrum<double>& spec, const VectorXc& g_plus, int mode);

struct SpectralQuotient {
    int value = 1;
    bool capped = false;
};

SpectralQuotient spectral_quotient(const Spectrum<double>& spec, int mode, int cap = 20);

struct InnerViolation {
    int m;      // multiple of Re(lambda_l)
    int slot;   // 1-based eigenvalue index n
};

struct OuterViolation {
    int m;
    int slot;
};

struct NearViolation {
    int m1;
    int m2;
    int slot;   // 1-based eigenvalue index j
};

struct ResonanceReport {
    int master_index = 1;
    SpectralQuotient quotient;
    int max_order = 1;
    bool inner_ok = true;
    bool outer_ok = true;
    bool near_ok = true;
    std::vector<InnerViolation> inner_violations;
    std::vector<OuterViolation> outer_violations;
    std::vector<NearViolation> near_violations;
    double inner_margin = std::numeric_limits<double>::infinity();
    double outer_margin = std::numeric_limits<double>::infinity();
    double near_margin = std::numeric_limits<double>::infinity();

    bool ok() const { return inner_ok && outer_ok && near_ok; }
};

struct ResonanceOptions {
    double tol_abs = 1e-6;
    /// Absolute near-resonance tolerance; negative selects tol_near_factor |Im(lambda_l)|.
    double tol_near = -1.0;
    double tol_near_factor = 0.05;
    int quotient_cap = 20;
    /// The near-resonance enumeration also covers every monomial degree up to
    /// this SSM order, since those denominators enter the coefficients.
    int expansion_order = 0;
};

ResonanceReport check_nonresonance(const Spectrum<double>& spec, int mode, const ResonanceOptions& opts = {});

}  // namespace ssmbb
