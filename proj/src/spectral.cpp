#include "ssmbb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ssmbb {

namespace {

template <class Real>
using C = Complex<Real>;

int argmax_abs(const VectorXc& v) {
    int best = 0;
    double best_abs = -1.0;
    for (int i = 0; i < v.size(); ++i) {
        // Ties resolved towards the lowest index.
        if (std::abs(v[i]) > best_abs * (1.0 + 1e-12)) {
            best_abs = std::abs(v[i]);
            best = i;
        }
    }
    return best;
}

/// Builds V = [(e_j, lambda_j e_j)], its conjugate half, and V^{-1}.
template <class Real>
Spectrum<Real> assemble(const Mat<Real>& mass, const Vec<C<Real>>& lambdas, const Mat<C<Real>>& shapes,
                        int lambda_min_index) {
    using Cx = C<Real>;
    const int n = static_cast<int>(mass.rows());
    Spectrum<Real> s;
    s.n_dof = n;
    s.lambda_min_index = lambda_min_index;
    s.eigenvalues.resize(2 * n);
    s.v_matrix.resize(2 * n, 2 * n);
    s.mode_shapes = shapes;
    for (int j = 0; j < n; ++j) {
        const Cx lam = lambdas[j];
        s.eigenvalues[j] = lam;
        s.eigenvalues[j + n] = conj(lam);
        for (int i = 0; i < n; ++i) {
            const Cx e = shapes(i, j);
            s.v_matrix(i, j) = e;
            s.v_matrix(i + n, j) = lam * e;
            s.v_matrix(i, j + n) = conj(e);
            s.v_matrix(i + n, j + n) = conj(lam * e);
        }
    }
    s.v_inverse = s.v_matrix.partialPivLu().inverse();
    return s;
}

/// e^H M e = 1.
template <class Real>
Vec<C<Real>> mass_normalize(const Vec<C<Real>>& e, const Mat<Real>& mass) {
    const Vec<C<Real>> me = mass.template cast<C<Real>>() * e;
    C<Real> q = e.adjoint() * me;
    using std::sqrt;
    Real scale = sqrt(abs(q.real()));
    return e / C<Real>(scale);
}

}  // namespace

Spectrum<double> compute_spectrum(const FirstOrderSystem& fos, const SpectrumOptions& opts) {
    const MatrixXd& a = fos.a_matrix;
    const int n = fos.n_dof;
    const int dim = 2 * n;
    const double a_norm = std::max(a.norm(), 1e-300);

    Eigen::EigenSolver<MatrixXd> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) numerical_error("eigenvalue computation failed");
    VectorXc ev = es.eigenvalues();

    for (int i = 0; i < dim; ++i) {
        if (ev[i].real() > -1e-14 * a_norm) model_error("unstable or undamped origin");
    }
    for (int i = 0; i < dim; ++i) {
        if (std::abs(ev[i].imag()) <= opts.pairing_tol * a_norm) model_error("overdamped mode");
    }

    // Greedy conjugate matching.
    std::vector<cdouble> upper;
    std::vector<bool> used(dim, false);
    for (int i = 0; i < dim; ++i) {
        if (ev[i].imag() <= 0.0) continue;
        int partner = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < dim; ++j) {
            if (used[j] || ev[j].imag() >= 0.0) continue;
            const double d = std::abs(std::conj(ev[i]) - ev[j]);
            if (d < best) {
                best = d;
                partner = j;
            }
        }
        if (partner < 0 || best > opts.pairing_tol * std::max(1.0, std::abs(ev[i]))) {
            numerical_error("eigenvalues do not form conjugate pairs");
        }
        used[partner] = true;
        upper.push_back(cdouble(0.5 * (ev[i].real() + ev[partner].real()),
                                0.5 * (ev[i].imag() - ev[partner].imag())));
    }
    if (static_cast<int>(upper.size()) != n) numerical_error("eigenvalues do not form conjugate pairs");
    std::sort(upper.begin(), upper.end(), [](const cdouble& x, const cdouble& y) {
        if (x.imag() != y.imag()) return x.imag() < y.imag();
        return x.real() < y.real();
    });

    // Eigenvectors from the null space of (A - lambda I); clusters of equal
    // eigenvalues share one basis, which also serves as the semisimplicity test.
    const MatrixXc ac = a.cast<cdouble>();
    MatrixXc shapes(n, n);
    const double cluster_tol = opts.semisimple_tol * a_norm;
    int j = 0;
    while (j < n) {
        int k = j + 1;
        while (k < n && std::abs(upper[k] - upper[j]) <= cluster_tol) ++k;
        const int mult = k - j;
        cdouble lam = 0.0;
        for (int q = j; q < k; ++q) lam += upper[q];
        lam /= static_cast<double>(mult);

        Eigen::JacobiSVD<MatrixXc> svd(ac - lam * MatrixXc::Identity(dim, dim), Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int null_dim = 0;
        for (int q = 0; q < dim; ++q) {
            if (sv[q] <= cluster_tol) ++null_dim;
        }
        if (null_dim != mult) model_error("matrix not semisimple");
        for (int q = 0; q < mult; ++q) {
            VectorXc v = svd.matrixV().col(dim - mult + q);
            VectorXc e = v.head(n);
            if (e.norm() == 0.0) numerical_error("eigenvector has vanishing displacement part");
            e = mass_normalize<double>(e, fos.mass);
            const int p = argmax_abs(e);
            e *= std::abs(e[p]) / e[p];
            shapes.col(j + q) = e;
            upper[j + q] = lam;
        }
        j = k;
    }

    int min_idx = 0;
    for (int q = 1; q < n; ++q) {
        if (upper[q].real() < upper[min_idx].real()) min_idx = q;
    }

    Vec<cdouble> lambdas(n);
    for (int q = 0; q < n; ++q) lambdas[q] = upper[q];
    Spectrum<double> s = assemble<double>(fos.mass, lambdas, shapes, min_idx);

    MatrixXc lam_diag = s.eigenvalues.asDiagonal();
    const double recon = (ac * s.v_matrix - s.v_matrix * lam_diag).norm();
    if (recon > 1e-9 * a_norm * std::max(1.0, s.v_matrix.norm())) {
        numerical_error("eigen-decomposition residual too large");
    }
    if ((s.v_matrix * s.v_inverse - MatrixXc::Identity(dim, dim)).norm() > 1e-9) {
        numerical_error("eigenvector matrix ill-conditioned");
    }
    return s;
}

Spectrum<Quad> refine_spectrum(const FirstOrderSystem& fos, const Spectrum<double>& spec) {
    using Cq = Complex<Quad>;
    const int n = fos.n_dof;
    const int dim = 2 * n;
    const Mat<Quad> a = fos.a_matrix.cast<Quad>();
    const Mat<Cq> ac = a.cast<Cq>();
    const Mat<Quad> mass = fos.mass.cast<Quad>();

    Vec<Cq> lambdas(n);
    Mat<Cq> shapes(n, n);
    for (int j = 0; j < n; ++j) {
        Vec<Cq> v(dim);
        for (int i = 0; i < dim; ++i) v[i] = complex_cast<Quad, double>(spec.v_matrix(i, j));
        Cq lam = complex_cast<Quad, double>(spec.eigenvalues[j]);
        const Vec<Cq> w = v;

        // Bordered Newton iteration on (A - lam I) v = 0, w^H v = 1.
        const Cq wv = w.dot(v);
        v /= wv;
        for (int it = 0; it < 8; ++it) {
            Mat<Cq> jac = Mat<Cq>::Zero(dim + 1, dim + 1);
            jac.topLeftCorner(dim, dim) = ac;
            for (int i = 0; i < dim; ++i) jac(i, i) -= lam;
            jac.block(0, dim, dim, 1) = -v;
            jac.block(dim, 0, 1, dim) = w.adjoint();
            Vec<Cq> res(dim + 1);
            res.head(dim) = ac * v - lam * v;
            res[dim] = w.dot(v) - Cq(1);
            Vec<Cq> step = jac.partialPivLu().solve(res);
            v -= step.head(dim);
            lam -= step[dim];
            if (res.norm() < Quad(1e-32)) break;
        }
        if ((ac * v - lam * v).norm() > Quad(1e-28) * v.norm() * a.norm()) {
            numerical_error("extended-precision eigenpair refinement did not converge");
        }

        Vec<Cq> e = mass_normalize<Quad>(Vec<Cq>(v.head(n)), mass);
        const VectorXc e_ref = spec.mode_shapes.col(j);
        const int p = argmax_abs(e_ref);
        const Cq ratio = e[p] / complex_cast<Quad, double>(e_ref[p]);
        e *= Cq(abs(ratio)) / ratio;
        lambdas[j] = lam;
        shapes.col(j) = e;
    }
    return assemble<Quad>(mass, lambdas, shapes, spec.lambda_min_index);
}

cdouble reduced_forcing(const Spectrum<double>& spec, const VectorXc& g_plus, int mode) {
    if (mode < 1 || mode > spec.n_dof) model_error("mode index out of range");
    return (spec.v_inverse.row(mode - 1) * g_plus)(0);
}

Spectrum<double> normalize_for_imaginary_rc(const Spectrum<double>& spec, const VectorXc& g_plus, int mode) {
    const int n = spec.n_dof;
    const int li = mode - 1;
    const cdouble rc = reduced_forcing(spec, g_plus, mode);
    const double scale = spec.v_inverse.row(li).norm() * g_plus.norm();
    if (std::abs(rc) <= 1e-14 * scale || std::abs(rc) == 0.0) {
        model_error("forcing orthogonal to master subspace (response is the origin)");
    }
    // e^{-i phi} r_c = i |r_c|
    const cdouble rot = cdouble(0.0, std::abs(rc)) / rc;  // e^{-i phi}
    const cdouble rot_inv = std::conj(rot);               // e^{+i phi}

    Spectrum<double> out = spec;
    out.v_matrix.col(li) *= rot_inv;
    out.v_matrix.col(li + n) *= rot;
    out.v_inverse.row(li) *= rot;
    out.v_inverse.row(li + n) *= rot_inv;
    out.mode_shapes.col(li) *= rot_inv;
    return out;
}

SpectralQuotient spectral_quotient(const Spectrum<double>& spec, int mode, int cap) {
    if (mode < 1 || mode > spec.n_dof) model_error("mode index out of range");
    const double re_min = spec.eigenvalues[spec.lambda_min_index].real();
    const double re_l = spec.lambda(mode).real();
    const double ratio = re_min / re_l;
    SpectralQuotient q;
    q.value = std::max(1, static_cast<int>(std::floor(ratio + 1e-12)));
    if (q.value > cap) {
        q.value = cap;
        q.capped = true;
    }
    return q;
}

ResonanceReport check_nonresonance(const Spectrum<double>& spec, int mode, const ResonanceOptions& opts) {
    const int n = spec.n_dof;
    if (mode < 1 || mode > n) model_error("mode index out of range");
    const int li = mode - 1;
    const cdouble lam = spec.eigenvalues[li];
    const double tol_near = opts.tol_near < 0.0 ? opts.tol_near_factor * std::abs(lam.imag()) : opts.tol_near;

    ResonanceReport rep;
    rep.master_index = mode;
    rep.quotient = spectral_quotient(spec, mode, opts.quotient_cap);
    const int sigma = rep.quotient.value;
    rep.max_order = std::max(sigma, opts.expansion_order);

    // Inner conditions: m Re(lambda_l) != Re(lambda_n), n outside E_l.
    for (int m = 2; m <= sigma; ++m) {
        for (int q = 0; q < 2 * n; ++q) {
            if (q == li || q == li + n) continue;
            const double d = std::abs(m * lam.real() - spec.eigenvalues[q].real());
            rep.inner_margin = std::min(rep.inner_margin, d);
            if (d < opts.tol_abs) rep.inner_violations.push_back({m, q + 1});
        }
    }

    // Outer conditions, restricted to the master pair.
    for (int m = 2; m <= sigma; ++m) {
        for (int q : {li, li + n}) {
            const cdouble lq = spec.eigenvalues[q];
            const double d = std::abs(static_cast<double>(m) * lq - lq);
            rep.outer_margin = std::min(rep.outer_margin, d);
            if (d < opts.tol_abs) rep.outer_violations.push_back({m, q + 1});
        }
    }

    // Near-resonance: m1 lambda_l + m2 conj(lambda_l) vs lambda_j, j outside E_l.
    for (int deg = 1; deg <= rep.max_order; ++deg) {
        for (int m1 = deg; m1 >= 0; --m1) {
            const int m2 = deg - m1;
            const cdouble comb = static_cast<double>(m1) * lam + static_cast<double>(m2) * std::conj(lam);
            for (int q = 0; q < 2 * n; ++q) {
                if (q == li || q == li + n) continue;
                const double d = std::abs(comb - spec.eigenvalues[q]);
                rep.near_margin = std::min(rep.near_margin, d);
                if (d < tol_near) rep.near_violations.push_back({m1, m2, q + 1});
            }
        }
    }

    rep.inner_ok = rep.inner_violations.empty();
    rep.outer_ok = rep.outer_violations.empty();
    rep.near_ok = rep.near_violations.empty();
    return rep;
}

}  // namespace ssmbb
