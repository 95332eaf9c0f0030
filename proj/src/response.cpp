#include "ssmbb/response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/Polynomials>

namespace ssmbb {

namespace {

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

double poly_eval(const std::vector<double>& c, double x) {
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
    return s;
}

double poly_deriv_eval(const std::vector<double>& c, double x) {
    double s = 0.0;
    for (std::size_t k = c.size() - 1; k >= 1; --k) {
        s = s * x + static_cast<double>(k) * c[k];
        if (k == 1) break;
    }
    return s;
}

}  // namespace

VectorXc HarmonicSpectrum::at(int j) const {
    auto it = amplitudes.find(j);
    if (it != amplitudes.end()) return it->second;
    const int dim = amplitudes.empty() ? 0 : static_cast<int>(amplitudes.begin()->second.size());
    return VectorXc::Zero(dim);
}

int HarmonicSpectrum::max_harmonic() const { return amplitudes.empty() ? 0 : amplitudes.rbegin()->first; }

std::vector<double> positive_real_roots(std::vector<double> coeffs, double imag_tol, std::vector<double>* borderline) {
    while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
    std::vector<double> roots;
    if (coeffs.size() < 2) return roots;

    std::vector<double> candidates;
    if (coeffs.size() == 2) {
        candidates.push_back(-coeffs[0] / coeffs[1]);
    } else {
        Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
        Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(c);
        for (const auto& z : solver.roots()) {
            const double tol = imag_tol * std::max(1.0, std::abs(z.real()));
            if (std::abs(z.imag()) < tol) {
                candidates.push_back(z.real());
            } else if (borderline && std::abs(z.imag()) < 1e3 * tol && z.real() > 0.0) {
                borderline->push_back(z.real());
            }
        }
    }

    for (double u : candidates) {
        if (!(u > 0.0)) continue;
        // Safeguarded Newton polish: keep a step only if it reduces |p|.
        for (int it = 0; it < 3; ++it) {
            const double p = poly_eval(coeffs, u);
            const double dp = poly_deriv_eval(coeffs, u);
            if (dp == 0.0) break;
            const double next = u - p / dp;
            if (next > 0.0 && std::abs(poly_eval(coeffs, next)) < std::abs(p)) {
                u = next;
            } else {
                break;
            }
        }
        roots.push_back(u);
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double u : roots) {
        if (unique.empty() || std::abs(u - unique.back()) > 1e-12 * std::max(1.0, u)) unique.push_back(u);
    }
    return unique;
}

double response_function(const SlowDynamics& sd, double r, double epsilon, double omega, double rho) {
    const double a = sd.a(rho);
    const double d = sd.b(rho) - omega;
    return a * a + d * d * rho * rho - epsilon * epsilon * r * r;
}

std::vector<double> response_amplitudes(const SlowDynamics& sd, double r, double epsilon, double omega,
                                        std::vector<double>* borderline) {
    if (r == 0.0) model_error("degenerate forcing, response is origin");
    std::vector<double> a = sd.a_over_rho_in_u();
    std::vector<double> bm = sd.b_in_u();
    bm[0] -= omega;
    std::vector<double> a2 = poly_mul(a, a);
    std::vector<double> b2 = poly_mul(bm, bm);
    std::vector<double> p(a2.size() + 1, 0.0);
    for (std::size_t k = 0; k < a2.size(); ++k) p[k + 1] = a2[k] + b2[k];
    p[0] = -epsilon * epsilon * r * r;

    std::vector<double> u_border;
    std::vector<double> us = positive_real_roots(p, 1e-9, borderline ? &u_border : nullptr);
    std::vector<double> rho;
    for (double u : us) rho.push_back(std::sqrt(u));
    if (borderline) {
        for (double u : u_border) borderline->push_back(std::sqrt(u));
    }
    return rho;
}

double phase_shift(const SlowDynamics& sd, double rho, double r, double epsilon, double omega) {
    const double er = epsilon * r;
    const double c = (omega - sd.b(rho)) * rho / er;
    if (std::abs(c) > 1.0 + 1e-9) numerical_error("inconsistent (rho, Omega) pair, not a response point");
    const double s = -sd.a(rho) / er;
    return std::atan2(std::abs(s), std::clamp(c, -1.0, 1.0));
}

double phase_signed(const SlowDynamics& sd, double rho, double r, double epsilon, double omega) {
    const double er = epsilon * r;
    return std::atan2(-sd.a(rho) / er, (omega - sd.b(rho)) * rho / er);
}

StabilityResult stability(const SlowDynamics& sd, double rho, double omega) {
    const double d = omega - sd.b(rho);
    const double j11 = sd.da(rho);
    const double j12 = d * rho;
    const double j21 = sd.db(rho) - d / rho;
    const double j22 = sd.a(rho) / rho;
    StabilityResult out;
    out.trace = j11 + j22;
    out.det = j11 * j22 - j12 * j21;
    out.stable = out.trace < 0.0 && out.det > 0.0;
    const cdouble disc = std::sqrt(cdouble(0.25 * out.trace * out.trace - out.det, 0.0));
    out.eigenvalues = {0.5 * out.trace + disc, 0.5 * out.trace - disc};
    return out;
}

ResponsePoint response_point(const SlowDynamics& sd, double r, double epsilon, double omega, double rho) {
    ResponsePoint p;
    p.omega = omega;
    p.rho = rho;
    p.psi = phase_shift(sd, rho, r, epsilon, omega);
    const StabilityResult st = stability(sd, rho, omega);
    p.stable = st.stable;
    p.jac_eigs = st.eigenvalues;
    return p;
}

std::vector<ResponsePoint> response_points(const SlowDynamics& sd, double r, double epsilon, double omega) {
    std::vector<ResponsePoint> out;
    for (double rho : response_amplitudes(sd, r, epsilon, omega)) out.push_back(response_point(sd, r, epsilon, omega, rho));
    return out;
}

std::vector<BackbonePoint> backbone_curve(const SlowDynamics& sd, const std::vector<double>& rho_grid) {
    std::vector<BackbonePoint> out;
    out.reserve(rho_grid.size());
    for (double rho : rho_grid) out.push_back({rho, sd.b(rho), std::numbers::pi / 2.0});
    return out;
}

std::vector<double> max_amplitude(const SlowDynamics& sd, double r, double epsilon) {
    std::vector<double> a = sd.a_over_rho_in_u();
    std::vector<double> a2 = poly_mul(a, a);
    std::vector<double> p(a2.size() + 1, 0.0);
    for (std::size_t k = 0; k < a2.size(); ++k) p[k + 1] = a2[k];
    p[0] = -epsilon * epsilon * r * r;
    std::vector<double> rho;
    for (double u : positive_real_roots(p)) rho.push_back(std::sqrt(u));
    return rho;
}

std::vector<FRFBranch> frf_sweep(const SlowDynamics& sd, double r, double epsilon, const std::vector<double>& rho_grid) {
    if (r == 0.0) model_error("degenerate forcing, response is origin");
    const double er = epsilon * r;
    std::vector<double> steps;
    for (std::size_t i = 1; i < rho_grid.size(); ++i) steps.push_back(std::abs(rho_grid[i] - rho_grid[i - 1]));
    double median = 0.0;
    if (!steps.empty()) {
        std::nth_element(steps.begin(), steps.begin() + steps.size() / 2, steps.end());
        median = steps[steps.size() / 2];
    }

    std::vector<FRFBranch> out;
    FRFBranch plus{1, {}}, minus{-1, {}};
    double last_rho = -1.0;
    auto flush = [&]() {
        if (!plus.points.empty()) out.push_back(plus);
        if (!minus.points.empty()) out.push_back(minus);
        plus.points.clear();
        minus.points.clear();
    };
    for (double rho : rho_grid) {
        const double a = sd.a(rho);
        const double rad = er * er - a * a;
        if (rho <= 0.0 || rad < 0.0) {
            flush();
            last_rho = -1.0;
            continue;
        }
        if (last_rho > 0.0 && median > 0.0 && std::abs(rho - last_rho) > 10.0 * median) flush();
        last_rho = rho;
        const double b = sd.b(rho);
        const double root = std::sqrt(rad);
        const double s = -a / er;
        for (int side : {1, -1}) {
            ResponsePoint p;
            p.rho = rho;
            p.omega = b + side * root / rho;
            p.psi = std::atan2(std::abs(s), side * root / er);
            const StabilityResult st = stability(sd, rho, p.omega);
            p.stable = st.stable;
            p.jac_eigs = st.eigenvalues;
            (side > 0 ? plus : minus).points.push_back(p);
        }
    }
    flush();
    return out;
}

std::vector<BoundaryPoint> stability_boundaries(const SlowDynamics& sd, const std::vector<double>& rho_grid) {
    std::vector<BoundaryPoint> out;
    for (double rho : rho_grid) {
        BoundaryPoint p;
        p.rho = rho;
        const double s = sd.s_term(rho);
        const double rad = s * s - sd.a(rho) * sd.da(rho) / rho;
        if (rho > 0.0 && rad >= 0.0) {
            p.valid = true;
            const double b = sd.b(rho);
            p.omega_minus = b + s - std::sqrt(rad);
            p.omega_plus = b + s + std::sqrt(rad);
        }
        out.push_back(p);
    }
    return out;
}

std::vector<double> trace_critical_amplitudes(const SlowDynamics& sd) {
    std::vector<double> p;
    for (std::size_t k = 0; k < sd.a_coeffs.size(); ++k) p.push_back(static_cast<double>(2 * k + 2) * sd.a_coeffs[k]);
    std::vector<double> rho;
    for (double u : positive_real_roots(p)) rho.push_back(std::sqrt(u));
    return rho;
}

HarmonicSpectrum physical_harmonics(const ForcedSSM& fssm, double rho, double psi) {
    const int deg = fssm.base.max_degree();
    const int dim = static_cast<int>(fssm.w_plus.size());
    HarmonicSpectrum h;
    for (int j = -deg; j <= deg; ++j) h.amplitudes[j] = VectorXc::Zero(dim);
    for (const auto& [key, w] : fssm.base.w0) {
        const auto [p, q] = key;
        const int j = p - q;
        h.amplitudes[j] += std::pow(rho, p + q) * std::polar(1.0, j * psi) * w;
    }
    h.amplitudes[1] += fssm.epsilon * fssm.w_plus;
    h.amplitudes[-1] += fssm.epsilon * fssm.w_minus;
    return h;
}

VectorXc modal_projection(const Spectrum<double>& spec, const VectorXc& state_amplitude) {
    return spec.mode_shapes.partialPivLu().solve(state_amplitude.head(spec.n_dof));
}

double modal_amplitude(const Spectrum<double>& spec, const HarmonicSpectrum& h, int mode, int j) {
    if (mode < 1 || mode > spec.n_dof) model_error("mode index out of range");
    if (h.amplitudes.empty()) return 0.0;
    const cdouble p = modal_projection(spec, h.at(j))[mode - 1];
    return (j == 0 ? 1.0 : 2.0) * std::abs(p);
}

VectorXd reconstruct_state(const HarmonicSpectrum& h, double omega, double t) {
    VectorXc x = VectorXc::Zero(h.at(0).size());
    for (const auto& [j, v] : h.amplitudes) x += v * std::polar(1.0, j * omega * t);
    return x.real();
}

HarmonicSpectrum predicted_harmonics(const ReducedModel& rm, double omega, double rho) {
    const double psi = phase_signed(rm.slow, rho, rm.r(), rm.epsilon(), omega);
    return physical_harmonics(rm.forced_at(omega), rho, psi);
}

double reduced_first_harmonic(const Spectrum<double>& spec, const HarmonicSpectrum& h, int mode) {
    if (mode < 1 || mode > spec.n_dof) model_error("mode index out of range");
    return std::abs((spec.v_inverse.row(mode - 1) * h.at(1))(0));
}

std::vector<double> linear_grid(double lo, double hi, int points) {
    std::vector<double> g;
    if (points == 1) return {lo};
    for (int i = 0; i < points; ++i) g.push_back(lo + (hi - lo) * static_cast<double>(i) / (points - 1));
    return g;
}

}  // namespace ssmbb
