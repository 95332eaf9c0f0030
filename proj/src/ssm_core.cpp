#include "ssmbb/ssm_core.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ssmbb {

namespace {

/// Truncated bivariate polynomial in (z, conj z), dense in m + n <= degree.
template <class Cx>
class Bivariate {
public:
    explicit Bivariate(int degree = 0) : deg_(degree), c_((degree + 1) * (degree + 1), Cx(0)) {}

    int degree() const { return deg_; }
    Cx& at(int m, int n) { return c_[m * (deg_ + 1) + n]; }
    const Cx& at(int m, int n) const { return c_[m * (deg_ + 1) + n]; }

    static Bivariate one(int degree) {
        Bivariate b(degree);
        b.at(0, 0) = Cx(1);
        return b;
    }

    Bivariate operator*(const Bivariate& o) const {
        Bivariate out(deg_);
        for (int m1 = 0; m1 <= deg_; ++m1) {
            for (int n1 = 0; m1 + n1 <= deg_; ++n1) {
                const Cx a = at(m1, n1);
                if (a == Cx(0)) continue;
                for (int m2 = 0; m1 + n1 + m2 <= deg_; ++m2) {
                    for (int n2 = 0; m1 + n1 + m2 + n2 <= deg_; ++n2) {
                        out.at(m1 + m2, n1 + n2) += a * o.at(m2, n2);
                    }
                }
            }
        }
        return out;
    }

private:
    int deg_;
    std::vector<Cx> c_;
};

/// Coefficients of G(W(z)) up to total degree `degree`, one bivariate per output.
template <class Cx>
std::vector<Bivariate<Cx>> compose(const PolynomialField<Cx>& g, const std::vector<Bivariate<Cx>>& w, int degree) {
    const int nv = g.n_vars();
    std::vector<int> max_pow(nv, 0);
    for (const auto& [e, c] : g.terms()) {
        for (int i = 0; i < nv; ++i) max_pow[i] = std::max(max_pow[i], e[i]);
    }
    std::vector<std::vector<Bivariate<Cx>>> powers(nv);
    for (int i = 0; i < nv; ++i) {
        powers[i].push_back(Bivariate<Cx>::one(degree));
        for (int p = 1; p <= max_pow[i]; ++p) powers[i].push_back(powers[i].back() * w[i]);
    }
    std::vector<Bivariate<Cx>> out(g.n_out(), Bivariate<Cx>(degree));
    for (const auto& [e, c] : g.terms()) {
        if (total_degree(e) > degree) continue;
        Bivariate<Cx> mono = Bivariate<Cx>::one(degree);
        for (int i = 0; i < nv; ++i) {
            if (e[i] > 0) mono = mono * powers[i][e[i]];
        }
        for (int j = 0; j < g.n_out(); ++j) {
            if (c[j] == Cx(0)) continue;
            for (int m = 0; m <= degree; ++m) {
                for (int n = 0; m + n <= degree; ++n) out[j].at(m, n) += c[j] * mono.at(m, n);
            }
        }
    }
    return out;
}

template <class Real>
void check_denominator(const Complex<Real>& den, const Complex<Real>& lambda_l, double threshold, int m, int n,
                       int slot) {
    using std::abs;
    if (abs(den) < Real(threshold) * abs(lambda_l.imag())) {
        resonance_error("near-resonant denominator for monomial (" + std::to_string(m) + "," + std::to_string(n) +
                        ") in modal component " + std::to_string(slot + 1) +
                        "; the two-dimensional SSM does not capture this interaction");
    }
}

template <class Real>
void fill_physical(SSMCoefficients<Real>& out, const Spectrum<Real>& spec) {
    out.w0.clear();
    for (const auto& [key, w] : out.w_modal) out.w0[key] = spec.v_matrix * w;
}

Exponent at2(int dim, int a, int pa, int b = -1, int pb = 0) {
    Exponent e(dim, 0);
    e[a] += pa;
    if (b >= 0) e[b] += pb;
    return e;
}

}  // namespace

template <class Real>
Complex<Real> DiagonalizedNonlinearity<Real>::coefficient(const Exponent& e, int j) const {
    auto it = field.terms().find(e);
    return it == field.terms().end() ? Complex<Real>(0) : it->second[j];
}

template <class Real>
DiagonalizedNonlinearity<Real> diagonalize_nonlinearity(const FirstOrderSystem& fos, const Spectrum<Real>& spec) {
    using Cx = Complex<Real>;
    if (fos.nonlinearity.n_vars() != spec.dim()) model_error("nonlinearity dimension does not match spectrum");
    DiagonalizedNonlinearity<Real> out;
    PolynomialField<Cx> in_modal = compose_linear<Cx>(fos.nonlinearity, spec.v_matrix);
    out.field = in_modal.template transform_outputs<Cx>(spec.v_inverse);
    return out;
}

template <class Real>
Vec<Complex<Real>> SSMCoefficients<Real>::coefficient(int m, int n) const {
    auto it = w0.find({m, n});
    if (it != w0.end()) return it->second;
    const int dim = w0.empty() ? 0 : static_cast<int>(w0.begin()->second.size());
    return Vec<C>::Zero(dim);
}

template <class Real>
SSMCoefficients<Real> compute_ssm_order3(const DiagonalizedNonlinearity<Real>& g, const Spectrum<Real>& spec, int mode,
                                         const SsmOptions& opts) {
    using Cx = Complex<Real>;
    using std::conj;
    const int n = spec.n_dof;
    const int dim = 2 * n;
    if (mode < 1 || mode > n) model_error("mode index out of range");
    const int l = mode - 1;
    const int lb = l + n;
    const Cx lam = spec.eigenvalues[l];
    const Cx lamb = conj(lam);

    auto gq = [&](int j, int a, int pa, int b = -1, int pb = 0) { return g.coefficient(at2(dim, a, pa, b, pb), j); };
    // sum_q (1 + delta_{aq}) g_j^{(1@a,1@q)} w_q
    auto bilinear = [&](int j, int a, const Vec<Cx>& w) {
        Cx s(0);
        for (int q = 0; q < dim; ++q) {
            const Cx coeff = q == a ? Cx(2) * gq(j, a, 2) : gq(j, a, 1, q, 1);
            s += coeff * w[q];
        }
        return s;
    };
    auto solve = [&](int m, int nn, int j, const Cx& num) {
        const Cx den = Cx(Real(m)) * lam + Cx(Real(nn)) * lamb - spec.eigenvalues[j];
        check_denominator<Real>(den, lam, opts.small_denominator, m, nn, j);
        return num / den;
    };

    SSMCoefficients<Real> out;
    out.master_index = mode;
    out.order_m = 1;
    out.lambda_l = lam;
    out.beta.assign(1, Cx(0));

    Vec<Cx> w10 = Vec<Cx>::Zero(dim), w01 = Vec<Cx>::Zero(dim);
    w10[l] = Cx(1);
    w01[lb] = Cx(1);
    Vec<Cx> w20(dim), w11(dim), w02(dim), w30(dim), w21(dim), w12(dim), w03(dim);
    for (int j = 0; j < dim; ++j) {
        w20[j] = solve(2, 0, j, gq(j, l, 2));
        w11[j] = solve(1, 1, j, gq(j, l, 1, lb, 1));
        w02[j] = solve(0, 2, j, gq(j, lb, 2));
    }
    for (int j = 0; j < dim; ++j) {
        w30[j] = solve(3, 0, j, bilinear(j, l, w20) + gq(j, l, 3));
        w03[j] = solve(0, 3, j, bilinear(j, lb, w02) + gq(j, lb, 3));
        const Cx num21 = bilinear(j, l, w11) + bilinear(j, lb, w20) + gq(j, l, 2, lb, 1);
        const Cx num12 = bilinear(j, l, w02) + bilinear(j, lb, w11) + gq(j, l, 1, lb, 2);
        if (j == l) {
            out.beta[0] = num21;
            w21[j] = Cx(0);
        } else {
            w21[j] = solve(2, 1, j, num21);
        }
        w12[j] = j == lb ? Cx(0) : solve(1, 2, j, num12);
    }

    out.w_modal = {{{1, 0}, w10}, {{0, 1}, w01}, {{2, 0}, w20}, {{1, 1}, w11}, {{0, 2}, w02},
                   {{3, 0}, w30}, {{2, 1}, w21}, {{1, 2}, w12}, {{0, 3}, w03}};
    fill_physical(out, spec);
    return out;
}

template <class Real>
SSMCoefficients<Real> compute_ssm_general(const DiagonalizedNonlinearity<Real>& g, const Spectrum<Real>& spec, int mode,
                                          int order_m, const SsmOptions& opts) {
    using Cx = Complex<Real>;
    using std::conj;
    const int n = spec.n_dof;
    const int dim = 2 * n;
    if (mode < 1 || mode > n) model_error("mode index out of range");
    if (order_m < 1) model_error("SSM order parameter M must be at least 1");
    const int l = mode - 1;
    const int lb = l + n;
    const int deg = 2 * order_m + 1;
    const Cx lam = spec.eigenvalues[l];
    const Cx lamb = conj(lam);

    std::vector<Bivariate<Cx>> w(dim, Bivariate<Cx>(deg));
    w[l].at(1, 0) = Cx(1);
    w[lb].at(0, 1) = Cx(1);
    std::vector<Cx> beta(order_m, Cx(0));

    for (int d = 2; d <= deg; ++d) {
        const std::vector<Bivariate<Cx>> gw = compose(g.field, w, d);
        for (int m = d; m >= 0; --m) {
            const int nn = d - m;
            for (int j = 0; j < dim; ++j) {
                Cx rhs = gw[j].at(m, nn);
                for (int k = 1; m - k >= 0 && nn - k >= 0; ++k) {
                    if ((m - k) + (nn - k) < 2) continue;
                    const Cx f = Cx(Real(m - k)) * beta[k - 1] + Cx(Real(nn - k)) * conj(beta[k - 1]);
                    rhs -= f * w[j].at(m - k, nn - k);
                }
                if (j == l && m == nn + 1) {
                    beta[nn - 1] = rhs;
                    continue;
                }
                if (j == lb && nn == m + 1) continue;
                const Cx den = Cx(Real(m)) * lam + Cx(Real(nn)) * lamb - spec.eigenvalues[j];
                check_denominator<Real>(den, lam, opts.small_denominator, m, nn, j);
                w[j].at(m, nn) = rhs / den;
            }
        }
    }

    SSMCoefficients<Real> out;
    out.master_index = mode;
    out.order_m = order_m;
    out.lambda_l = lam;
    out.beta = beta;
    for (int d = 1; d <= deg; ++d) {
        for (int m = d; m >= 0; --m) {
            Vec<Cx> v(dim);
            for (int j = 0; j < dim; ++j) v[j] = w[j].at(m, d - m);
            out.w_modal[{m, d - m}] = v;
        }
    }
    fill_physical(out, spec);
    return out;
}

template <class Real>
Complex<Real> reduced_dynamics(const SSMCoefficients<Real>& ssm, const Complex<Real>& z) {
    using Cx = Complex<Real>;
    using std::conj;
    const Cx zb = conj(z);
    const Cx zz = z * zb;
    Cx out = ssm.lambda_l * z;
    Cx p = z;
    for (const Cx& b : ssm.beta) {
        p *= zz;
        out += b * p;
    }
    return out;
}

template <class Real>
Vec<Complex<Real>> evaluate_parameterization(const SSMCoefficients<Real>& ssm, const Complex<Real>& z) {
    using Cx = Complex<Real>;
    using std::conj;
    const int dim = static_cast<int>(ssm.w0.begin()->second.size());
    const Cx zb = conj(z);
    Vec<Cx> out = Vec<Cx>::Zero(dim);
    for (const auto& [key, w] : ssm.w0) {
        Cx mono(1);
        for (int p = 0; p < key.first; ++p) mono *= z;
        for (int p = 0; p < key.second; ++p) mono *= zb;
        out += w * mono;
    }
    return out;
}

template <class Real>
Real invariance_residual(const SSMCoefficients<Real>& ssm, const FirstOrderSystem& fos, const Complex<Real>& z) {
    using Cx = Complex<Real>;
    using std::conj;
    const int dim = fos.dim();
    const int deg = ssm.max_degree();
    const Cx zb = conj(z);
    std::vector<Cx> zp(deg + 1, Cx(1)), zbp(deg + 1, Cx(1));
    for (int p = 1; p <= deg; ++p) {
        zp[p] = zp[p - 1] * z;
        zbp[p] = zbp[p - 1] * zb;
    }
    Vec<Cx> w = Vec<Cx>::Zero(dim), wz = Vec<Cx>::Zero(dim), wzb = Vec<Cx>::Zero(dim);
    for (const auto& [key, c] : ssm.w0) {
        const auto [m, n] = key;
        w += c * (zp[m] * zbp[n]);
        if (m > 0) wz += c * (Cx(Real(m)) * zp[m - 1] * zbp[n]);
        if (n > 0) wzb += c * (Cx(Real(n)) * zp[m] * zbp[n - 1]);
    }
    const Cx r1 = reduced_dynamics(ssm, z);
    const Cx r2 = conj(r1);
    const Mat<Cx> a = fos.a_matrix.cast<Real>().template cast<Cx>();
    Vec<Cx> res = a * w + fos.nonlinearity.evaluate<Cx>(w) - wz * r1 - wzb * r2;
    return res.norm();
}

template <class Real>
SSMCoefficients<double> to_double(const SSMCoefficients<Real>& ssm) {
    if constexpr (std::is_same_v<Real, double>) {
        return ssm;
    } else {
        SSMCoefficients<double> out;
        out.master_index = ssm.master_index;
        out.order_m = ssm.order_m;
        out.lambda_l = complex_cast<double, Real>(ssm.lambda_l);
        for (const auto& b : ssm.beta) out.beta.push_back(complex_cast<double, Real>(b));
        auto conv = [](const Vec<Complex<Real>>& v) {
            VectorXc o(v.size());
            for (int i = 0; i < v.size(); ++i) o[i] = complex_cast<double, Real>(v[i]);
            return o;
        };
        for (const auto& [k, v] : ssm.w0) out.w0[k] = conv(v);
        for (const auto& [k, v] : ssm.w_modal) out.w_modal[k] = conv(v);
        return out;
    }
}

double SlowDynamics::a(double rho) const {
    double s = 0.0, p = 1.0;
    for (double c : a_coeffs) {
        s += c * p;
        p *= rho * rho;
    }
    return s * rho;
}

double SlowDynamics::b(double rho) const {
    double s = 0.0, p = 1.0;
    for (double c : b_coeffs) {
        s += c * p;
        p *= rho * rho;
    }
    return s;
}

double SlowDynamics::da(double rho) const {
    double s = 0.0, p = 1.0;
    for (std::size_t k = 0; k < a_coeffs.size(); ++k) {
        s += static_cast<double>(2 * k + 1) * a_coeffs[k] * p;
        p *= rho * rho;
    }
    return s;
}

double SlowDynamics::db(double rho) const {
    double s = 0.0, p = rho;
    for (std::size_t k = 1; k < b_coeffs.size(); ++k) {
        s += static_cast<double>(2 * k) * b_coeffs[k] * p;
        p *= rho * rho;
    }
    return s;
}

double SlowDynamics::s_term(double rho) const {
    double s = 0.0, p = rho * rho;
    for (std::size_t k = 1; k < b_coeffs.size(); ++k) {
        s += static_cast<double>(k) * b_coeffs[k] * p;
        p *= rho * rho;
    }
    return s;
}

SlowDynamics slow_dynamics(const SSMCoefficients<double>& ssm) {
    SlowDynamics sd;
    sd.a_coeffs.push_back(ssm.lambda_l.real());
    sd.b_coeffs.push_back(ssm.lambda_l.imag());
    for (const cdouble& b : ssm.beta) {
        sd.a_coeffs.push_back(b.real());
        sd.b_coeffs.push_back(b.imag());
    }
    return sd;
}

ValidityRadius validity_radius(const SSMCoefficients<double>& ssm, const FirstOrderSystem& fos, double fraction,
                               double z_min, double z_max, int points) {
    ValidityRadius out;
    bool failed = false;
    for (int i = 0; i < points; ++i) {
        const double s = z_min * std::pow(z_max / z_min, static_cast<double>(i) / (points - 1));
        double worst = 0.0;
        for (int t = 0; t < 8; ++t) {
            const cdouble z = std::polar(s, 2.0 * std::numbers::pi * t / 8.0);
            const double r = invariance_residual(ssm, fos, z) / std::abs(reduced_dynamics(ssm, z));
            worst = std::max(worst, r);
        }
        out.scan.emplace_back(s, worst);
        if (!failed && worst < fraction) {
            out.radius = s;
        } else {
            failed = true;
        }
    }
    return out;
}

#define SSMBB_INSTANTIATE(R)                                                                                          \
    template struct DiagonalizedNonlinearity<R>;                                                                       \
    template struct SSMCoefficients<R>;                                                                                \
    template DiagonalizedNonlinearity<R> diagonalize_nonlinearity(const FirstOrderSystem&, const Spectrum<R>&);        \
    template SSMCoefficients<R> compute_ssm_order3(const DiagonalizedNonlinearity<R>&, const Spectrum<R>&, int,        \
                                                   const SsmOptions&);                                                 \
    template SSMCoefficients<R> compute_ssm_general(const DiagonalizedNonlinearity<R>&, const Spectrum<R>&, int, int,  \
                                                    const SsmOptions&);                                                \
    template R invariance_residual(const SSMCoefficients<R>&, const FirstOrderSystem&, const Complex<R>&);             \
    template Vec<Complex<R>> evaluate_parameterization(const SSMCoefficients<R>&, const Complex<R>&);                  \
    template Complex<R> reduced_dynamics(const SSMCoefficients<R>&, const Complex<R>&);                                \
    template SSMCoefficients<double> to_double(const SSMCoefficients<R>&);

SSMBB_INSTANTIATE(double)
SSMBB_INSTANTIATE(Quad)

}  // namespace ssmbb
