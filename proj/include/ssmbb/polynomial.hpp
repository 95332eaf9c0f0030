#pragma once

#include <map>
#include <numeric>
#include <vector>

#include "ssmbb/types.hpp"

namespace ssmbb {

/// Exponent multi-index; length equals the number of variables.
using Exponent = std::vector<int>;

inline int total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0); }

inline Exponent unit_exponent(int n_vars, int var, int power = 1) {
    Exponent e(n_vars, 0);
    e[var] = power;
    return e;
}

/// Sparse vector-valued polynomial: output = sum_m coeff_m * x^m.
///
/// Terms are kept in a std::map so iteration order (and therefore every
/// floating-point sum built from it) is deterministic.
template <class S>
class PolynomialField {
public:
    using Scalar = S;
    using Coeff = Vec<S>;
    using TermMap = std::map<Exponent, Coeff>;

    PolynomialField() = default;
    PolynomialField(int n_vars, int n_out) : n_vars_(n_vars), n_out_(n_out) {}

    int n_vars() const { return n_vars_; }
    int n_out() const { return n_out_; }
    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    /// Adds coeff to the term with exponent e. Entries that cancel to exactly
    /// zero are removed so no zero coefficient is ever stored.
    void add_term(const Exponent& e, const Coeff& coeff) {
        if (static_cast<int>(e.size()) != n_vars_) {
            model_error("polynomial term exponent has length " + std::to_string(e.size()) +
                        ", expected " + std::to_string(n_vars_));
        }
        if (coeff.size() != n_out_) {
            model_error("polynomial term coefficient has wrong output dimension");
        }
        for (int v : e) {
            if (v < 0) model_error("negative exponent in polynomial term");
        }
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            if (!is_zero(coeff)) terms_.emplace(e, coeff);
            return;
        }
        it->second += coeff;
        if (is_zero(it->second)) terms_.erase(it);
    }

    void add_scalar_term(const Exponent& e, int row, const S& value) {
        Coeff c = Coeff::Zero(n_out_);
        c[row] = value;
        add_term(e, c);
    }

    bool has_term(const Exponent& e) const { return terms_.count(e) > 0; }

    /// Coefficient vector of x^e, zero if absent.
    Coeff coefficient(const Exponent& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Coeff(Coeff::Zero(n_out_)) : it->second;
    }

    int min_degree() const {
        int d = std::numeric_limits<int>::max();
        for (const auto& [e, c] : terms_) d = std::min(d, total_degree(e));
        return terms_.empty() ? 0 : d;
    }

    int max_degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
        return d;
    }

    template <class T>
    Vec<T> evaluate(const Vec<T>& x) const {
        if (x.size() != n_vars_) {
            model_error("polynomial evaluated with " + std::to_string(x.size()) +
                        " variables, expected " + std::to_string(n_vars_));
        }
        Vec<T> out = Vec<T>::Zero(n_out_);
        for (const auto& [e, c] : terms_) {
            T mono = monomial(e, x);
            for (int i = 0; i < n_out_; ++i) out[i] += cast_scalar<T>(c[i]) * mono;
        }
        return out;
    }

    /// d(output)/dx, n_out x n_vars.
    template <class T>
    Mat<T> jacobian(const Vec<T>& x) const {
        Mat<T> jac = Mat<T>::Zero(n_out_, n_vars_);
        for (const auto& [e, c] : terms_) {
            for (int v = 0; v < n_vars_; ++v) {
                if (e[v] == 0) continue;
                Exponent de = e;
                de[v] -= 1;
                T d = T(e[v]) * monomial(de, x);
                for (int i = 0; i < n_out_; ++i) jac(i, v) += cast_scalar<T>(c[i]) * d;
            }
        }
        return jac;
    }

    template <class T>
    PolynomialField<T> cast() const {
        PolynomialField<T> out(n_vars_, n_out_);
        for (const auto& [e, c] : terms_) {
            Vec<T> cc(n_out_);
            for (int i = 0; i < n_out_; ++i) cc[i] = cast_scalar<T>(c[i]);
            out.add_term(e, cc);
        }
        return out;
    }

    /// Returns L * output (L has n_out columns).
    template <class T>
    PolynomialField<T> transform_outputs(const Mat<T>& left) const {
        PolynomialField<T> out(n_vars_, static_cast<int>(left.rows()));
        for (const auto& [e, c] : terms_) {
            Vec<T> cc(n_out_);
            for (int i = 0; i < n_out_; ++i) cc[i] = cast_scalar<T>(c[i]);
            out.add_term(e, left * cc);
        }
        return out;
    }

    template <class T>
    static T cast_scalar(const S& s) {
        if constexpr (std::is_same_v<T, S>) {
            return s;
        } else if constexpr (is_complex_v<S>) {
            using R = typename T::value_type;
            return T(static_cast<R>(s.real()), static_cast<R>(s.imag()));
        } else {
            return T(s);
        }
    }

private:
    template <class X>
    static constexpr bool is_complex_v = !std::is_arithmetic_v<X> && !std::is_same_v<X, Quad>;

    static bool is_zero(const Coeff& c) {
        for (int i = 0; i < c.size(); ++i) {
            if (c[i] != S(0)) return false;
        }
        return true;
    }

    template <class T>
    static T monomial(const Exponent& e, const Vec<T>& x) {
        T m(1);
        for (std::size_t v = 0; v < e.size(); ++v) {
            for (int p = 0; p < e[v]; ++p) m *= x[static_cast<Eigen::Index>(v)];
        }
        return m;
    }

    int n_vars_ = 0;
    int n_out_ = 0;
    TermMap terms_;
};

/// Scalar sparse polynomial used for exact composition.
template <class S>
using ScalarPoly = std::map<Exponent, S>;

template <class S>
ScalarPoly<S> poly_multiply(const ScalarPoly<S>& a, const ScalarPoly<S>& b) {
    ScalarPoly<S> out;
    for (const auto& [ea, ca] : a) {
        for (const auto& [eb, cb] : b) {
            Exponent e(ea.size());
            for (std::size_t i = 0; i < ea.size(); ++i) e[i] = ea[i] + eb[i];
            out[e] += ca * cb;
        }
    }
    return out;
}

/// Substitutes x = L y into the field: returns the polynomial in y whose value
/// is field(L y). The expansion is exact (no truncation).
template <class T, class S>
PolynomialField<T> compose_linear(const PolynomialField<S>& field, const Mat<T>& L) {
    const int n_new = static_cast<int>(L.cols());
    if (L.rows() != field.n_vars()) model_error("compose_linear: dimension mismatch");

    std::vector<ScalarPoly<T>> forms(field.n_vars());
    for (int i = 0; i < field.n_vars(); ++i) {
        for (int j = 0; j < n_new; ++j) {
            if (L(i, j) != T(0)) forms[i][unit_exponent(n_new, j)] = L(i, j);
        }
    }

    PolynomialField<T> out(n_new, field.n_out());
    for (const auto& [e, c] : field.terms()) {
        ScalarPoly<T> prod;
        prod[Exponent(n_new, 0)] = T(1);
        for (int v = 0; v < field.n_vars(); ++v) {
            for (int p = 0; p < e[v]; ++p) prod = poly_multiply(prod, forms[v]);
        }
        Vec<T> cc(field.n_out());
        for (int i = 0; i < field.n_out(); ++i) cc[i] = PolynomialField<S>::template cast_scalar<T>(c[i]);
        for (const auto& [pe, pc] : prod) {
            if (pc != T(0)) out.add_term(pe, cc * pc);
        }
    }
    return out;
}

}  // namespace ssmbb
