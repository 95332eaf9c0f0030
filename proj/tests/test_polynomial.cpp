#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ssmbb/polynomial.hpp"

using namespace ssmbb;

namespace {

PolynomialField<double> from_terms(const std::vector<oracle::Term>& terms, int n_vars, int n_out) {
    PolynomialField<double> f(n_vars, n_out);
    for (const auto& t : terms) f.add_scalar_term(t.exponent, t.row, t.coeff);
    return f;
}

}  // namespace

TEST_CASE("evaluate agrees with a naive term loop") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto terms = oracle::random_terms(rng, 4, 3, 12, 3);
        const auto f = from_terms(terms, 4, 3);
        for (int k = 0; k < 10; ++k) {
            VectorXd x(4);
            for (int i = 0; i < 4; ++i) x[i] = u(rng);
            const VectorXd ref = oracle::naive_eval(terms, 3, x);
            CHECK((f.evaluate(x) - ref).norm() <= 1e-14 * std::max(1.0, ref.norm()));
        }
    }
}

TEST_CASE("empty field evaluates to zero") {
    PolynomialField<double> f(3, 2);
    CHECK(f.evaluate(VectorXd(VectorXd::Constant(3, 4.0))).norm() == 0.0);
    CHECK(f.empty());
}

TEST_CASE("terms that cancel are removed") {
    PolynomialField<double> f(2, 1);
    f.add_scalar_term({2, 1}, 0, 1.5);
    f.add_scalar_term({2, 1}, 0, -1.5);
    CHECK(f.empty());
    CHECK(f.coefficient({2, 1}).norm() == 0.0);
}

TEST_CASE("wrong exponent length is rejected") {
    PolynomialField<double> f(2, 1);
    CHECK_THROWS_AS(f.add_scalar_term({1, 0, 0}, 0, 1.0), SsmError);
    CHECK_THROWS_AS(f.add_scalar_term({-1, 2}, 0, 1.0), SsmError);
}

TEST_CASE("jacobian matches central differences") {
    std::mt19937 rng(11);
    const auto terms = oracle::random_terms(rng, 3, 3, 10, 3);
    const auto f = from_terms(terms, 3, 3);
    VectorXd x(3);
    x << 0.3, -0.7, 1.1;
    const MatrixXd jac = f.jacobian(x);
    const double h = 1e-6;
    for (int v = 0; v < 3; ++v) {
        VectorXd xp = x, xm = x;
        xp[v] += h;
        xm[v] -= h;
        const VectorXd fd = (oracle::naive_eval(terms, 3, xp) - oracle::naive_eval(terms, 3, xm)) / (2 * h);
        CHECK((jac.col(v) - fd).norm() < 1e-7);
    }
}

TEST_CASE("compose_linear reproduces evaluation at L y") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto terms = oracle::random_terms(rng, 3, 2, 8, 3);
    const auto f = from_terms(terms, 3, 2);
    MatrixXc l(3, 4);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) l(i, j) = cdouble(u(rng), u(rng));
    }
    const PolynomialField<cdouble> g = compose_linear<cdouble>(f, l);
    for (int k = 0; k < 10; ++k) {
        VectorXc y(4);
        for (int j = 0; j < 4; ++j) y[j] = cdouble(u(rng), u(rng));
        const VectorXc direct = f.evaluate<cdouble>(l * y);
        CHECK((g.evaluate(y) - direct).norm() < 1e-12);
    }
}

TEST_CASE("poly_multiply of two binomials") {
    ScalarPoly<double> a{{{1, 0}, 1.0}, {{0, 1}, 2.0}};
    ScalarPoly<double> b{{{1, 0}, 1.0}, {{0, 1}, -2.0}};
    const auto p = poly_multiply(a, b);
    CHECK(p.at({2, 0}) == 1.0);
    CHECK(p.at({1, 1}) == 0.0);
    CHECK(p.at({0, 2}) == -4.0);
}
