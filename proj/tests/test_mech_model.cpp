#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ssmbb/mech_model.hpp"

using namespace ssmbb;

namespace {

MechanicalSystem one_dof(double m, double c, double k) {
    MechanicalSystem s = MechanicalSystem::zeros(1);
    s.mass(0, 0) = m;
    s.damping(0, 0) = c;
    s.stiffness(0, 0) = k;
    return s;
}

bool has_message(const std::vector<std::string>& diags, const std::string& what) {
    for (const auto& d : diags) {
        if (d.find(what) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("first-order matrix of a damped oscillator") {
    const FirstOrderSystem fos = first_order_form(one_dof(1.0, 0.1, 1.0));
    MatrixXd expected(2, 2);
    expected << 0, 1, -1, -0.1;
    CHECK((fos.a_matrix - expected).norm() == 0.0);
}

TEST_CASE("Shaw-Pierre stiffness block") {
    const FirstOrderSystem fos = first_order_form(builtin_model(BuiltinModel::ShawPierre));
    MatrixXd expected(2, 2);
    expected << -2, 1, 1, -2;
    CHECK((fos.a_matrix.bottomLeftCorner(2, 2) - expected).norm() < 1e-15);
    CHECK((fos.a_matrix.topRightCorner(2, 2) - MatrixXd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("singular mass matrix") {
    MechanicalSystem s = MechanicalSystem::zeros(2);
    s.mass(0, 0) = 1.0;
    s.stiffness = MatrixXd::Identity(2, 2);
    s.damping = 0.1 * MatrixXd::Identity(2, 2);
    try {
        first_order_form(s);
        FAIL("no error");
    } catch (const SsmError& e) {
        CHECK(e.kind() == ErrorKind::Model);
        CHECK(std::string(e.what()).find("mass matrix not invertible") != std::string::npos);
    }
}

TEST_CASE("validate_model diagnostics") {
    CHECK(validate_model(builtin_model(BuiltinModel::ShawPierre)).empty());
    CHECK(validate_model(builtin_model(BuiltinModel::SpringSystem)).empty());
    CHECK(validate_model(builtin_model(BuiltinModel::OscillatorChain)).empty());

    MechanicalSystem s = builtin_model(BuiltinModel::ShawPierre);
    s.mass(0, 1) = 0.2;
    CHECK(has_message(validate_model(s), "mass not symmetric"));

    MechanicalSystem t = one_dof(1.0, 0.1, -1.0);
    CHECK(has_message(validate_model(t), "stiffness not positive semi-definite"));
}

TEST_CASE("built-in defaults") {
    const MechanicalSystem sp = builtin_model(BuiltinModel::ShawPierre);
    CHECK(sp.mass == MatrixXd::Identity(2, 2));
    const double c1 = 0.003, c2 = c1 / std::sqrt(3.0);
    CHECK(sp.damping(0, 0) == doctest::Approx(c1 + c2).epsilon(1e-15));
    CHECK(sp.damping(0, 1) == doctest::Approx(-c2).epsilon(1e-15));
    CHECK(sp.nonlinearity.coefficient({3, 0, 0, 0})[0] == 0.5);
    CHECK(sp.forcing.epsilon == 0.003);

    const MechanicalSystem ss = builtin_model(BuiltinModel::SpringSystem);
    CHECK(ss.stiffness(0, 0) == doctest::Approx(4.0));
    CHECK(ss.stiffness(1, 1) == doctest::Approx(20.25));
    CHECK(ss.damping(0, 0) == doctest::Approx(2 * 0.01 * 2.0));
    CHECK(ss.damping(1, 1) == doctest::Approx(2 * 0.2 * 4.5));
    CHECK(ss.forcing.epsilon == 0.02);

    const MechanicalSystem ch = builtin_model(BuiltinModel::OscillatorChain);
    CHECK(ch.n_dof == 5);
    CHECK(ch.mass == MatrixXd::Identity(5, 5));
    CHECK(ch.forcing.epsilon == 0.004);
    CHECK(ch.forcing.frequency() == 0.518);
}

TEST_CASE("built-in parameters") {
    const MechanicalSystem ch = builtin_model(BuiltinModel::OscillatorChain, {{"n", 3}});
    CHECK(ch.n_dof == 3);
    CHECK_THROWS_AS(builtin_model(BuiltinModel::ShawPierre, {{"nope", 1.0}}), SsmError);
    CHECK(builtin_from_name("spring_system") == BuiltinModel::SpringSystem);
    CHECK_THROWS_AS(builtin_from_name("duffing"), SsmError);
}

TEST_CASE("evaluate_field") {
    const MechanicalSystem sp = builtin_model(BuiltinModel::ShawPierre);
    VectorXd x(4);
    x << 2, 0, 0, 0;
    const VectorXd v = evaluate_field(sp.nonlinearity, x);
    CHECK(v[0] == 4.0);
    CHECK(v[1] == 0.0);
    CHECK(evaluate_field(PolynomialField<double>(4, 2), x).norm() == 0.0);

    std::mt19937 rng(5);
    const auto terms = oracle::random_terms(rng, 4, 2, 10, 3);
    PolynomialField<double> f(4, 2);
    for (const auto& t : terms) f.add_scalar_term(t.exponent, t.row, t.coeff);
    x << 0.4, -1.2, 0.9, 0.1;
    CHECK((evaluate_field(f, x) - oracle::naive_eval(terms, 2, x)).norm() < 1e-14);
}

TEST_CASE("forcing and lifted forcing") {
    const FirstOrderSystem fos = first_order_form(builtin_model(BuiltinModel::SpringSystem));
    // eps f cos(Omega t) at t = 0 sits in the velocity equations.
    const VectorXd f0 = fos.forcing_at(0.0);
    CHECK(f0[0] == 0.0);
    CHECK(f0[2] == doctest::Approx(0.02));
    CHECK(std::abs(fos.forcing_at(M_PI / 4.0)[2]) < 1e-17);
    const VectorXc g = fos.g_plus();
    CHECK(std::abs(g[2] - cdouble(0.5, 0.0)) < 1e-15);
    CHECK(fos.with_frequency(1.7).forcing.frequency() == 1.7);
    CHECK(fos.with_epsilon(0.5).forcing.epsilon == 0.5);
}

TEST_CASE("rhs and jacobian of the first-order system") {
    const FirstOrderSystem fos = first_order_form(builtin_model(BuiltinModel::ShawPierre));
    VectorXd x(4);
    x << 0.1, -0.2, 0.05, 0.3;
    const VectorXd lhs = fos.rhs(0.0, x) - fos.forcing_at(0.0);
    VectorXd expected = fos.a_matrix * x;
    expected[2] -= 0.5 * std::pow(0.1, 3);
    CHECK((lhs - expected).norm() < 1e-15);
    const double h = 1e-7;
    for (int v = 0; v < 4; ++v) {
        VectorXd xp = x, xm = x;
        xp[v] += h;
        xm[v] -= h;
        CHECK((fos.jacobian(x).col(v) - (fos.rhs(0.0, xp) - fos.rhs(0.0, xm)) / (2 * h)).norm() < 1e-8);
    }
}
