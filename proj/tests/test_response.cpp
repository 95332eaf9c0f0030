#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "ssmbb/response.hpp"

using namespace ssmbb;

namespace {

MechanicalSystem linear_two_dof() {
    MechanicalSystem s = MechanicalSystem::zeros(2);
    s.mass = MatrixXd::Identity(2, 2);
    s.stiffness << 2.0, -1.0, -1.0, 2.0;
    s.damping = 0.01 * MatrixXd::Identity(2, 2);
    s.forcing = ForcingDefinition::single_harmonic(Eigen::Vector2d(1.0, 0.3), 0.01, 1.0);
    return s;
}

SlowDynamics synthetic(std::vector<double> a, std::vector<double> b) {
    SlowDynamics sd;
    sd.a_coeffs = std::move(a);
    sd.b_coeffs = std::move(b);
    return sd;
}

PipelineOptions order(int m) {
    PipelineOptions o;
    o.order_m = m;
    return o;
}

}  // namespace

TEST_CASE("linear response amplitude and peak") {
    const SlowDynamics sd = synthetic({-0.02, 0.0}, {1.0, 0.0});
    const double er = 0.003;
    for (double omega : {0.5, 0.97, 1.0, 1.01, 1.4}) {
        const auto roots = response_amplitudes(sd, 1.0, er, omega);
        REQUIRE(roots.size() == 1);
        CHECK(roots[0] == doctest::Approx(er / std::hypot(0.02, 1.0 - omega)).epsilon(1e-12));
    }
    const auto peak = max_amplitude(sd, 1.0, er);
    REQUIRE(peak.size() == 1);
    CHECK(peak[0] == doctest::Approx(er / 0.02).epsilon(1e-14));
    CHECK(response_amplitudes(sd, 1.0, 0.0, 1.0).empty());
    CHECK_THROWS_WITH_AS(response_amplitudes(sd, 0.0, er, 1.0), "degenerate forcing, response is origin", SsmError);
}

TEST_CASE("Shaw-Pierre fold region has three roots") {
    const ReducedModel rm = build_reduced_model(builtin_model(BuiltinModel::ShawPierre), 1, order(1));
    const double omega = 1.02;
    const auto roots = response_amplitudes(rm.slow, rm.r(), rm.epsilon(), omega);
    REQUIRE(roots.size() == 3);
    const auto scan = oracle::scan_roots(
        [&](double rho) { return response_function(rm.slow, rm.r(), rm.epsilon(), omega, rho); }, 1e-6, 1.0, 1000000);
    REQUIRE(scan.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(roots[i] == doctest::Approx(scan[i]).epsilon(1e-9));
    CHECK(stability(rm.slow, roots[0], omega).stable);
    CHECK_FALSE(stability(rm.slow, roots[1], omega).stable);
    CHECK(stability(rm.slow, roots[2], omega).stable);
}

TEST_CASE("phase shift") {
    const ReducedModel rm = build_reduced_model(builtin_model(BuiltinModel::ShawPierre), 1);
    const double rho = max_amplitude(rm.slow, rm.r(), rm.epsilon()).at(0);
    CHECK(phase_shift(rm.slow, rho, rm.r(), rm.epsilon(), rm.slow.b(rho)) ==
          doctest::Approx(std::numbers::pi / 2).epsilon(1e-6));
    // Fold tangency with a = 0: cos psi = 1 exactly.
    const SlowDynamics sd = synthetic({0.0}, {1.0});
    CHECK(phase_shift(sd, 0.5, 1.0, 0.5, 2.0) == 0.0);
    CHECK_THROWS_AS(phase_shift(rm.slow, 0.1, rm.r(), rm.epsilon(), 2.0), SsmError);
    // Below resonance the modal coordinate sits opposite to i r e^{i Omega t}; above it aligns.
    const double lo = response_amplitudes(rm.slow, rm.r(), rm.epsilon(), 0.8).at(0);
    const double hi = response_amplitudes(rm.slow, rm.r(), rm.epsilon(), 1.3).at(0);
    CHECK(phase_shift(rm.slow, lo, rm.r(), rm.epsilon(), 0.8) > 3.1);
    CHECK(phase_shift(rm.slow, hi, rm.r(), rm.epsilon(), 1.3) < 0.05);
}

TEST_CASE("linear first harmonic equals the direct solve, phase included") {
    const ReducedModel rm = build_reduced_model(linear_two_dof(), 1);
    for (double omega : linear_grid(0.9, 1.1, 21)) {
        const auto roots = response_amplitudes(rm.slow, rm.r(), rm.epsilon(), omega);
        REQUIRE(roots.size() == 1);
        const HarmonicSpectrum h = predicted_harmonics(rm, omega, roots[0]);
        const VectorXc ref =
            oracle::linear_steady_state(rm.fos.a_matrix, rm.epsilon() * rm.fos.g_plus(), omega);
        CHECK((h.at(1) - ref).norm() <= 1e-10 * ref.norm());
        for (const auto& [j, v] : h.amplitudes) {
            if (std::abs(j) != 1) CHECK(v.norm() == 0.0);
        }
    }
}

TEST_CASE("stability structure") {
    const SlowDynamics lin = synthetic({-0.02}, {1.0});
    const StabilityResult s = stability(lin, 0.1, 1.3);
    CHECK(s.stable);
    CHECK(std::abs(s.eigenvalues[0] - cdouble(-0.02, 0.3)) < 1e-14);

    const SlowDynamics sd = synthetic({-0.02, 0.001}, {1.0, 0.2});
    const double rho = 0.3;
    const StabilityResult b = stability(sd, rho, sd.b(rho));
    const double e1 = b.eigenvalues[0].real(), e2 = b.eigenvalues[1].real();
    CHECK(std::min(e1, e2) == doctest::Approx(std::min(sd.da(rho), sd.a(rho) / rho)));
    CHECK(std::max(e1, e2) == doctest::Approx(std::max(sd.da(rho), sd.a(rho) / rho)));
    CHECK(b.stable);
}

TEST_CASE("backbone") {
    const ReducedModel rm = build_reduced_model(builtin_model(BuiltinModel::ShawPierre), 1);
    const auto bb = backbone_curve(rm.slow, linear_grid(1e-6, 0.4, 50));
    CHECK(bb.front().omega == doctest::Approx(rm.spectrum.lambda(1).imag()).epsilon(1e-10));
    for (std::size_t i = 1; i < bb.size(); ++i) CHECK(bb[i].omega > bb[i - 1].omega);
    for (const auto& p : bb) CHECK(p.psi == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("max amplitude of a nonmonotone damping curve") {
    const SlowDynamics sd = synthetic({-0.01, 0.002}, {1.0, 0.0});
    const double er = 0.005;
    const auto roots = max_amplitude(sd, 1.0, er);
    const auto scan = oracle::scan_roots([&](double rho) { return sd.a(rho) * sd.a(rho) - er * er; }, 1e-6, 5.0,
                                         1000000);
    REQUIRE(roots.size() == 3);
    REQUIRE(scan.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(roots[i] == doctest::Approx(scan[i]).epsilon(1e-10));
    // Linear damping with nonzero Im(beta): peak independent of beta.
    const auto p = max_amplitude(synthetic({-0.01, 0.0}, {1.0, 0.5}), 1.0, er);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == doctest::Approx(0.5));
}

TEST_CASE("frf sweep") {
    const ReducedModel rm = build_reduced_model(builtin_model(BuiltinModel::ShawPierre), 1);
    const double rmax = max_amplitude(rm.slow, rm.r(), rm.epsilon()).at(0);
    std::vector<double> grid = linear_grid(rmax / 100, rmax, 100);
    const auto branches = frf_sweep(rm.slow, rm.r(), rm.epsilon(), grid);
    REQUIRE(branches.size() == 2);
    const FRFBranch& minus = branches[0].side < 0 ? branches[0] : branches[1];
    const FRFBranch& plus = branches[0].side < 0 ? branches[1] : branches[0];
    REQUIRE(minus.points.size() == plus.points.size());
    for (std::size_t i = 0; i < plus.points.size(); ++i) {
        const auto& p = plus.points[i];
        const auto& m = minus.points[i];
        const double b = rm.slow.b(p.rho);
        CHECK(p.omega - b == doctest::Approx(-(m.omega - b)).epsilon(1e-12));
        const double scale = std::pow(rm.epsilon() * rm.r(), 2);
        CHECK(std::abs(response_function(rm.slow, rm.r(), rm.epsilon(), p.omega, p.rho)) < 1e-10 * scale);
        // Re-slicing at fixed Omega recovers the point.
        bool found = false;
        for (double r : response_amplitudes(rm.slow, rm.r(), rm.epsilon(), p.omega)) {
            found |= std::abs(r - p.rho) < 1e-8 * p.rho;
        }
        CHECK(found);
    }
    // Radicand zero at the peak: the two branches meet on the backbone.
    CHECK(plus.points.back().omega == doctest::Approx(rm.slow.b(rmax)).epsilon(1e-7));
    CHECK(minus.points.back().omega == doctest::Approx(rm.slow.b(rmax)).epsilon(1e-7));

    grid.push_back(2 * rmax);
    CHECK(frf_sweep(rm.slow, rm.r(), rm.epsilon(), grid).size() == 2);
    CHECK(frf_sweep(rm.slow, rm.r(), rm.epsilon(), {2 * rmax, 3 * rmax}).empty());
}

TEST_CASE("stability boundaries") {
    const auto lin = stability_boundaries(synthetic({-0.02}, {1.0}), linear_grid(0.01, 1.0, 20));
    for (const auto& p : lin) CHECK_FALSE(p.valid);

    const SlowDynamics cons = synthetic({0.0, 0.0}, {1.0, 0.2});
    for (const auto& p : stability_boundaries(cons, linear_grid(0.01, 1.0, 20))) {
        REQUIRE(p.valid);
        CHECK(p.omega_minus == doctest::Approx(cons.b(p.rho)).epsilon(1e-14));
        CHECK(p.omega_plus == doctest::Approx(cons.b(p.rho) + 2 * 0.2 * p.rho * p.rho).epsilon(1e-14));
    }

    // det(J) vanishes on both curves.
    const ReducedModel rm = build_reduced_model(builtin_model(BuiltinModel::ShawPierre), 1);
    for (const auto& p : stability_boundaries(rm.slow, linear_grid(0.05, 0.5, 10))) {
        if (!p.valid) continue;
        CHECK(std::abs(stability(rm.slow, p.rho, p.omega_minus).det) < 1e-12);
        CHECK(std::abs(stability(rm.slow, p.rho, p.omega_plus).det) < 1e-12);
    }
}

TEST_CASE("trace-critical amplitudes") {
    // trace = a' + a/rho = -0.02 + 4 * 0.005 rho^2 -> rho = 1.
    const auto r = trace_critical_amplitudes(synthetic({-0.01, 0.005}, {1.0, 0.0}));
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(trace_critical_amplitudes(synthetic({-0.01}, {1.0})).empty());
}

TEST_CASE("harmonic content") {
    const ReducedModel sp = build_reduced_model(builtin_model(BuiltinModel::ShawPierre), 1);
    const HarmonicSpectrum h = predicted_harmonics(sp, 1.02, 0.3);
    CHECK(h.max_harmonic() == 5);
    for (int j : {0, 2, 4, -2}) CHECK(h.at(j).norm() < 1e-15);
    CHECK(h.at(3).norm() > 1e-4);
    CHECK((h.at(-3) - h.at(3).conjugate()).norm() < 1e-15);

    const ReducedModel ss = build_reduced_model(builtin_model(BuiltinModel::SpringSystem), 1);
    const HarmonicSpectrum hs = predicted_harmonics(ss, 2.0, 0.02);
    CHECK(hs.at(0).norm() > 1e-5);
    CHECK(hs.at(0).imag().norm() < 1e-15);
    CHECK(hs.at(2).norm() > 0.0);
}

TEST_CASE("modal amplitude against the time signal") {
    const ReducedModel rm = build_reduced_model(linear_two_dof(), 1);
    const double omega = 1.0;
    const double rho = response_amplitudes(rm.slow, rm.r(), rm.epsilon(), omega).at(0);
    const HarmonicSpectrum h = predicted_harmonics(rm, omega, rho);
    const MatrixXc e = rm.spectrum.mode_shapes;
    double tmax = 0.0;
    for (int k = 0; k < 4000; ++k) {
        const VectorXd x = reconstruct_state(h, omega, 2 * std::numbers::pi * k / (4000 * omega));
        const VectorXc p = e.fullPivLu().solve(x.head(2).cast<cdouble>());
        tmax = std::max(tmax, std::abs(p[0]));
    }
    CHECK(modal_amplitude(rm.spectrum, h, 1, 1) == doctest::Approx(tmax).epsilon(1e-6));
    CHECK(modal_amplitude(rm.spectrum, h, 1, 2) == 0.0);
    HarmonicSpectrum zero;
    zero.amplitudes[1] = VectorXc::Zero(4);
    CHECK(modal_amplitude(rm.spectrum, zero, 1, 1) == 0.0);
    CHECK(reduced_first_harmonic(rm.spectrum, h, 1) == doctest::Approx(rho).epsilon(1e-12));
}

TEST_CASE("linear grid") {
    const auto g = linear_grid(1.0, 2.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 2.0);
    CHECK(g[2] == doctest::Approx(1.5));
    CHECK(linear_grid(3.0, 4.0, 1) == std::vector<double>{3.0});
}
