#include "ssmbb/oracle.hpp"

#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/FFT>

namespace ssmbb {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;
using Stepper = odeint::controlled_runge_kutta<odeint::runge_kutta_dopri5<State>>;

/// Advances x from t0 to exactly t1, carrying the step size across calls.
template <class Sys>
void advance(Stepper& stepper, Sys& sys, State& x, double t0, double t1, double& dt, long& steps,
             const IntegrateOptions& opts) {
    double t = t0;
    const double eps_t = 1e-14 * std::max(1.0, std::abs(t1));
    while (t1 - t > eps_t) {
        const double natural = dt;
        bool clamped = false;
        if (t + dt > t1) {
            dt = t1 - t;
            clamped = true;
        }
        const odeint::controlled_step_result res = stepper.try_step(sys, x, t, dt);
        if (res == odeint::success) {
            if (clamped) dt = std::max(dt, natural);
        } else if (dt < eps_t) {
            numerical_error("stiff or singular dynamics (step size underflow)");
        }
        if (++steps > opts.max_steps) numerical_error("stiff or singular dynamics (step limit exceeded)");
    }
}

Stepper make_stepper(const IntegrateOptions& opts) {
    return odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
}

/// Period map in the phase variable tau = Omega t, with monodromy and d/dOmega.
struct FlowResult {
    VectorXd end;
    MatrixXd phi;
    VectorXd d_omega;
};

FlowResult period_flow(const FirstOrderSystem& fos_w, double omega, const VectorXd& x0, const IntegrateOptions& opts) {
    const int d = fos_w.dim();
    auto sys = [&](const State& y, State& dy, double tau) {
        Eigen::Map<const VectorXd> x(y.data(), d);
        Eigen::Map<const MatrixXd> phi(y.data() + d, d, d);
        Eigen::Map<const VectorXd> s(y.data() + d + d * d, d);
        const VectorXd f = fos_w.rhs(tau / omega, x);
        const MatrixXd j = fos_w.jacobian(x);
        Eigen::Map<VectorXd>(dy.data(), d) = f / omega;
        Eigen::Map<MatrixXd>(dy.data() + d, d, d) = j * phi / omega;
        Eigen::Map<VectorXd>(dy.data() + d + d * d, d) = j * s / omega - f / (omega * omega);
    };
    State y(static_cast<std::size_t>(d + d * d + d), 0.0);
    Eigen::Map<VectorXd>(y.data(), d) = x0;
    Eigen::Map<MatrixXd>(y.data() + d, d, d) = MatrixXd::Identity(d, d);
    Stepper stepper = make_stepper(opts);
    double dt = opts.initial_step;
    long steps = 0;
    advance(stepper, sys, y, 0.0, 2.0 * std::numbers::pi, dt, steps, opts);
    FlowResult out;
    out.end = Eigen::Map<VectorXd>(y.data(), d);
    out.phi = Eigen::Map<MatrixXd>(y.data() + d, d, d);
    out.d_omega = Eigen::Map<VectorXd>(y.data() + d + d * d, d);
    return out;
}

void set_floquet(PeriodicOrbit& orbit, const MatrixXd& phi) {
    orbit.monodromy = phi;
    Eigen::EigenSolver<MatrixXd> es(phi, false);
    orbit.floquet_multipliers = es.eigenvalues();
}

}  // namespace

Trajectory integrate(const FirstOrderSystem& fos, const VectorXd& x0, const std::vector<double>& times,
                     const IntegrateOptions& opts) {
    const int d = fos.dim();
    if (x0.size() != d) model_error("initial state has wrong dimension");
    auto sys = [&](const State& y, State& dy, double t) {
        Eigen::Map<VectorXd>(dy.data(), d) = fos.rhs(t, Eigen::Map<const VectorXd>(y.data(), d));
    };
    State y(x0.data(), x0.data() + d);
    Stepper stepper = make_stepper(opts);
    double dt = opts.initial_step;
    long steps = 0;
    Trajectory out;
    double t = times.empty() ? 0.0 : times.front();
    for (double target : times) {
        if (target < t) model_error("integration output times must be nondecreasing");
        advance(stepper, sys, y, t, target, dt, steps, opts);
        t = target;
        out.t.push_back(t);
        out.x.push_back(Eigen::Map<VectorXd>(y.data(), d));
    }
    return out;
}

bool PeriodicOrbit::stable() const { return max_multiplier() < 1.0; }

double PeriodicOrbit::max_multiplier() const {
    double m = 0.0;
    for (int i = 0; i < floquet_multipliers.size(); ++i) m = std::max(m, std::abs(floquet_multipliers[i]));
    return m;
}

void sample_orbit(const FirstOrderSystem& fos, PeriodicOrbit& orbit, int samples, const IntegrateOptions& opts) {
    const FirstOrderSystem fw = fos.with_frequency(orbit.omega);
    std::vector<double> times;
    for (int k = 0; k < samples; ++k) times.push_back(orbit.period * k / samples);
    orbit.samples = integrate(fw, orbit.initial_state, times, opts).x;
}

PeriodicOrbit find_periodic_orbit(const FirstOrderSystem& fos, double omega, const VectorXd& x_guess,
                                  const ShootingOptions& opts) {
    if (!fos.forcing.is_single_harmonic()) model_error("shooting requires single-harmonic forcing");
    if (!(omega > 0.0)) model_error("forcing frequency must be positive");
    const FirstOrderSystem fw = fos.with_frequency(omega);
    const int d = fos.dim();
    PeriodicOrbit orbit;
    orbit.omega = omega;
    orbit.period = 2.0 * std::numbers::pi / omega;
    VectorXd x = x_guess;
    for (int it = 0; it <= opts.max_iterations; ++it) {
        const FlowResult fr = period_flow(fw, omega, x, opts.integrate);
        const VectorXd g = fr.end - x;
        orbit.residual = g.norm();
        if (!std::isfinite(orbit.residual)) break;
        if (orbit.residual < opts.tol) {
            orbit.converged = true;
            orbit.iterations = it;
            orbit.initial_state = x;
            set_floquet(orbit, fr.phi);
            break;
        }
        if (it == opts.max_iterations) break;
        x -= (fr.phi - MatrixXd::Identity(d, d)).partialPivLu().solve(g);
    }
    if (!orbit.converged) numerical_error("no orbit from this guess");
    if (opts.samples > 0) sample_orbit(fos, orbit, opts.samples, opts.integrate);
    return orbit;
}

Branch continue_branch(const FirstOrderSystem& fos, double omega_lo, double omega_hi, const PeriodicOrbit& seed,
                       const ContinuationOptions& opts) {
    if (!seed.converged) model_error("continuation seed orbit is not converged");
    const int d = fos.dim();
    Branch branch;
    branch.orbits.push_back(seed);
    branch.orbits.back().samples.clear();

    auto evaluate = [&](const VectorXd& u, VectorXd& h, MatrixXd& dh, MatrixXd& phi) {
        const double om = u[d];
        const FlowResult fr = period_flow(fos.with_frequency(om), om, u.head(d), opts.shooting.integrate);
        h = fr.end - u.head(d);
        phi = fr.phi;
        dh.resize(d, d + 1);
        dh.leftCols(d) = fr.phi - MatrixXd::Identity(d, d);
        dh.col(d) = fr.d_omega;
    };
    auto tangent_of = [&](const MatrixXd& dh) {
        Eigen::JacobiSVD<MatrixXd> svd(dh, Eigen::ComputeFullV);
        VectorXd t = svd.matrixV().col(d);
        return VectorXd(t / t.norm());
    };

    VectorXd u(d + 1);
    u.head(d) = seed.initial_state;
    u[d] = seed.omega;
    VectorXd h;
    MatrixXd dh, phi;
    evaluate(u, h, dh, phi);
    VectorXd tan = tangent_of(dh);
    if (tan[d] * opts.direction < 0.0) tan = -tan;

    double step = opts.initial_step;
    while (static_cast<int>(branch.orbits.size()) < opts.max_points) {
        const VectorXd pred = u + step * tan;
        VectorXd v = pred;
        bool ok = false;
        for (int k = 0; k <= opts.max_corrector_steps; ++k) {
            evaluate(v, h, dh, phi);
            if (!h.allFinite()) break;
            if (h.norm() < opts.shooting.tol) {
                ok = true;
                if (k <= 2) step = std::min(1.5 * step, opts.max_step);
                break;
            }
            if (k == opts.max_corrector_steps) break;
            MatrixXd sys(d + 1, d + 1);
            sys.topRows(d) = dh;
            sys.row(d) = tan.transpose();
            VectorXd rhs(d + 1);
            rhs.head(d) = h;
            rhs[d] = tan.dot(v - pred);
            v -= sys.partialPivLu().solve(rhs);
        }
        if (!ok) {
            step *= 0.5;
            if (step < opts.min_step) {
                branch.terminated = true;
                branch.status = "corrector failed at minimum step";
                return branch;
            }
            continue;
        }

        VectorXd new_tan = tangent_of(dh);
        if (new_tan.dot(tan) < 0.0) new_tan = -new_tan;
        if (v[d] < omega_lo || v[d] > omega_hi) {
            branch.status = "left frequency range";
            return branch;
        }
        if ((new_tan[d] > 0.0) != (tan[d] > 0.0)) branch.fold_points.push_back(v[d]);
        u = v;
        tan = new_tan;

        PeriodicOrbit orbit;
        orbit.omega = u[d];
        orbit.period = 2.0 * std::numbers::pi / u[d];
        orbit.initial_state = u.head(d);
        orbit.converged = true;
        orbit.residual = h.norm();
        set_floquet(orbit, phi);
        branch.orbits.push_back(std::move(orbit));
    }
    branch.status = "point limit reached";
    return branch;
}

HarmonicSpectrum harmonic_amplitudes(const PeriodicOrbit& orbit, int j_max) {
    const int n = static_cast<int>(orbit.samples.size());
    if (n == 0) model_error("orbit has no samples");
    if (2 * j_max >= n) model_error("too few samples for the requested harmonics");
    const int dim = static_cast<int>(orbit.samples.front().size());
    HarmonicSpectrum h;
    for (int j = -j_max; j <= j_max; ++j) h.amplitudes[j] = VectorXc::Zero(dim);

    Eigen::FFT<double> fft;
    std::vector<double> signal(n);
    std::vector<cdouble> spectrum;
    for (int c = 0; c < dim; ++c) {
        double energy_time = 0.0;
        for (int k = 0; k < n; ++k) {
            signal[k] = orbit.samples[k][c];
            energy_time += signal[k] * signal[k];
        }
        energy_time /= n;
        fft.fwd(spectrum, signal);
        double energy_freq = 0.0;
        for (const cdouble& s : spectrum) energy_freq += std::norm(s);
        energy_freq /= static_cast<double>(n) * n;
        if (std::abs(energy_freq - energy_time) > 1e-8 * std::max(energy_time, 1e-300)) {
            numerical_error("Parseval check failed in harmonic extraction");
        }
        for (int j = -j_max; j <= j_max; ++j) h.amplitudes[j][c] = spectrum[(j + n) % n] / static_cast<double>(n);
    }
    return h;
}

double modal_time_max(const Spectrum<double>& spec, const PeriodicOrbit& orbit, int mode) {
    if (mode < 1 || mode > spec.n_dof) model_error("mode index out of range");
    const auto lu = spec.mode_shapes.partialPivLu();
    double best = 0.0;
    for (const VectorXd& x : orbit.samples) {
        const VectorXc p = lu.solve(VectorXc(x.head(spec.n_dof).cast<cdouble>()));
        best = std::max(best, std::abs(p[mode - 1]));
    }
    return best;
}

}  // namespace ssmbb
