#include "ssmbb/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ssmbb/model_io.hpp"
#include "ssmbb/response.hpp"

namespace ssmbb {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    return fmt::format("{}", v);
}

Json complex_json(const cdouble& z) { return Json::array({z.real(), z.imag()}); }

Json complex_vector_json(const VectorXc& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(complex_json(v[i]));
    return out;
}

/// Evaluates f(0..n-1) on up to `jobs` threads; results keep index order.
template <class T, class F>
std::vector<T> parallel_map(int n, int jobs, F f) {
    std::vector<T> out(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next++; i < n; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = std::clamp(jobs, 1, std::max(n, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

struct Context {
    const RunConfig& cfg;
    MechanicalSystem sys;
    FirstOrderSystem fos;
    std::string hash;
    std::ostream& err;

    int order_m() const { return (cfg.order - 1) / 2; }

    PipelineOptions pipeline() const {
        PipelineOptions p;
        p.order_m = order_m();
        p.resonance = cfg.resonance;
        p.ssm = cfg.ssm;
        return p;
    }

    double tol_near(const Spectrum<double>& spec) const {
        if (cfg.resonance.tol_near > 0.0) return cfg.resonance.tol_near;
        return cfg.resonance.tol_near_factor * std::abs(spec.lambda(cfg.mode).imag());
    }

    void header(std::ostream& os, bool with_epsilon, const std::string& columns) const {
        os << "# command: " << cfg.command << '\n';
        os << "# model: " << sys.name << '\n';
        os << "# model_hash: " << hash << '\n';
        os << "# mode: " << cfg.mode << '\n';
        os << "# order: " << cfg.order << '\n';
        if (with_epsilon) os << "# epsilon: " << num(fos.forcing.epsilon) << '\n';
        os << "# tol_abs: " << num(cfg.resonance.tol_abs) << '\n';
        if (cfg.resonance.tol_near > 0.0) {
            os << "# tol_near: " << num(cfg.resonance.tol_near) << '\n';
        } else {
            os << "# tol_near_factor: " << num(cfg.resonance.tol_near_factor) << '\n';
        }
        os << "# small_denominator: " << num(cfg.ssm.small_denominator) << '\n';
        os << columns << '\n';
    }
};

/// Spectrum, SSM and slow flow; used when the model may be unforced.
struct Autonomous {
    Spectrum<double> spectrum;
    SSMCoefficients<double> ssm;
    SlowDynamics slow;
    std::optional<ForcedSSM> forced;
};

Autonomous autonomous_part(const Context& ctx) {
    if (!ctx.fos.forcing.empty()) {
        ReducedModel rm = build_reduced_model(ctx.fos, ctx.cfg.mode, ctx.pipeline());
        return {rm.spectrum, rm.ssm, rm.slow, rm.forced};
    }
    const PipelineOptions p = ctx.pipeline();
    Autonomous out;
    out.spectrum = compute_spectrum(ctx.fos, p.spectrum);
    if (ctx.cfg.mode < 1 || ctx.cfg.mode > out.spectrum.n_dof) model_error("mode index out of range");
    ResonanceOptions ropts = p.resonance;
    ropts.expansion_order = std::max(ropts.expansion_order, 2 * p.order_m + 1);
    const ResonanceReport rep = check_nonresonance(out.spectrum, ctx.cfg.mode, ropts);
    if (!rep.ok()) resonance_error("nonresonance check failed for mode " + std::to_string(ctx.cfg.mode));
    out.ssm = compute_ssm_general(diagonalize_nonlinearity(ctx.fos, out.spectrum), out.spectrum, ctx.cfg.mode,
                                  p.order_m, p.ssm);
    out.slow = slow_dynamics(out.ssm);
    return out;
}

std::vector<double> rho_grid(double rho_max, int points) {
    if (points < 1) model_error("--points must be positive");
    if (!(rho_max > 0.0)) model_error("amplitude range must be positive");
    return linear_grid(rho_max / points, rho_max, points);
}

double default_rho_max(const Context& ctx, const Autonomous& a) {
    if (ctx.cfg.rho_max > 0.0) return ctx.cfg.rho_max;
    return validity_radius(a.ssm, ctx.fos).radius;
}

int cmd_spectrum(const Context& ctx, std::ostream& os) {
    const Spectrum<double> spec = compute_spectrum(ctx.fos);
    const int n = spec.n_dof;
    if (ctx.cfg.format == "json") {
        Json doc;
        doc["model"] = ctx.sys.name;
        doc["model_hash"] = ctx.hash;
        Json modes = Json::array();
        for (int j = 1; j <= n; ++j) {
            const cdouble l = spec.lambda(j);
            modes.push_back({{"mode", j},
                             {"eigenvalue", complex_json(l)},
                             {"frequency", std::abs(l)},
                             {"damped_frequency", l.imag()},
                             {"damping_ratio", -l.real() / std::abs(l)}});
        }
        doc["modes"] = modes;
        os << doc.dump(2) << '\n';
        return 0;
    }
    os << fmt::format("{:>4} {:>24} {:>24} {:>24} {:>24}\n", "mode", "re(lambda)", "im(lambda)", "|lambda|",
                      "damping_ratio");
    for (int j = 1; j <= n; ++j) {
        const cdouble l = spec.lambda(j);
        os << fmt::format("{:>4} {:>24.17g} {:>24.17g} {:>24.17g} {:>24.17g}\n", j, l.real(), l.imag(), std::abs(l),
                          -l.real() / std::abs(l));
    }
    return 0;
}

int cmd_check(const Context& ctx, std::ostream& os) {
    const Spectrum<double> spec = compute_spectrum(ctx.fos);
    if (ctx.cfg.mode < 1 || ctx.cfg.mode > spec.n_dof) model_error("mode index out of range");
    ResonanceOptions ropts = ctx.cfg.resonance;
    ropts.expansion_order = std::max(ropts.expansion_order, ctx.cfg.order);
    const ResonanceReport rep = check_nonresonance(spec, ctx.cfg.mode, ropts);
    if (ctx.cfg.format == "json") {
        Json doc;
        doc["model"] = ctx.sys.name;
        doc["model_hash"] = ctx.hash;
        doc["mode"] = rep.master_index;
        doc["spectral_quotient"] = rep.quotient.value;
        doc["quotient_capped"] = rep.quotient.capped;
        doc["max_order"] = rep.max_order;
        doc["inner_ok"] = rep.inner_ok;
        doc["outer_ok"] = rep.outer_ok;
        doc["near_ok"] = rep.near_ok;
        Json inner = Json::array(), outer = Json::array(), near = Json::array();
        for (const auto& v : rep.inner_violations) inner.push_back({{"m", v.m}, {"j", v.slot}});
        for (const auto& v : rep.outer_violations) outer.push_back({{"m", v.m}, {"j", v.slot}});
        for (const auto& v : rep.near_violations) near.push_back({{"m1", v.m1}, {"m2", v.m2}, {"j", v.slot}});
        doc["inner_violations"] = inner;
        doc["outer_violations"] = outer;
        doc["near_violations"] = near;
        os << doc.dump(2) << '\n';
    } else {
        auto status = [](bool ok) { return ok ? "ok" : "VIOLATED"; };
        os << "model: " << ctx.sys.name << " (" << ctx.hash << ")\n";
        os << "master mode: " << rep.master_index << "  lambda = " << num(spec.lambda(ctx.cfg.mode).real()) << " + "
           << num(spec.lambda(ctx.cfg.mode).imag()) << "i\n";
        os << "spectral quotient: " << rep.quotient.value << (rep.quotient.capped ? " (capped)" : "") << '\n';
        os << "orders checked: 1.." << rep.max_order << '\n';
        os << "tol_abs: " << num(ropts.tol_abs) << "  tol_near: " << num(ctx.tol_near(spec)) << '\n';
        os << "inner nonresonance: " << status(rep.inner_ok) << "  margin " << num(rep.inner_margin) << '\n';
        for (const auto& v : rep.inner_violations) os << "  m=" << v.m << " j=" << v.slot << '\n';
        os << "outer nonresonance: " << status(rep.outer_ok) << "  margin " << num(rep.outer_margin) << '\n';
        for (const auto& v : rep.outer_violations) os << "  m=" << v.m << " j=" << v.slot << '\n';
        os << "near-resonance: " << status(rep.near_ok) << "  margin " << num(rep.near_margin) << '\n';
        for (const auto& v : rep.near_violations) {
            os << "  (m1, m2, j) = (" << v.m1 << ", " << v.m2 << ", " << v.slot << ")\n";
        }
    }
    return rep.ok() ? 0 : 2;
}

int cmd_ssm(const Context& ctx, std::ostream& os) {
    const Autonomous a = autonomous_part(ctx);
    if (ctx.cfg.residual_scan) {
        ctx.header(os, false, "abs_z,residual,relative_residual");
        constexpr int kAngles = 8;
        const std::vector<double> mags = [] {
            std::vector<double> m;
            for (int i = 0; i < 61; ++i) m.push_back(std::pow(10.0, -4.0 + 5.0 * i / 60.0));
            return m;
        }();
        const auto rows = parallel_map<std::pair<double, double>>(
            static_cast<int>(mags.size()), ctx.cfg.jobs, [&](int i) {
                double res = 0.0, rel = 0.0;
                for (int k = 0; k < kAngles; ++k) {
                    const cdouble z = std::polar(mags[i], 2.0 * std::numbers::pi * k / kAngles);
                    const double r = invariance_residual(a.ssm, ctx.fos, z);
                    res = std::max(res, r);
                    rel = std::max(rel, r / std::abs(reduced_dynamics(a.ssm, z)));
                }
                return std::pair{res, rel};
            });
        for (std::size_t i = 0; i < mags.size(); ++i) {
            os << num(mags[i]) << ',' << num(rows[i].first) << ',' << num(rows[i].second) << '\n';
        }
        return 0;
    }
    Json doc;
    doc["model"] = ctx.sys.name;
    doc["model_hash"] = ctx.hash;
    doc["mode"] = ctx.cfg.mode;
    doc["order"] = ctx.cfg.order;
    doc["lambda"] = complex_json(a.ssm.lambda_l);
    Json beta = Json::array();
    for (const auto& b : a.ssm.beta) beta.push_back(complex_json(b));
    doc["beta"] = beta;
    Json w = Json::array();
    for (const auto& [mn, v] : a.ssm.w0) {
        w.push_back({{"m", mn.first}, {"n", mn.second}, {"coefficient", complex_vector_json(v)}});
    }
    doc["w0"] = w;
    doc["validity_radius"] = validity_radius(a.ssm, ctx.fos).radius;
    if (a.forced) {
        doc["epsilon"] = a.forced->epsilon;
        doc["omega"] = a.forced->omega;
        doc["r"] = a.forced->r;
        doc["r_c"] = complex_json(a.forced->r_c);
        doc["w_plus"] = complex_vector_json(a.forced->w_plus);
        doc["w_minus"] = complex_vector_json(a.forced->w_minus);
    }
    os << doc.dump(2) << '\n';
    return 0;
}

int cmd_frf(const Context& ctx, std::ostream& os) {
    const ReducedModel rm = build_reduced_model(ctx.fos, ctx.cfg.mode, ctx.pipeline());
    const double eps = rm.epsilon();
    const double r = rm.r();
    const std::vector<double> peaks = max_amplitude(rm.slow, r, eps);
    double rho_max = ctx.cfg.rho_max;
    if (!(rho_max > 0.0)) {
        rho_max = peaks.empty() ? validity_radius(rm.ssm, rm.fos).radius : peaks.front();
    }
    std::vector<double> grid = rho_grid(rho_max, ctx.cfg.points);
    for (double p : peaks) {
        if (p < rho_max && std::find(grid.begin(), grid.end(), p) == grid.end()) grid.push_back(p);
    }
    std::sort(grid.begin(), grid.end());

    std::vector<ResponsePoint> rows;
    const std::vector<FRFBranch> branches = frf_sweep(rm.slow, r, eps, grid);
    for (const auto& b : branches) {
        if (b.side < 0) rows.insert(rows.end(), b.points.begin(), b.points.end());
    }
    for (auto it = branches.rbegin(); it != branches.rend(); ++it) {
        if (it->side > 0) rows.insert(rows.end(), it->points.rbegin(), it->points.rend());
    }

    const auto amps = parallel_map<std::array<double, 3>>(static_cast<int>(rows.size()), ctx.cfg.jobs, [&](int i) {
        const HarmonicSpectrum h = predicted_harmonics(rm, rows[i].omega, rows[i].rho);
        return std::array<double, 3>{modal_amplitude(rm.spectrum, h, ctx.cfg.mode, 1),
                                     modal_amplitude(rm.spectrum, h, ctx.cfg.mode, 2),
                                     modal_amplitude(rm.spectrum, h, ctx.cfg.mode, 3)};
    });
    ctx.header(os, true, "omega,rho,psi,stable,modal_amp_1omega,modal_amp_2omega,modal_amp_3omega");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& p = rows[i];
        os << num(p.omega) << ',' << num(p.rho) << ',' << num(p.psi) << ',' << (p.stable ? 1 : 0) << ','
           << num(amps[i][0]) << ',' << num(amps[i][1]) << ',' << num(amps[i][2]) << '\n';
    }
    return 0;
}

int cmd_backbone(const Context& ctx, std::ostream& os) {
    const Autonomous a = autonomous_part(ctx);
    const std::vector<double> grid = rho_grid(default_rho_max(ctx, a), ctx.cfg.points);
    ctx.header(os, false, "rho,omega_max");
    for (const auto& p : backbone_curve(a.slow, grid)) os << num(p.rho) << ',' << num(p.omega) << '\n';
    return 0;
}

int cmd_boundaries(const Context& ctx, std::ostream& os) {
    const Autonomous a = autonomous_part(ctx);
    const std::vector<double> grid = rho_grid(default_rho_max(ctx, a), ctx.cfg.points);
    ctx.header(os, false, "rho,omega_crit_minus,omega_crit_plus");
    for (const auto& p : stability_boundaries(a.slow, grid)) {
        os << num(p.rho) << ',' << num(p.valid ? p.omega_minus : kNan) << ',' << num(p.valid ? p.omega_plus : kNan)
           << '\n';
    }
    return 0;
}

struct VerifyRow {
    double omega = 0.0;
    double rho_ssm = 0.0;
    double rho_oracle = kNan;
    double rel_error = kNan;
    bool stable_ssm = false;
    int stable_oracle = -1;
    double time_max = kNan;
};

void dump_orbit(const Context& ctx, const ReducedModel& rm, double omega, const ShootingOptions& shoot) {
    const std::vector<double> roots = response_amplitudes(rm.slow, rm.r(), rm.epsilon(), omega);
    for (std::size_t k = 0; k < roots.size(); ++k) {
        const VectorXd seed = reconstruct_state(predicted_harmonics(rm, omega, roots[k]), omega, 0.0);
        PeriodicOrbit orbit;
        try {
            orbit = find_periodic_orbit(rm.fos, omega, seed, shoot);
        } catch (const SsmError& e) {
            ctx.err << "warning: orbit " << k + 1 << " at omega " << num(omega) << ": " << e.what() << '\n';
            continue;
        }
        const std::string base = fmt::format("{}_{}", ctx.cfg.orbit_prefix, k + 1);
        std::ofstream ts(base + "_time.csv");
        std::ofstream fs(base + "_fft.csv");
        if (!ts || !fs) model_error("cannot write orbit files with prefix '" + ctx.cfg.orbit_prefix + "'");
        ctx.header(ts, true, "");
        ts << "# omega: " << num(omega) << "\n# rho_ssm: " << num(roots[k]) << "\nt";
        const int d = rm.fos.dim();
        for (int i = 1; i <= d; ++i) ts << ",x" << i;
        ts << '\n';
        const int n = static_cast<int>(orbit.samples.size());
        for (int s = 0; s < n; ++s) {
            ts << num(orbit.period * s / n);
            for (int i = 0; i < d; ++i) ts << ',' << num(orbit.samples[s][i]);
            ts << '\n';
        }
        ctx.header(fs, true, "harmonic,coordinate,re,im,abs");
        const HarmonicSpectrum h = harmonic_amplitudes(orbit, std::min(16, n / 2 - 1));
        for (const auto& [j, v] : h.amplitudes) {
            if (j < 0) continue;
            for (int i = 0; i < d; ++i) {
                fs << j << ',' << i + 1 << ',' << num(v[i].real()) << ',' << num(v[i].imag()) << ','
                   << num(std::abs(v[i])) << '\n';
            }
        }
    }
}

int cmd_verify(const Context& ctx, std::ostream& os) {
    if (ctx.cfg.omega_points < 1 || !(ctx.cfg.omega_hi >= ctx.cfg.omega_lo) || !(ctx.cfg.omega_lo > 0.0)) {
        model_error("verify needs --omega-range A:B:P with 0 < A <= B and P >= 1");
    }
    const ReducedModel rm = build_reduced_model(ctx.fos, ctx.cfg.mode, ctx.pipeline());
    ShootingOptions shoot;
    shoot.integrate = ctx.cfg.integrate;
    const std::vector<double> omegas = linear_grid(ctx.cfg.omega_lo, ctx.cfg.omega_hi, ctx.cfg.omega_points);

    const auto per_omega = parallel_map<std::vector<VerifyRow>>(
        static_cast<int>(omegas.size()), ctx.cfg.jobs, [&](int i) {
            const double omega = omegas[i];
            std::vector<VerifyRow> rows;
            for (double rho : response_amplitudes(rm.slow, rm.r(), rm.epsilon(), omega)) {
                VerifyRow row;
                row.omega = omega;
                row.rho_ssm = rho;
                row.stable_ssm = stability(rm.slow, rho, omega).stable;
                const VectorXd seed = reconstruct_state(predicted_harmonics(rm, omega, rho), omega, 0.0);
                try {
                    const PeriodicOrbit orbit = find_periodic_orbit(rm.fos, omega, seed, shoot);
                    row.rho_oracle = reduced_first_harmonic(rm.spectrum, harmonic_amplitudes(orbit, 3), ctx.cfg.mode);
                    row.rel_error = std::abs(rho - row.rho_oracle) / row.rho_oracle;
                    row.stable_oracle = orbit.stable() ? 1 : 0;
                    row.time_max = modal_time_max(rm.spectrum, orbit, ctx.cfg.mode);
                } catch (const SsmError& e) {
                    if (e.kind() != ErrorKind::Numerical) throw;
                }
                rows.push_back(row);
            }
            return rows;
        });

    ctx.header(os, true, "omega,rho_ssm,rho_oracle,rel_error,stable_ssm,stable_oracle,oracle_time_max");
    int failed = 0;
    for (const auto& rows : per_omega) {
        for (const auto& r : rows) {
            if (r.stable_oracle < 0) ++failed;
            os << num(r.omega) << ',' << num(r.rho_ssm) << ',' << num(r.rho_oracle) << ',' << num(r.rel_error) << ','
               << (r.stable_ssm ? 1 : 0) << ',' << (r.stable_oracle < 0 ? "nan" : std::to_string(r.stable_oracle))
               << ',' << num(r.time_max) << '\n';
        }
    }
    if (failed > 0) ctx.err << "warning: shooting did not converge for " << failed << " response point(s)\n";
    if (ctx.cfg.orbit_at) dump_orbit(ctx, rm, *ctx.cfg.orbit_at, shoot);
    return 0;
}

int dispatch(const Context& ctx, std::ostream& os) {
    const std::string& c = ctx.cfg.command;
    if (c == "spectrum") return cmd_spectrum(ctx, os);
    if (c == "check") return cmd_check(ctx, os);
    if (c == "ssm") return cmd_ssm(ctx, os);
    if (c == "frf") return cmd_frf(ctx, os);
    if (c == "backbone") return cmd_backbone(ctx, os);
    if (c == "boundaries") return cmd_boundaries(ctx, os);
    if (c == "verify") return cmd_verify(ctx, os);
    model_error("unknown command '" + c + "'");
}

void validate_config(const RunConfig& cfg) {
    if (cfg.order != 3 && cfg.order != 5) model_error("--order must be 3 or 5");
    if (cfg.points < 1) model_error("--points must be positive");
    if (cfg.jobs < 1) model_error("--jobs must be positive");
    if (!(cfg.resonance.tol_abs > 0.0)) model_error("--tol-abs must be positive");
    if (!(cfg.ssm.small_denominator > 0.0)) model_error("--small-denominator must be positive");
    if (cfg.epsilon && !(*cfg.epsilon >= 0.0)) model_error("--eps must be nonnegative");
    if (!cfg.format.empty() && cfg.format != "csv" && cfg.format != "json" && cfg.format != "table") {
        model_error("--format must be csv, json or table");
    }
}

}  // namespace

RunConfig default_config() {
    RunConfig cfg;
    const char* profile = std::getenv("SSM_BACKBONE_PROFILE");
    const std::string p = profile ? profile : "default";
    if (p == "strict") {
        cfg.resonance.tol_abs = 1e-4;
        cfg.resonance.tol_near_factor = 0.1;
        cfg.ssm.small_denominator = 1e-2;
        cfg.integrate.rel_tol = 1e-11;
        cfg.integrate.abs_tol = 1e-13;
    } else if (p == "loose") {
        cfg.resonance.tol_abs = 1e-8;
        cfg.resonance.tol_near_factor = 0.01;
        cfg.ssm.small_denominator = 1e-4;
        cfg.integrate.rel_tol = 1e-8;
        cfg.integrate.abs_tol = 1e-10;
    }
    return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        validate_config(cfg);
        std::vector<std::string> warnings;
        MechanicalSystem sys = load_model(cfg.model, cfg.params, &warnings);
        for (const auto& w : validate_model(sys)) {
            if (cfg.strict_model) model_error(w);
            warnings.push_back(w);
        }
        for (const auto& w : warnings) err << "warning: " << w << '\n';
        // The hash names the model as loaded; an --eps override shows up in the epsilon line.
        const std::string hash = model_hash(sys);
        if (cfg.epsilon) {
            if (sys.forcing.empty()) model_error("--eps given but the model has no forcing");
            sys.forcing = sys.forcing.with_epsilon(*cfg.epsilon);
        }
        Context ctx{cfg, sys, first_order_form(sys), hash, err};

        std::ostringstream buf;
        const int code = dispatch(ctx, buf);
        if (cfg.output.empty()) {
            out << buf.str();
        } else {
            std::ofstream file(cfg.output, std::ios::binary);
            if (!file) model_error("cannot write '" + cfg.output + "'");
            file << buf.str();
        }
        return code;
    } catch (const SsmError& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Numerical);
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg = default_config();
    CLI::App app{"Spectral submanifold reduction and forced response of nonlinear mechanical systems",
                 "ssm-backbone"};
    app.require_subcommand(1);

    std::vector<std::string> param_args;
    std::string omega_range;
    double tol_abs = cfg.resonance.tol_abs;
    double tol_near = cfg.resonance.tol_near;
    double small_den = cfg.ssm.small_denominator;
    double eps = kNan;
    double orbit_at = kNan;

    struct Spec {
        const char* name;
        const char* help;
    };
    const Spec specs[] = {
        {"spectrum", "eigenvalues, frequencies and damping ratios"},
        {"check", "nonresonance conditions for a master mode"},
        {"ssm", "SSM coefficients as JSON, or the invariance residual scan"},
        {"frf", "forced response curve as CSV"},
        {"backbone", "backbone curve as CSV"},
        {"boundaries", "stability boundaries as CSV"},
        {"verify", "compare the SSM prediction with periodic orbits from shooting"},
    };
    for (const auto& s : specs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("model", cfg.model, "model file or builtin:<name>")->required();
        sub->add_option("--param", param_args, "built-in model parameter name=value");
        sub->add_option("--mode", cfg.mode, "master mode (1-based)");
        sub->add_option("--order", cfg.order, "SSM order, 3 or 5");
        sub->add_option("--eps", eps, "forcing amplitude");
        sub->add_option("--rho-max", cfg.rho_max, "largest reduced amplitude");
        sub->add_option("--points", cfg.points, "amplitude grid size");
        sub->add_option("--omega-range", omega_range, "A:B:P frequency grid for verify");
        sub->add_option("--orbit-at", orbit_at, "dump the orbits at this frequency");
        sub->add_option("--orbit-out", cfg.orbit_prefix, "file prefix for --orbit-at");
        sub->add_flag("--residual-scan", cfg.residual_scan, "emit (|z|, residual) CSV");
        sub->add_option("--format", cfg.format, "csv, json or table");
        sub->add_option("-o,--output", cfg.output, "output file");
        sub->add_option("--jobs", cfg.jobs, "worker threads for sweeps");
        sub->add_option("--tol-abs", tol_abs, "absolute nonresonance tolerance");
        sub->add_option("--tol-near", tol_near, "absolute near-resonance tolerance");
        sub->add_option("--small-denominator", small_den, "relative small-denominator threshold");
        sub->add_flag("--strict-model", cfg.strict_model, "treat model diagnostics as errors");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    for (const auto& p : param_args) {
        const auto eq = p.find('=');
        double value = 0.0;
        try {
            if (eq == std::string::npos) throw std::invalid_argument(p);
            std::size_t used = 0;
            value = std::stod(p.substr(eq + 1), &used);
            if (used != p.size() - eq - 1) throw std::invalid_argument(p);
        } catch (const std::exception&) {
            err << "error: --param expects name=value, got '" << p << "'\n";
            return 1;
        }
        cfg.params[p.substr(0, eq)] = value;
    }
    if (!omega_range.empty()) {
        double a = 0.0, b = 0.0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(omega_range);
        if (!(in >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || !in.eof()) {
            err << "error: --omega-range expects A:B:P, got '" << omega_range << "'\n";
            return 1;
        }
        cfg.omega_lo = a;
        cfg.omega_hi = b;
        cfg.omega_points = n;
    }
    if (!std::isnan(eps)) cfg.epsilon = eps;
    if (!std::isnan(orbit_at)) cfg.orbit_at = orbit_at;
    cfg.resonance.tol_abs = tol_abs;
    cfg.resonance.tol_near = tol_near;
    cfg.ssm.small_denominator = small_den;
    return run(cfg, out, err);
}

}  // namespace ssmbb
