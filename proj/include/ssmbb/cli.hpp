#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "ssmbb/oracle.hpp"
#include "ssmbb/ssm_forced.hpp"

namespace ssmbb {

struct RunConfig {
    /// spectrum, check, ssm, frf, backbone, boundaries or verify.
    std::string command;
    /// File path or builtin:<name>.
    std::string model;
    std::map<std::string, double> params;
    int mode = 1;
    /// SSM order 2M+1, 3 or 5.
    int order = 5;
    std::optional<double> epsilon;

    /// Amplitude grid for frf/backbone/boundaries; rho_max <= 0 picks a default.
    double rho_max = 0.0;
    int points = 200;

    double omega_lo = 0.0;
    double omega_hi = 0.0;
    int omega_points = 0;
    std::optional<double> orbit_at;
    std::string orbit_prefix = "orbit";

    bool residual_scan = false;
    /// csv, json or table; empty selects the command default.
    std::string format;
    std::string output;
    int jobs = 1;
    /// Reject models with symmetry/definiteness diagnostics instead of warning.
    bool strict_model = false;

    ResonanceOptions resonance;
    SsmOptions ssm;
    IntegrateOptions integrate;
};

/// Defaults, adjusted by the SSM_BACKBONE_PROFILE environment variable (default, strict, loose).
RunConfig default_config();

/// Executes one command; returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssmbb
