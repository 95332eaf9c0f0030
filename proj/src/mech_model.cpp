#include "ssmbb/mech_model.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace ssmbb {

ForcingDefinition ForcingDefinition::single_harmonic(const VectorXd& f, double epsilon, double omega) {
    ForcingDefinition out;
    out.epsilon = epsilon;
    out.base_frequencies = {omega};
    VectorXc half = f.cast<cdouble>() * 0.5;
    out.harmonics.push_back({{1}, half});
    out.harmonics.push_back({{-1}, half});
    return out;
}

bool ForcingDefinition::is_single_harmonic() const {
    if (base_frequencies.size() != 1 || harmonics.size() != 2) return false;
    std::set<int> ks;
    for (const auto& h : harmonics) {
        if (h.wave_vector.size() != 1) return false;
        ks.insert(h.wave_vector[0]);
    }
    return ks == std::set<int>{-1, 1};
}

VectorXd ForcingDefinition::single_harmonic_vector() const {
    if (!is_single_harmonic()) model_error("forcing is not single-harmonic");
    for (const auto& h : harmonics) {
        if (h.wave_vector[0] == 1) return 2.0 * h.amplitude.real();
    }
    model_error("forcing is not single-harmonic");
}

double ForcingDefinition::frequency() const {
    if (base_frequencies.size() != 1) model_error("forcing has more than one base frequency");
    return base_frequencies[0];
}

VectorXc ForcingDefinition::evaluate_complex(double t) const {
    if (harmonics.empty()) return {};
    VectorXc out = VectorXc::Zero(harmonics.front().amplitude.size());
    for (const auto& h : harmonics) {
        double phase = 0.0;
        for (std::size_t i = 0; i < h.wave_vector.size(); ++i) {
            phase += h.wave_vector[i] * base_frequencies[i] * t;
        }
        out += h.amplitude * std::exp(cdouble(0.0, phase));
    }
    return epsilon * out;
}

ForcingDefinition ForcingDefinition::with_frequency(double omega) const {
    if (base_frequencies.size() != 1) model_error("with_frequency requires a single base frequency");
    ForcingDefinition out = *this;
    out.base_frequencies[0] = omega;
    return out;
}

ForcingDefinition ForcingDefinition::with_epsilon(double eps) const {
    ForcingDefinition out = *this;
    out.epsilon = eps;
    return out;
}

MechanicalSystem MechanicalSystem::zeros(int n_dof) {
    MechanicalSystem s;
    s.n_dof = n_dof;
    s.mass = MatrixXd::Zero(n_dof, n_dof);
    s.damping = MatrixXd::Zero(n_dof, n_dof);
    s.gyroscopic = MatrixXd::Zero(n_dof, n_dof);
    s.stiffness = MatrixXd::Zero(n_dof, n_dof);
    s.follower = MatrixXd::Zero(n_dof, n_dof);
    s.nonlinearity = PolynomialField<double>(2 * n_dof, n_dof);
    return s;
}

VectorXd FirstOrderSystem::forcing_at(double t) const {
    VectorXd out = VectorXd::Zero(dim());
    if (forcing.harmonics.empty() || forcing.epsilon == 0.0) return out;
    VectorXc acc = VectorXc::Zero(dim());
    for (std::size_t h = 0; h < lifted_forcing.size(); ++h) {
        double phase = 0.0;
        const auto& k = forcing.harmonics[h].wave_vector;
        for (std::size_t i = 0; i < k.size(); ++i) phase += k[i] * forcing.base_frequencies[i] * t;
        acc += lifted_forcing[h] * std::exp(cdouble(0.0, phase));
    }
    return forcing.epsilon * acc.real();
}

VectorXd FirstOrderSystem::rhs(double t, const VectorXd& x) const {
    VectorXd dx = a_matrix * x;
    if (!nonlinearity.empty()) dx += nonlinearity.evaluate<double>(x);
    dx += forcing_at(t);
    return dx;
}

MatrixXd FirstOrderSystem::jacobian(const VectorXd& x) const {
    MatrixXd j = a_matrix;
    if (!nonlinearity.empty()) j += nonlinearity.jacobian<double>(x);
    return j;
}

VectorXc FirstOrderSystem::g_plus() const {
    if (!forcing.is_single_harmonic()) model_error("forcing is not single-harmonic");
    for (std::size_t h = 0; h < lifted_forcing.size(); ++h) {
        if (forcing.harmonics[h].wave_vector[0] == 1) return lifted_forcing[h];
    }
    model_error("forcing is not single-harmonic");
}

FirstOrderSystem FirstOrderSystem::with_frequency(double omega) const {
    FirstOrderSystem out = *this;
    out.forcing = forcing.with_frequency(omega);
    return out;
}

FirstOrderSystem FirstOrderSystem::with_epsilon(double eps) const {
    FirstOrderSystem out = *this;
    out.forcing = forcing.with_epsilon(eps);
    return out;
}

FirstOrderSystem first_order_form(const MechanicalSystem& sys, const FirstOrderOptions& opts) {
    const int n = sys.n_dof;
    if (n <= 0 || sys.mass.rows() != n || sys.mass.cols() != n) model_error("mass matrix has wrong shape");

    Eigen::JacobiSVD<MatrixXd> svd(sys.mass);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0 || sv(n - 1) == 0.0 || sv(0) / sv(n - 1) > opts.max_condition) {
        model_error("mass matrix not invertible");
    }

    FirstOrderSystem fos;
    fos.n_dof = n;
    fos.mass = sys.mass;
    fos.mass_inverse = sys.mass.inverse();
    const MatrixXd& minv = fos.mass_inverse;

    fos.a_matrix = MatrixXd::Zero(2 * n, 2 * n);
    fos.a_matrix.topRightCorner(n, n) = MatrixXd::Identity(n, n);
    fos.a_matrix.bottomLeftCorner(n, n) = -minv * (sys.stiffness + sys.follower);
    fos.a_matrix.bottomRightCorner(n, n) = -minv * (sys.damping + sys.gyroscopic);

    // f_nlin sits on the left-hand side, hence the minus sign after inversion.
    MatrixXd lift = MatrixXd::Zero(2 * n, n);
    lift.bottomRows(n) = -minv;
    fos.nonlinearity = sys.nonlinearity.transform_outputs<double>(lift);

    fos.forcing = sys.forcing;
    for (const auto& h : sys.forcing.harmonics) {
        VectorXc g = VectorXc::Zero(2 * n);
        g.tail(n) = minv.cast<cdouble>() * h.amplitude;
        fos.lifted_forcing.push_back(g);
    }
    return fos;
}

namespace {

double max_abs(const MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double min_sym_eigenvalue(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

std::vector<std::string> validate_model(const MechanicalSystem& sys, double tol) {
    std::vector<std::string> diags;
    const int n = sys.n_dof;
    auto shape_ok = [&](const MatrixXd& m, const char* what) {
        if (m.rows() != n || m.cols() != n) {
            diags.push_back(std::string(what) + " has wrong shape");
            return false;
        }
        return true;
    };
    if (n <= 0) {
        diags.emplace_back("dof must be positive");
        return diags;
    }

    if (shape_ok(sys.mass, "mass")) {
        if (max_abs(sys.mass - sys.mass.transpose()) > tol) diags.emplace_back("mass not symmetric");
        if (min_sym_eigenvalue(sys.mass) <= tol) diags.emplace_back("mass not positive definite");
    }
    if (shape_ok(sys.stiffness, "stiffness")) {
        if (max_abs(sys.stiffness - sys.stiffness.transpose()) > tol) {
            diags.emplace_back("stiffness not symmetric");
        }
        if (min_sym_eigenvalue(sys.stiffness) < -tol) {
            diags.emplace_back("stiffness not positive semi-definite");
        }
    }
    if (shape_ok(sys.damping, "damping")) {
        if (max_abs(sys.damping - sys.damping.transpose()) > tol) diags.emplace_back("damping not symmetric");
        if (min_sym_eigenvalue(sys.damping) < -tol) {
            diags.emplace_back("damping not positive semi-definite");
        }
    }
    if (shape_ok(sys.gyroscopic, "gyroscopic") &&
        max_abs(sys.gyroscopic + sys.gyroscopic.transpose()) > tol) {
        diags.emplace_back("gyroscopic not skew-symmetric");
    }
    if (shape_ok(sys.follower, "follower") && max_abs(sys.follower + sys.follower.transpose()) > tol) {
        diags.emplace_back("follower not skew-symmetric");
    }

    if (sys.nonlinearity.n_vars() != 2 * n || sys.nonlinearity.n_out() != n) {
        diags.emplace_back("nonlinearity has wrong dimensions");
    } else if (!sys.nonlinearity.empty() && sys.nonlinearity.min_degree() < 2) {
        diags.emplace_back("nonlinearity has a monomial of degree below 2");
    }

    const auto& fd = sys.forcing;
    if (fd.epsilon < 0.0) diags.emplace_back("forcing epsilon negative");
    for (double w : fd.base_frequencies) {
        if (!(w > 0.0)) diags.emplace_back("forcing base frequency not positive");
    }
    for (const auto& h : fd.harmonics) {
        if (static_cast<int>(h.wave_vector.size()) != fd.n_frequencies()) {
            diags.emplace_back("forcing wave vector length mismatch");
            continue;
        }
        if (h.amplitude.size() != n) {
            diags.emplace_back("forcing amplitude has wrong length");
            continue;
        }
        std::vector<int> neg(h.wave_vector.size());
        for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -h.wave_vector[i];
        bool paired = false;
        for (const auto& g : fd.harmonics) {
            if (g.wave_vector == neg && g.amplitude.size() == n &&
                (g.amplitude - h.amplitude.conjugate()).cwiseAbs().maxCoeff() <= tol) {
                paired = true;
                break;
            }
        }
        if (!paired) diags.emplace_back("forcing harmonics not conjugate-paired");
    }
    return diags;
}

BuiltinModel builtin_from_name(const std::string& name) {
    if (name == "shaw_pierre") return BuiltinModel::ShawPierre;
    if (name == "spring_system") return BuiltinModel::SpringSystem;
    if (name == "oscillator_chain") return BuiltinModel::OscillatorChain;
    model_error("unknown built-in model '" + name + "'");
}

std::string builtin_name(BuiltinModel model) {
    switch (model) {
        case BuiltinModel::ShawPierre: return "shaw_pierre";
        case BuiltinModel::SpringSystem: return "spring_system";
        case BuiltinModel::OscillatorChain: return "oscillator_chain";
    }
    return "unknown";
}

namespace {

class ParamReader {
public:
    ParamReader(const std::map<std::string, double>& given, std::map<std::string, double> defaults)
        : values_(std::move(defaults)) {
        for (const auto& [k, v] : given) {
            if (!values_.count(k)) model_error("unknown parameter '" + k + "'");
            values_[k] = v;
        }
    }
    double operator()(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) model_error("missing parameter '" + key + "'");
        return it->second;
    }

private:
    std::map<std::string, double> values_;
};

MatrixXd second_difference(int n) {
    MatrixXd t = 2.0 * MatrixXd::Identity(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        t(i, i + 1) = -1.0;
        t(i + 1, i) = -1.0;
    }
    return t;
}

MechanicalSystem shaw_pierre(const std::map<std::string, double>& given) {
    const double c1 = 0.003;
    ParamReader p(given, {{"m", 1.0},
                          {"k", 1.0},
                          {"c1", c1},
                          {"c2", c1 / std::numbers::sqrt3},
                          {"kappa", 0.5},
                          {"f1", 1.0 / std::numbers::sqrt2},
                          {"f2", 1.0 / std::numbers::sqrt2},
                          {"epsilon", 0.003},
                          {"omega", 1.0}});
    MechanicalSystem s = MechanicalSystem::zeros(2);
    s.name = "shaw_pierre";
    s.mass = p("m") * MatrixXd::Identity(2, 2);
    s.damping << p("c1") + p("c2"), -p("c2"), -p("c2"), p("c1") + p("c2");
    s.stiffness << 2.0 * p("k"), -p("k"), -p("k"), 2.0 * p("k");
    s.nonlinearity.add_scalar_term({3, 0, 0, 0}, 0, p("kappa"));
    VectorXd f(2);
    f << p("f1"), p("f2");
    s.forcing = ForcingDefinition::single_harmonic(f, p("epsilon"), p("omega"));
    return s;
}

MechanicalSystem spring_system(const std::map<std::string, double>& given) {
    ParamReader p(given, {{"omega1", 2.0},
                          {"omega2", 4.5},
                          {"D1", 0.01},
                          {"D2", 0.2},
                          {"f1", 0.02},
                          {"omega", 2.0}});
    const double w1 = p("omega1");
    const double w2 = p("omega2");
    const double w1s = w1 * w1;
    const double w2s = w2 * w2;
    const double cub = 0.5 * (w1s + w2s);

    MechanicalSystem s = MechanicalSystem::zeros(2);
    s.name = "spring_system";
    s.mass = MatrixXd::Identity(2, 2);
    s.damping(0, 0) = 2.0 * p("D1") * w1;
    s.damping(1, 1) = 2.0 * p("D2") * w2;
    s.stiffness(0, 0) = w1s;
    s.stiffness(1, 1) = w2s;

    auto& nl = s.nonlinearity;
    // Row 1: w1^2/2 (3 q1^2 + q2^2) + w2^2 q1 q2 + (w1^2+w2^2)/2 q1 (q1^2 + q2^2)
    nl.add_scalar_term({2, 0, 0, 0}, 0, 1.5 * w1s);
    nl.add_scalar_term({0, 2, 0, 0}, 0, 0.5 * w1s);
    nl.add_scalar_term({1, 1, 0, 0}, 0, w2s);
    nl.add_scalar_term({3, 0, 0, 0}, 0, cub);
    nl.add_scalar_term({1, 2, 0, 0}, 0, cub);
    // Row 2: w2^2/2 (3 q2^2 + q1^2) + w1^2 q1 q2 + (w1^2+w2^2)/2 q2 (q1^2 + q2^2)
    nl.add_scalar_term({0, 2, 0, 0}, 1, 1.5 * w2s);
    nl.add_scalar_term({2, 0, 0, 0}, 1, 0.5 * w2s);
    nl.add_scalar_term({1, 1, 0, 0}, 1, w1s);
    nl.add_scalar_term({0, 3, 0, 0}, 1, cub);
    nl.add_scalar_term({2, 1, 0, 0}, 1, cub);

    VectorXd f = VectorXd::Zero(2);
    f(0) = 1.0;
    s.forcing = ForcingDefinition::single_harmonic(f, p("f1"), p("omega"));
    return s;
}

MechanicalSystem oscillator_chain(const std::map<std::string, double>& given) {
    ParamReader p(given, {{"n", 5.0},
                          {"m", 1.0},
                          {"c", 0.005},
                          {"k", 1.0},
                          {"kappa", 0.5},
                          {"epsilon", 0.004},
                          {"omega", 0.518}});
    const double nd = p("n");
    const int n = static_cast<int>(nd);
    if (n < 2 || nd != static_cast<double>(n)) model_error("oscillator_chain requires integer n >= 2");

    MechanicalSystem s = MechanicalSystem::zeros(n);
    s.name = "oscillator_chain";
    const MatrixXd t = second_difference(n);
    s.mass = p("m") * MatrixXd::Identity(n, n);
    s.damping = p("c") * t;
    s.stiffness = p("k") * t;
    Exponent cubic(2 * n, 0);
    cubic[0] = 3;
    s.nonlinearity.add_scalar_term(cubic, 0, p("kappa"));
    VectorXd f = VectorXd::Zero(n);
    f(0) = 1.0;
    s.forcing = ForcingDefinition::single_harmonic(f, p("epsilon"), p("omega"));
    return s;
}

}  // namespace

MechanicalSystem builtin_model(BuiltinModel model, const std::map<std::string, double>& params) {
    switch (model) {
        case BuiltinModel::ShawPierre: return shaw_pierre(params);
        case BuiltinModel::SpringSystem: return spring_system(params);
        case BuiltinModel::OscillatorChain: return oscillator_chain(params);
    }
    model_error("unknown built-in model");
}

VectorXd evaluate_field(const PolynomialField<double>& field, const VectorXd& x) {
    return field.evaluate<double>(x);
}

}  // namespace ssmbb
