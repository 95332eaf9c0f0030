#include "ssmbb/model_io.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace ssmbb {

namespace {

const Json& require(const Json& doc, const char* key) {
    if (!doc.contains(key)) model_error(fmt::format("field '{}': missing", key));
    return doc.at(key);
}

double as_number(const Json& v, const std::string& field) {
    if (!v.is_number()) model_error(fmt::format("field '{}': expected a number", field));
    return v.get<double>();
}

int as_int(const Json& v, const std::string& field) {
    if (!v.is_number_integer()) model_error(fmt::format("field '{}': expected an integer", field));
    return v.get<int>();
}

VectorXd read_vector(const Json& v, int n, const std::string& field) {
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
        model_error(fmt::format("field '{}': expected an array of {} numbers", field, n));
    }
    VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = as_number(v[i], fmt::format("{}[{}]", field, i));
    return out;
}

MatrixXd read_matrix(const Json& doc, const char* key, int n, bool optional) {
    if (!doc.contains(key)) {
        if (optional) return MatrixXd::Zero(n, n);
        model_error(fmt::format("field '{}': missing", key));
    }
    const Json& v = doc.at(key);
    const int rows = v.is_array() ? static_cast<int>(v.size()) : -1;
    int cols = -1;
    if (rows > 0 && v[0].is_array()) cols = static_cast<int>(v[0].size());
    for (int i = 0; rows > 0 && i < rows; ++i) {
        if (!v[i].is_array() || static_cast<int>(v[i].size()) != cols) cols = -1;
    }
    if (rows != n || cols != n) {
        model_error(fmt::format("field '{}': expected a {}x{} matrix, got {}x{}", key, n, n, std::max(rows, 0),
                                std::max(cols, 0)));
    }
    MatrixXd out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out(i, j) = as_number(v[i][j], fmt::format("{}[{}][{}]", key, i, j));
    }
    return out;
}

Json write_matrix(const MatrixXd& m) {
    Json out = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(row);
    }
    return out;
}

Json write_vector(const VectorXd& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

ForcingDefinition read_forcing(const Json& f, int n) {
    const double eps = f.contains("epsilon") ? as_number(f.at("epsilon"), "forcing.epsilon") : 1.0;
    if (eps < 0.0) model_error("field 'forcing.epsilon': must be nonnegative");
    if (f.contains("vector")) {
        const VectorXd vec = read_vector(f.at("vector"), n, "forcing.vector");
        const double omega = as_number(require(f, "frequency"), "forcing.frequency");
        if (!(omega > 0.0)) model_error("field 'forcing.frequency': must be positive");
        return ForcingDefinition::single_harmonic(vec, eps, omega);
    }
    ForcingDefinition out;
    out.epsilon = eps;
    const Json& freqs = require(f, "frequencies");
    if (!freqs.is_array() || freqs.empty()) model_error("field 'forcing.frequencies': expected a nonempty array");
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double w = as_number(freqs[i], fmt::format("forcing.frequencies[{}]", i));
        if (!(w > 0.0)) model_error("field 'forcing.frequencies': frequencies must be positive");
        out.base_frequencies.push_back(w);
    }
    const Json& hs = require(f, "harmonics");
    if (!hs.is_array()) model_error("field 'forcing.harmonics': expected an array");
    for (std::size_t h = 0; h < hs.size(); ++h) {
        const std::string base = fmt::format("forcing.harmonics[{}]", h);
        ForcingHarmonic fh;
        const Json& k = require(hs[h], "k");
        if (!k.is_array() || k.size() != out.base_frequencies.size()) {
            model_error(fmt::format("field '{}.k': expected {} integers", base, out.base_frequencies.size()));
        }
        for (std::size_t i = 0; i < k.size(); ++i) fh.wave_vector.push_back(as_int(k[i], base + ".k"));
        const VectorXd re = read_vector(require(hs[h], "re"), n, base + ".re");
        const VectorXd im = hs[h].contains("im") ? read_vector(hs[h].at("im"), n, base + ".im") : VectorXd::Zero(n);
        fh.amplitude = re.cast<cdouble>() + cdouble(0.0, 1.0) * im.cast<cdouble>();
        out.harmonics.push_back(fh);
    }
    return out;
}

}  // namespace

MechanicalSystem parse_model(const Json& doc, std::vector<std::string>* warnings) {
    if (!doc.is_object()) model_error("model document must be an object");
    const int n = as_int(require(doc, "dof"), "dof");
    if (n < 1) model_error("field 'dof': must be positive");
    MechanicalSystem s = MechanicalSystem::zeros(n);
    s.name = doc.contains("name") && doc.at("name").is_string() ? doc.at("name").get<std::string>() : "model";
    s.mass = read_matrix(doc, "mass", n, false);
    s.damping = read_matrix(doc, "damping", n, false);
    s.gyroscopic = read_matrix(doc, "gyroscopic", n, true);
    s.stiffness = read_matrix(doc, "stiffness", n, false);
    s.follower = read_matrix(doc, "follower", n, true);

    if (doc.contains("nonlinear")) {
        const Json& terms = doc.at("nonlinear");
        if (!terms.is_array()) model_error("field 'nonlinear': expected an array");
        std::set<std::pair<int, Exponent>> seen;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const std::string base = fmt::format("nonlinear[{}]", t);
            const Json& term = terms[t];
            const int row = as_int(require(term, "equation"), base + ".equation");
            if (row < 1 || row > n) model_error(fmt::format("field '{}.equation': must be in 1..{}", base, n));
            Exponent e(2 * n, 0);
            const Json& qe = require(term, "q_exponents");
            const Json qde = term.contains("qdot_exponents") ? term.at("qdot_exponents") : Json(std::vector<int>(n, 0));
            if (!qe.is_array() || static_cast<int>(qe.size()) != n) {
                model_error(fmt::format("field '{}.q_exponents': expected {} integers", base, n));
            }
            if (!qde.is_array() || static_cast<int>(qde.size()) != n) {
                model_error(fmt::format("field '{}.qdot_exponents': expected {} integers", base, n));
            }
            for (int i = 0; i < n; ++i) {
                e[i] = as_int(qe[i], base + ".q_exponents");
                e[i + n] = as_int(qde[i], base + ".qdot_exponents");
                if (e[i] < 0 || e[i + n] < 0) model_error(fmt::format("field '{}': negative exponent", base));
            }
            const double c = as_number(require(term, "coefficient"), base + ".coefficient");
            if (!seen.insert({row, e}).second && warnings) {
                warnings->push_back(fmt::format("{}: duplicate term in equation {}, coefficients summed", base, row));
            }
            s.nonlinearity.add_scalar_term(e, row - 1, c);
        }
    }
    if (doc.contains("forcing")) s.forcing = read_forcing(doc.at("forcing"), n);
    return s;
}

MechanicalSystem parse_model_text(const std::string& text, std::vector<std::string>* warnings) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        model_error(std::string("model file is not valid JSON: ") + e.what());
    }
    return parse_model(doc, warnings);
}

MechanicalSystem parse_model_file(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) model_error("cannot open model file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model_text(buf.str(), warnings);
}

Json serialize_model(const MechanicalSystem& sys) {
    const int n = sys.n_dof;
    Json doc;
    doc["name"] = sys.name;
    doc["dof"] = n;
    doc["mass"] = write_matrix(sys.mass);
    doc["damping"] = write_matrix(sys.damping);
    doc["gyroscopic"] = write_matrix(sys.gyroscopic);
    doc["stiffness"] = write_matrix(sys.stiffness);
    doc["follower"] = write_matrix(sys.follower);
    Json terms = Json::array();
    for (int row = 0; row < n; ++row) {
        for (const auto& [e, c] : sys.nonlinearity.terms()) {
            if (c[row] == 0.0) continue;
            Json t;
            t["equation"] = row + 1;
            t["q_exponents"] = std::vector<int>(e.begin(), e.begin() + n);
            t["qdot_exponents"] = std::vector<int>(e.begin() + n, e.end());
            t["coefficient"] = c[row];
            terms.push_back(t);
        }
    }
    doc["nonlinear"] = terms;
    const ForcingDefinition& f = sys.forcing;
    if (!f.empty()) {
        Json fj;
        fj["epsilon"] = f.epsilon;
        if (f.is_single_harmonic()) {
            fj["vector"] = write_vector(f.single_harmonic_vector());
            fj["frequency"] = f.frequency();
        } else {
            fj["frequencies"] = f.base_frequencies;
            Json hs = Json::array();
            for (const auto& h : f.harmonics) {
                Json hj;
                hj["k"] = h.wave_vector;
                hj["re"] = write_vector(h.amplitude.real());
                hj["im"] = write_vector(h.amplitude.imag());
                hs.push_back(hj);
            }
            fj["harmonics"] = hs;
        }
        doc["forcing"] = fj;
    }
    return doc;
}

MechanicalSystem load_model(const std::string& source, const std::map<std::string, double>& builtin_params,
                            std::vector<std::string>* warnings) {
    const std::string prefix = "builtin:";
    if (source.rfind(prefix, 0) == 0) {
        return builtin_model(builtin_from_name(source.substr(prefix.size())), builtin_params);
    }
    if (!builtin_params.empty()) model_error("model parameters only apply to built-in models");
    return parse_model_file(source, warnings);
}

std::string model_hash(const MechanicalSystem& sys) {
    const std::string text = serialize_model(sys).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace ssmbb
