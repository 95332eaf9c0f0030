#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ssmbb/cli.hpp"
#include "ssmbb/model_io.hpp"

using namespace ssmbb;
namespace fs = std::filesystem;

namespace {

const std::string kSource = SSMBB_SOURCE_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "ssm-backbone");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / ("ssmbb_test_" + name);
    std::ofstream(p) << content;
    return p.string();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

void check_same_system(const MechanicalSystem& a, const MechanicalSystem& b) {
    CHECK(a.n_dof == b.n_dof);
    CHECK(a.mass == b.mass);
    CHECK(a.damping == b.damping);
    CHECK(a.stiffness == b.stiffness);
    CHECK(a.gyroscopic == b.gyroscopic);
    CHECK(a.follower == b.follower);
    CHECK(a.nonlinearity.terms() == b.nonlinearity.terms());
    CHECK(a.forcing.epsilon == b.forcing.epsilon);
    CHECK(a.forcing.frequency() == b.forcing.frequency());
    CHECK(a.forcing.single_harmonic_vector() == b.forcing.single_harmonic_vector());
}

const char* kResonantModel = R"({
  "name": "one_to_three",
  "dof": 2,
  "mass": [[1, 0], [0, 1]],
  "damping": [[0.002, 0], [0, 0.006]],
  "stiffness": [[1, 0], [0, 9]],
  "nonlinear": [{"equation": 1, "q_exponents": [3, 0], "coefficient": 1.0}],
  "forcing": {"vector": [1, 0], "epsilon": 0.01, "frequency": 1.0}
})";

}  // namespace

TEST_CASE("bundled fixtures equal the built-in models") {
    check_same_system(parse_model_file(kSource + "/models/shaw_pierre.json"), builtin_model(BuiltinModel::ShawPierre));
    check_same_system(parse_model_file(kSource + "/models/spring_system.json"),
                      builtin_model(BuiltinModel::SpringSystem));
    check_same_system(parse_model_file(kSource + "/models/oscillator_chain5.json"),
                      builtin_model(BuiltinModel::OscillatorChain));
}

TEST_CASE("serialize then parse is the identity") {
    for (auto m : {BuiltinModel::ShawPierre, BuiltinModel::SpringSystem, BuiltinModel::OscillatorChain}) {
        const MechanicalSystem s = builtin_model(m);
        check_same_system(parse_model_text(serialize_model(s).dump()), s);
        CHECK(model_hash(parse_model_text(serialize_model(s).dump())) == model_hash(s));
    }
}

TEST_CASE("schema diagnostics") {
    Json doc = serialize_model(builtin_model(BuiltinModel::ShawPierre));
    doc["stiffness"] = Json::array({Json::array({1, 2}), Json::array({3, 4}), Json::array({5, 6})});
    CHECK_THROWS_WITH_AS(parse_model(doc), doctest::Contains("field 'stiffness'"), SsmError);
    CHECK_THROWS_WITH_AS(parse_model(doc), doctest::Contains("3x2"), SsmError);

    Json nodof = serialize_model(builtin_model(BuiltinModel::ShawPierre));
    nodof.erase("dof");
    CHECK_THROWS_WITH_AS(parse_model(nodof), doctest::Contains("'dof'"), SsmError);

    try {
        parse_model_text("{\n  \"dof\": 2,\n  \"mass\": [1, \n}");
        FAIL("no error");
    } catch (const SsmError& e) {
        CHECK(e.kind() == ErrorKind::Model);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("duplicate nonlinear terms are summed with a warning") {
    Json doc = serialize_model(builtin_model(BuiltinModel::ShawPierre));
    doc["nonlinear"].push_back({{"equation", 1}, {"q_exponents", {3, 0}}, {"coefficient", 0.25}});
    std::vector<std::string> warnings;
    const MechanicalSystem s = parse_model(doc, &warnings);
    CHECK(s.nonlinearity.coefficient({3, 0, 0, 0})[0] == 0.75);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("duplicate term in equation 1") != std::string::npos);
}

TEST_CASE("frf peak row has a quarter-period phase lag") {
    const Result r = cli({"frf", "builtin:shaw_pierre"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() > 100);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 7);
        if (std::stod(rows[i][1]) > std::stod(rows[peak][1])) peak = i;
    }
    CHECK(std::abs(std::stod(rows[peak][2]) - std::numbers::pi / 2) < 1e-6);
    CHECK(r.out.find("# model_hash: " + model_hash(builtin_model(BuiltinModel::ShawPierre))) != std::string::npos);
    CHECK(r.out.find("# epsilon: 0.003") != std::string::npos);
    CHECK(r.out.find("omega,rho,psi,stable,modal_amp_1omega,modal_amp_2omega,modal_amp_3omega") != std::string::npos);
}

TEST_CASE("file model and built-in give the same frf") {
    const Result a = cli({"frf", "builtin:shaw_pierre", "--points", "20"});
    const Result b = cli({"frf", kSource + "/models/shaw_pierre.json", "--points", "20"});
    CHECK(csv_rows(a.out) == csv_rows(b.out));
}

TEST_CASE("resonant model fails the check with exit 2") {
    const std::string path = temp_file("resonant.json", kResonantModel);
    const Result r = cli({"check", path, "--mode", "1"});
    CHECK(r.code == 2);
    CHECK(r.out.find("(m1, m2, j) = (3, 0, 2)") != std::string::npos);
    const Result f = cli({"frf", path});
    CHECK(f.code == 2);
    CHECK(cli({"check", "builtin:shaw_pierre"}).code == 0);
}

TEST_CASE("verify is byte-reproducible and independent of --jobs") {
    const std::vector<std::string> base = {"verify", "builtin:shaw_pierre", "--omega-range", "0.99:1.03:5"};
    const Result a = cli(base);
    const Result b = cli(base);
    std::vector<std::string> par = base;
    par.insert(par.end(), {"--jobs", "3"});
    const Result c = cli(par);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    const auto rows = csv_rows(a.out);
    REQUIRE(rows.size() >= 5);
    for (const auto& row : rows) {
        REQUIRE(row.size() == 7);
        CHECK(std::stod(row[3]) < 0.05);
        CHECK(row[4] == row[5]);
    }
}

TEST_CASE("orbit dump") {
    const std::string prefix = (fs::temp_directory_path() / "ssmbb_test_orbit").string();
    const Result r = cli({"verify", "builtin:shaw_pierre", "--omega-range", "1:1:1", "--orbit-at", "1.0", "--orbit-out",
                          prefix});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(prefix + "_1_time.csv"));
    CHECK(fs::exists(prefix + "_1_fft.csv"));
}

TEST_CASE("backbone, boundaries, ssm, spectrum outputs") {
    const Result bb = cli({"backbone", "builtin:shaw_pierre", "--points", "10"});
    REQUIRE(bb.code == 0);
    CHECK(bb.out.find("# epsilon") == std::string::npos);
    CHECK(csv_rows(bb.out).size() == 10);

    const Result bd = cli({"boundaries", "builtin:shaw_pierre", "--points", "10", "--rho-max", "0.5"});
    REQUIRE(bd.code == 0);
    const auto rows = csv_rows(bd.out);
    CHECK(rows.front()[1] == "nan");
    CHECK(rows.back()[1] != "nan");

    const Result ssm = cli({"ssm", "builtin:shaw_pierre", "--order", "3"});
    REQUIRE(ssm.code == 0);
    const Json doc = Json::parse(ssm.out);
    CHECK(doc["beta"].size() == 1);
    CHECK(doc["beta"][0][1].get<double>() == doctest::Approx(0.1875).epsilon(1e-5));
    CHECK(doc["r"].get<double>() > 0.0);
    CHECK(doc["r_c"][0].get<double>() == 0.0);
    CHECK(doc["w_plus"].size() == 4);
    CHECK(doc["w_minus"].size() == 4);

    const Result scan = cli({"ssm", "builtin:spring_system", "--residual-scan"});
    REQUIRE(scan.code == 0);
    CHECK(csv_rows(scan.out).size() == 61);

    const Result sp = cli({"spectrum", "builtin:oscillator_chain", "--format", "json"});
    REQUIRE(sp.code == 0);
    CHECK(Json::parse(sp.out)["modes"].size() == 5);
}

TEST_CASE("epsilon override and parameters") {
    const Result r = cli({"frf", "builtin:spring_system", "--eps", "0.01", "--points", "10"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# epsilon: 0.01\n") != std::string::npos);
    const Result p = cli({"spectrum", "builtin:oscillator_chain", "--param", "n=3"});
    REQUIRE(p.code == 0);
    CHECK(p.out.find("\n   3 ") != std::string::npos);
    CHECK(p.out.find("\n   4 ") == std::string::npos);
}

TEST_CASE("output file") {
    const std::string path = (fs::temp_directory_path() / "ssmbb_test_backbone.csv").string();
    const Result r = cli({"backbone", "builtin:shaw_pierre", "--points", "5", "-o", path});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(csv_rows(buf.str()).size() == 5);
}

TEST_CASE("exit codes for bad input") {
    CHECK(cli({"frf", "/nonexistent/model.json"}).code == 1);
    CHECK(cli({"frf", "builtin:shaw_pierre", "--order", "4"}).code == 1);
    CHECK(cli({"frf", "builtin:shaw_pierre", "--bogus"}).code == 1);
    CHECK(cli({"frobnicate", "builtin:shaw_pierre"}).code == 1);
    CHECK(cli({"verify", "builtin:shaw_pierre"}).code == 1);
    CHECK(cli({"verify", "builtin:shaw_pierre", "--omega-range", "1:2"}).code == 1);
    CHECK(cli({"spectrum", "builtin:oscillator_chain", "--param", "n"}).code == 1);
    CHECK(cli({"spectrum", "builtin:shaw_pierre", "--mode", "3"}).code == 0);
    CHECK(cli({"check", "builtin:shaw_pierre", "--mode", "3"}).code == 1);

    Json od = serialize_model(builtin_model(BuiltinModel::ShawPierre));
    od["damping"] = Json::array({Json::array({5, 0}), Json::array({0, 5})});
    const Result r = cli({"spectrum", temp_file("overdamped.json", od.dump())});
    CHECK(r.code == 1);
    CHECK(r.err.find("overdamped mode") != std::string::npos);
}

TEST_CASE("model diagnostics are warnings unless strict") {
    Json doc = serialize_model(builtin_model(BuiltinModel::ShawPierre));
    doc["damping"][0][1] = -0.0017;
    const std::string path = temp_file("asym.json", doc.dump());
    const Result loose = cli({"spectrum", path});
    CHECK(loose.code == 0);
    CHECK(loose.err.find("warning: damping not symmetric") != std::string::npos);
    CHECK(cli({"spectrum", path, "--strict-model"}).code == 1);
}

TEST_CASE("tolerance profiles") {
    CHECK(default_config().resonance.tol_abs == 1e-6);
    setenv("SSM_BACKBONE_PROFILE", "strict", 1);
    const RunConfig strict = default_config();
    setenv("SSM_BACKBONE_PROFILE", "loose", 1);
    const RunConfig loose = default_config();
    unsetenv("SSM_BACKBONE_PROFILE");
    CHECK(strict.resonance.tol_abs > loose.resonance.tol_abs);
    CHECK(strict.resonance.tol_near_factor > loose.resonance.tol_near_factor);
    CHECK(cli({"check", "builtin:shaw_pierre", "--tol-near", "0.3"}).code == 2);
}
