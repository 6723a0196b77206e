#include "cli.hpp"

#include "support/generators.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace equnfold;
using io::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "equnfold");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "equnfold_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

const json& simple_artifact() {
    static const json a = json::parse(run({"unfold", "--preset", "d3:simple"}).out);
    return a;
}

const json& double_artifact() {
    static const json a = json::parse(run({"unfold", "--preset", "d3:double"}).out);
    return a;
}

bool check_failed(const cli::VerifyReport& rep, const std::string& name) {
    for (const auto& c : rep.checks) {
        if (c.name == name) {
            return !c.passed;
        }
    }
    return false;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("curves writes the CSV") {
    const auto r = run({"curves", "--factor", "delta1", "--beta", "-0.5", "--tau-n", "4", "--omega-range",
                        "0.05:5:0.005"});
    CHECK(r.code == 0);
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "omega,alpha,tau_s,sign,branch,factor");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
    }
    CHECK(rows == 991 * 2 * 4);

    const auto path = scratch("c2.csv");
    CHECK(run({"curves", "--factor", "delta2", "--beta", "0.5", "--tau-n", "3", "--omega-range", "0.05:5:0.005",
               "-o", path.string()})
              .code == 0);
    CHECK(std::filesystem::file_size(path) > 1000);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run({"curves", "--omega-range", "5:0:-1"}).code == 2);
    CHECK(run({"curves", "--omega-range", "0.1:1"}).code == 2);
    CHECK(run({"curves", "--branches", "3..1"}).code == 2);
    CHECK(run({"curves", "--factor", "delta9"}).code == 2);
    CHECK(run({"curves", "--nope"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"unfold"}).code == 2);
    CHECK(run({"unfold", "--preset", "d3:none"}).code == 2);
    CHECK(run({"double-hopf", "--alpha-window", "4:-4"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("double-hopf lists points with window metadata") {
    const auto r = run({"double-hopf", "--factor", "delta2", "--beta", "0.5", "--tau-n", "3"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["schema"] == io::kSchema);
    CHECK(j["window"]["alpha"] == json::array({-4.0, 4.0}));
    CHECK(!j["points"].empty());
    for (const auto& p : j["points"]) {
        CHECK(p["residual"].get<double>() < 1e-10);
    }
}

TEST_CASE("unfold presets give four-parameter families") {
    for (const json* a : {&simple_artifact(), &double_artifact()}) {
        CHECK((*a)["schema"] == "equivar-unfold/1");
        CHECK((*a)["status"] == "ok");
        CHECK((*a)["family"]["parameters"].size() == 4);
        CHECK((*a)["versality"]["miniversal"] == true);
        CHECK((*a)["real_family"]["parameters"].size() == 4);
        CHECK((*a)["d3"]["patterns_ok"] == true);
    }
    CHECK(simple_artifact()["frame"]["c"] == 4);
    CHECK(double_artifact()["frame"]["c"] == 8);
}

TEST_CASE("unfold output is deterministic") {
    const auto p1 = scratch("d1.json");
    const auto p2 = scratch("d2.json");
    CHECK(run({"unfold", "--preset", "d3:double", "-o", p1.string()}).code == 0);
    CHECK(run({"unfold", "--preset", "d3:double", "-o", p2.string()}).code == 0);
    std::ifstream a(p1);
    std::ifstream b(p2);
    const std::string sa((std::istreambuf_iterator<char>(a)), {});
    const std::string sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
    CHECK(!sa.empty());
}

TEST_CASE("all directions exits 3") {
    const auto r = run({"unfold", "--preset", "d3:double", "--all-directions"});
    CHECK(r.code == 3);
    const json j = json::parse(r.out);
    CHECK(j["family"]["parameters"].size() == 16);
    CHECK(j["versality"]["versal"] == true);
    CHECK(j["versality"]["miniversal"] == false);
}

TEST_CASE("point index selects another located point") {
    const auto r = run({"unfold", "--preset", "d3:simple", "--point-index", "1"});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["source"]["point_index"] == 1);
    CHECK(run({"unfold", "--preset", "d3:simple", "--point-index", "999"}).code == 1);
}

TEST_CASE("model configs") {
    const auto bad = scratch("bad_model.json");
    write(bad, R"({"model": {"n": 3, "terms": [
        {"delay": 0, "matrix": [[-1,0,0],[0,-1,0],[0,0,-1]]},
        {"delay": 1, "matrix": [[0,0.5,0],[0,0,0],[0,0,0]]}]},
      "group": {"generators": [[[0,1,0],[1,0,0],[0,0,1]], [[0,0,1],[1,0,0],[0,1,0]]]},
      "lambda_seeds": [[-1, 0]]})");
    const auto out = scratch("bad_out.json");
    const auto r = run({"unfold", "--config", bad.string(), "-o", out.string()});
    CHECK(r.code == 1);
    const json a = io::read_file(out);
    CHECK(a["status"] == "error");
    CHECK(a["error"]["message"].get<std::string>().find("equivariance residual") != std::string::npos);

    const auto scalar = scratch("scalar.json");
    write(scalar, R"({"model": {"n": 1, "terms": [{"delay": 1.5707963267948966, "matrix": [[-1]]}]},
      "lambda_seeds": [[0, 0.9], [0, -0.9]]})");
    const auto rs = run({"unfold", "--config", scalar.string()});
    CHECK(rs.code == 0);
    const json js = json::parse(rs.out);
    CHECK(js["family"]["parameters"].size() == 2);
    CHECK(cli::verify_artifact(js).passed());

    const auto both = scratch("both.json");
    write(both, R"({"preset": "d3:simple", "model": {"n": 1, "terms": [{"delay": 0, "matrix": [[1]]}]}})");
    CHECK(run({"unfold", "--config", both.string()}).code == 2);
    const auto neg = scratch("neg.json");
    write(neg, R"({"preset": "d3:simple", "tolerances": {"root": -1}})");
    CHECK(run({"unfold", "--config", neg.string()}).code == 2);
}

TEST_CASE("config with explicit delays and sparsity") {
    const auto cfg = scratch("masked.json");
    const json a = simple_artifact();
    json c = {{"preset", "d3:simple"}, {"delays", a["lags"]}, {"sparsity", a["masks"]}};
    write(cfg, c.dump());
    const auto r = run({"unfold", "--config", cfg.string()});
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["family"] == a["family"]);
}

TEST_CASE("verify passes on fresh artifacts") {
    for (const json* a : {&simple_artifact(), &double_artifact()}) {
        const auto rep = cli::verify_artifact(*a);
        CHECK(rep.passed());
        CHECK(rep.checks.size() > 15);
    }
    const auto path = scratch("simple.json");
    io::write_atomic(path, io::dump(simple_artifact()));
    const auto report = scratch("report.json");
    const auto r = run({"verify", path.string(), "--report", report.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("all checks passed") != std::string::npos);
    CHECK(io::read_file(report)["passed"] == true);
}

TEST_CASE("verify schema failures exit 2") {
    const auto empty = scratch("empty.json");
    write(empty, "");
    CHECK(run({"verify", empty.string()}).code == 2);
    const auto obj = scratch("obj.json");
    write(obj, "{}");
    CHECK(run({"verify", obj.string()}).code == 2);
    json wrong = simple_artifact();
    wrong["schema"] = "equivar-unfold/0";
    const auto w = scratch("wrong.json");
    write(w, wrong.dump());
    CHECK(run({"verify", w.string()}).code == 2);
    json broken = simple_artifact();
    broken["family"]["parameters"][0]["coefficients"] = "zero";
    write(w, broken.dump());
    CHECK(run({"verify", w.string()}).code == 2);
    CHECK(run({"verify", scratch("absent.json").string()}).code == 2);
}

TEST_CASE("property: verify catches equivariance-breaking perturbations") {
    gen::Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        json a = rng.coin() ? simple_artifact() : double_artifact();
        const int m = rng.integer(0, 3);
        const int k = rng.integer(0, 3);
        const int i = rng.integer(0, 2);
        const int j = rng.integer(0, 2);
        auto& entry = a["family"]["parameters"][m]["coefficients"][k][i][j];
        entry[0] = entry[0].get<double>() + 1e-3;
        const auto rep = cli::verify_artifact(a);
        CHECK_FALSE(rep.passed());
        CHECK(check_failed(rep, "coefficient_equivariance"));
    }
}

TEST_CASE("property: verify catches a deleted direction") {
    gen::Rng rng(62);
    for (int trial = 0; trial < 6; ++trial) {
        json a = rng.coin() ? simple_artifact() : double_artifact();
        const int m = rng.integer(0, 3);
        a["family"]["parameters"].erase(static_cast<std::size_t>(m));
        const auto rep = cli::verify_artifact(a);
        CHECK_FALSE(rep.passed());
        CHECK(check_failed(rep, "gamma_versality"));
    }
}

TEST_CASE("error artifacts fail verification") {
    const json err = {{"schema", io::kSchema}, {"status", "error"}, {"error", {{"kind", "x"}, {"message", "y"}}}};
    CHECK_FALSE(cli::verify_artifact(err).passed());
}

TEST_CASE("d3-demo writes every artifact") {
    const auto dir = scratch("demo");
    std::filesystem::remove_all(dir);
    const auto r = run({"d3-demo", "--output-dir", dir.string()});
    CHECK(r.code == 0);
    for (const char* f : {"curves_delta1.csv", "curves_delta2.csv", "double_hopf_delta1.json",
                          "double_hopf_delta2.json", "unfold_simple.json", "unfold_double.json"}) {
        CHECK(std::filesystem::exists(dir / f));
    }
    CHECK(r.out.find("mini-versal=yes") != std::string::npos);
}

}
