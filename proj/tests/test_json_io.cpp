#include "equnfold/d3_example.hpp"
#include "equnfold/json_io.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace equnfold;
using io::json;

TEST_SUITE("json_io") {

TEST_CASE("complex numbers") {
    CHECK(io::complex_to_json(cplx(1.5, -2.0)) == json::array({1.5, -2.0}));
    CHECK(io::complex_from_json(json::array({0.25, 3.0})) == cplx(0.25, 3.0));
    CHECK(io::complex_from_json(json(4.0)) == cplx(4.0, 0.0));
    CHECK_THROWS_AS((void)io::complex_from_json(json("x")), io::SchemaError);
    CHECK_THROWS_AS((void)io::complex_from_json(json::array({1.0})), io::SchemaError);
}

TEST_CASE("property: matrices round-trip bit for bit") {
    gen::Rng rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        const CMatrix m = rng.matrix(rng.integer(1, 5), rng.integer(1, 5), 1e3);
        const json j = io::matrix_to_json(m);
        const CMatrix back = io::matrix_from_json(json::parse(io::dump(j)));
        CHECK(back.rows() == m.rows());
        CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS((void)io::matrix_from_json(json::parse("[[1, 2], [3]]")), io::SchemaError);
    CHECK_THROWS_AS((void)io::matrix_from_json(json::parse("{}")), io::SchemaError);
}

TEST_CASE("operators and representations round-trip") {
    const auto op = d3::d3_operator({-0.7, 0.4, 1.25, 3.0});
    const auto back = io::operator_from_json(io::operator_to_json(op));
    REQUIRE(back.terms().size() == op.terms().size());
    for (std::size_t k = 0; k < op.terms().size(); ++k) {
        CHECK(back.terms()[k].delay == op.terms()[k].delay);
        CHECK(max_abs(back.terms()[k].coefficient - op.terms()[k].coefficient) == 0.0);
    }
    CHECK_THROWS_AS((void)io::operator_from_json(json::parse(R"({"n": 2, "terms": []})")), io::SchemaError);

    const auto rho = d3::d3_permutation_rep();
    const auto again = io::representation_from_json(io::representation_to_json(rho));
    CHECK(again.group->order() == 6);
    CHECK(check_representation(again).valid());

    json table = {{"mul_table", rho.group->mul_table()}, {"matrices", json::array()}};
    for (const auto& m : rho.matrices) {
        table["matrices"].push_back(io::matrix_to_json(m));
    }
    const auto from_table = io::representation_from_json(table);
    CHECK(max_abs(from_table(3) - rho(3)) == 0.0);
}

TEST_CASE("masks and families") {
    const auto masks = d3::structure_masks();
    for (const auto& m : masks) {
        CHECK((io::mask_from_json(io::mask_to_json(m)) == m).all());
    }
    const auto pt = d3::default_point(d3::Case::Simple);
    const auto res = d3::run_case(d3::Case::Simple, pt);
    const json j = json::parse(io::dump(io::family_to_json(res.assembly.family)));
    const auto fam = io::family_from_json(j, res.frame.op);
    REQUIRE(fam.parameters.size() == res.assembly.family.parameters.size());
    CHECK(fam.lags == res.assembly.family.lags);
    for (std::size_t m = 0; m < fam.parameters.size(); ++m) {
        CHECK(fam.parameters[m].name == res.assembly.family.parameters[m].name);
        for (std::size_t k = 0; k < fam.lags.size(); ++k) {
            CHECK(max_abs(fam.parameters[m].coefficients[k] - res.assembly.family.parameters[m].coefficients[k]) ==
                  0.0);
        }
    }
}

TEST_CASE("dump sorts keys and ends with a newline") {
    const json j = {{"zeta", 1}, {"alpha", 2}};
    const std::string s = io::dump(j);
    CHECK(s.back() == '\n');
    CHECK(s.find("alpha") < s.find("zeta"));
}

TEST_CASE("atomic writes and reading") {
    const auto dir = std::filesystem::temp_directory_path() / "equnfold_json_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "sub" / "a.json";
    io::write_atomic(path, "{\"x\": 1}\n");
    CHECK(io::read_file(path)["x"] == 1);
    io::write_atomic(path, "{\"x\": 2}\n");
    CHECK(io::read_file(path)["x"] == 2);
    for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
        CHECK(e.path().filename() == "a.json");
    }
    std::ofstream(dir / "bad.json") << "{ nope";
    CHECK_THROWS_AS((void)io::read_file(dir / "bad.json"), io::SchemaError);
    CHECK_THROWS_AS((void)io::read_file(dir / "missing.json"), io::SchemaError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("require helpers") {
    const json j = {{"a", 1.5}, {"b", "s"}};
    CHECK(io::require_number(j, "a") == 1.5);
    CHECK_THROWS_AS((void)io::require(j, "c"), io::SchemaError);
    CHECK_THROWS_AS((void)io::require_number(j, "b"), io::SchemaError);
}

}
