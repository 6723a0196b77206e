#include "equnfold/d3_example.hpp"
#include "equnfold/delay_system.hpp"
#include "equnfold/errors.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace equnfold;

namespace {

std::vector<oracle::PointTerm> terms_of(const DelayOperator& op) {
    std::vector<oracle::PointTerm> out;
    for (const auto& t : op.terms()) {
        out.push_back({t.delay, t.coefficient});
    }
    return out;
}

CMatrix scalar(cplx x) {
    CMatrix m(1, 1);
    m(0, 0) = x;
    return m;
}

}  // namespace

TEST_SUITE("delay_system") {

TEST_CASE("operator construction checks") {
    CHECK_THROWS_AS(DelayOperator(2, {}), Error);
    CHECK_THROWS_AS(DelayOperator(2, {{-1.0, CMatrix::Identity(2, 2)}}), Error);
    CHECK_THROWS_AS(DelayOperator(2, {{0.0, CMatrix::Identity(3, 3)}}), Error);
    CHECK_THROWS_AS(DelayOperator(2, {{1.0, CMatrix::Identity(2, 2)}, {1.0, CMatrix::Identity(2, 2)}}), Error);
    const DelayOperator op(2, {{0.0, CMatrix::Identity(2, 2)}, {2.5, CMatrix::Zero(2, 2)}});
    CHECK(op.horizon() == 2.5);
    CHECK(op.is_real());
    const auto merged = DelayOperator::merged(1, {{1.0, scalar(2.0)}, {1.0, scalar(3.0)}});
    REQUIRE(merged.terms().size() == 1);
    CHECK(merged.terms()[0].delay == 1.0);
    CHECK(merged.terms()[0].coefficient(0, 0) == cplx(5.0));
}

TEST_CASE("characteristic matrix examples") {
    const DelayOperator zero(2, {{0.0, CMatrix::Zero(2, 2)}, {1.0, CMatrix::Zero(2, 2)}});
    const cplx l(0.3, -1.7);
    CHECK(max_abs(char_matrix(zero, l) - l * CMatrix::Identity(2, 2)) == 0.0);

    const DelayOperator lagged(1, {{1.0, scalar(-1.0)}});
    CHECK(std::abs(char_matrix(lagged, 0.0)(0, 0) - 1.0) < 1e-15);

    const auto op = d3::d3_operator({0.0, 0.0, 1.2, 0.7});
    CHECK(max_abs(char_matrix(op, l) - (l + 1.0) * CMatrix::Identity(3, 3)) < 1e-15);
}

TEST_CASE("property: ring characteristic matrix and its determinant") {
    gen::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = rng.uniform(-4, 4);
        const double b = rng.uniform(-2, 2);
        const double ts = rng.uniform(0.05, 8);
        const double tn = rng.uniform(0.05, 8);
        const cplx l = rng.complex(3.0);
        const auto op = d3::d3_operator({a, b, ts, tn});
        const CMatrix d = char_matrix(op, l);
        CHECK(max_abs(d - oracle::ring_char_matrix(l, a, b, ts, tn)) < 1e-12 * (1.0 + max_abs(d)));
        const cplx det = oracle::det3(d);
        const cplx s = oracle::delta1(l, a, b, ts, tn) * std::pow(oracle::delta2(l, a, b, ts, tn), 2);
        CHECK(std::abs(det - s) / (1.0 + std::abs(det)) < 1e-10);
        CHECK(std::abs(d.determinant() - det) / (1.0 + std::abs(det)) < 1e-10);
    }
}

TEST_CASE("equivariance residuals") {
    const Representation rho = d3::d3_permutation_rep();
    CHECK(check_equivariance(d3::d3_operator({-0.7, 0.4, 1.0, 2.0}), rho) == 0.0);
    const DelayOperator scalars(3, {{0.0, cplx(2, 1) * CMatrix::Identity(3, 3)}, {1.0, -CMatrix::Identity(3, 3)}});
    CHECK(check_equivariance(scalars, rho) == 0.0);
    CMatrix e12 = CMatrix::Zero(3, 3);
    e12(0, 1) = 0.4;
    const DelayOperator one_way(3, {{0.0, -CMatrix::Identity(3, 3)}, {1.0, e12}});
    CHECK(check_equivariance(one_way, rho) > 0.1);
}

TEST_CASE("property: equivariant operators commute with the characteristic matrix") {
    const Representation rho = d3::d3_permutation_rep();
    gen::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const DelayOperator op(3, {{0.0, rng.d3_equivariant()}, {rng.uniform(0.1, 3), rng.d3_equivariant()}});
        const cplx l = rng.complex(5.0);
        const CMatrix d = char_matrix(op, l);
        for (const auto& g : rho.matrices) {
            CHECK(max_abs(d * g - g * d) < 1e-12);
        }
    }
}

TEST_CASE("property: derivative matches finite differences") {
    gen::Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto op = rng.delay_operator(rng.integer(1, 4), 4, 3.0);
        const cplx l = rng.complex(2.0);
        const double h = 1e-5;
        const CMatrix fd = (char_matrix(op, l + h) - char_matrix(op, l - h)) / (2.0 * h);
        CHECK(max_abs(fd - char_matrix_derivative(op, l)) < 1e-6);
    }
}

TEST_CASE("bilinear form at a simple root equals w Delta'(lambda) u") {
    // z' = -z(t - pi/2) has the simple root i.
    const DelayOperator op(1, {{std::numbers::pi / 2.0, scalar(-1.0)}});
    const cplx i(0.0, 1.0);
    REQUIRE(std::abs(char_matrix(op, i)(0, 0)) < 1e-15);
    const AdjointFunction psi{Eigen::RowVectorXcd::Ones(1), i};
    const EigenFunction phi{Eigen::VectorXcd::Ones(1), i};
    const cplx expected = char_matrix_derivative(op, i)(0, 0);
    CHECK(std::abs(expected) > 0.5);
    CHECK(std::abs(bilinear_form(psi, phi, op) - expected) < 1e-14);
    CHECK(std::abs(bilinear_form_quadrature(psi, phi, op) - expected) < 1e-8);
    CHECK(std::abs(oracle::bilinear(psi.direction, i, phi.direction, i, terms_of(op)) - expected) < 1e-8);

    // Distinct roots i and -i are orthogonal.
    const AdjointFunction psi_c{Eigen::RowVectorXcd::Ones(1), -i};
    CHECK(std::abs(bilinear_form(psi_c, phi, op)) < 1e-14);
    CHECK(std::abs(bilinear_form_quadrature(psi_c, phi, op)) < 1e-8);
}

TEST_CASE("pure ODE pairing reduces to the point value") {
    CMatrix a(2, 2);
    a << 1.0, 2.0, 0.0, -1.0;
    const DelayOperator ode(2, {{0.0, a}});
    Eigen::RowVectorXcd w(2);
    w << cplx(1, 2), cplx(-0.5, 0);
    Eigen::VectorXcd u(2);
    u << cplx(0.3, -1), cplx(2, 2);
    const AdjointFunction psi{w, cplx(0.4, 1)};
    const EigenFunction phi{u, cplx(-2, 0.5)};
    const cplx point = (w * u)(0, 0);
    CHECK(std::abs(bilinear_form(psi, phi, ode) - point) == 0.0);
    CHECK(std::abs(bilinear_form_quadrature(psi, phi, ode) - point) < 1e-14);
}

TEST_CASE("property: closed form, quadrature and Simpson oracle agree") {
    gen::Rng rng(14);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = rng.integer(1, 3);
        const auto op = rng.delay_operator(n, 3, 2.0);
        const AdjointFunction psi{rng.matrix(1, n), rng.in_disc(3.0)};
        // Include coincident exponents to exercise the analytic limit.
        const cplx lam = rng.coin() ? psi.exponent : rng.in_disc(3.0);
        const EigenFunction phi{rng.matrix(n, 1), lam};
        const cplx closed = bilinear_form(psi, phi, op);
        const cplx quad = bilinear_form_quadrature(psi, phi, op, 256);
        const cplx simp = oracle::bilinear(psi.direction, psi.exponent, phi.direction, phi.exponent, terms_of(op));
        CHECK(std::abs(closed - quad) < 1e-9 * (1.0 + std::abs(closed)));
        CHECK(std::abs(closed - simp) < 1e-7 * (1.0 + std::abs(closed)));
    }
}

TEST_CASE("bilinear form near coincident exponents is continuous") {
    const DelayOperator op(1, {{0.0, scalar(-1.0)}, {1.3, scalar(0.7)}});
    const AdjointFunction psi{Eigen::RowVectorXcd::Ones(1), cplx(0.2, 1.1)};
    const EigenFunction same{Eigen::VectorXcd::Ones(1), psi.exponent};
    const EigenFunction near{Eigen::VectorXcd::Ones(1), psi.exponent + cplx(3e-10, -2e-10)};
    const EigenFunction off{Eigen::VectorXcd::Ones(1), psi.exponent + cplx(3e-8, 0)};
    const cplx b0 = bilinear_form(psi, same, op);
    CHECK(std::abs(bilinear_form(psi, near, op) - b0) < 1e-8);
    CHECK(std::abs(bilinear_form(psi, off, op) - b0) < 1e-6);
}

TEST_CASE("property: bilinear form is linear in both arguments") {
    gen::Rng rng(15);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = rng.integer(1, 3);
        const auto op = rng.delay_operator(n, 3, 2.0);
        const cplx l = rng.in_disc(2.0);
        const cplx m = rng.in_disc(2.0);
        const Eigen::VectorXcd u1 = rng.matrix(n, 1);
        const Eigen::VectorXcd u2 = rng.matrix(n, 1);
        const Eigen::RowVectorXcd w1 = rng.matrix(1, n);
        const Eigen::RowVectorXcd w2 = rng.matrix(1, n);
        const cplx a = rng.complex();
        const cplx b = rng.complex();
        const auto bf = [&](const Eigen::RowVectorXcd& w, const Eigen::VectorXcd& u) {
            return bilinear_form(AdjointFunction{w, m}, EigenFunction{u, l}, op);
        };
        CHECK(std::abs(bf(w1, a * u1 + b * u2) - (a * bf(w1, u1) + b * bf(w1, u2))) < 1e-12 * (1 + std::abs(bf(w1, u1))));
        CHECK(std::abs(bf(a * w1 + b * w2, u1) - (a * bf(w1, u1) + b * bf(w2, u1))) < 1e-12 * (1 + std::abs(bf(w1, u1))));
    }
}

TEST_CASE("gram matrix of a family") {
    const DelayOperator op(1, {{std::numbers::pi / 2.0, scalar(-1.0)}});
    const cplx i(0.0, 1.0);
    const std::vector<AdjointFunction> psi{{Eigen::RowVectorXcd::Ones(1), i}, {Eigen::RowVectorXcd::Ones(1), -i}};
    const std::vector<EigenFunction> phi{{Eigen::VectorXcd::Ones(1), i}, {Eigen::VectorXcd::Ones(1), -i}};
    const CMatrix g = bilinear_gram(psi, phi, op);
    CHECK(std::abs(g(0, 1)) < 1e-14);
    CHECK(std::abs(g(1, 0)) < 1e-14);
    CHECK(std::abs(g(0, 0) - std::conj(g(1, 1))) < 1e-14);
}

}
