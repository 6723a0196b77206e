#include "equnfold/d3_example.hpp"
#include "equnfold/errors.hpp"
#include "equnfold/unfold_engine.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace equnfold;

namespace {

CMatrix scalar(cplx x) {
    CMatrix m(1, 1);
    m(0, 0) = x;
    return m;
}

CMatrix diag(std::initializer_list<cplx> d) {
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (cplx x : d) {
        m(i, i) = x;
        ++i;
    }
    return m;
}

int rank_of(const std::vector<CMatrix>& ms) {
    if (ms.empty()) {
        return 0;
    }
    return numerical_rank(vec_columns(ms));
}

const d3::CaseResult& simple_case() {
    static const d3::CaseResult r = d3::run_case(d3::Case::Simple, d3::default_point(d3::Case::Simple));
    return r;
}

const d3::CaseResult& double_case() {
    static const d3::CaseResult r = d3::run_case(d3::Case::Double, d3::default_point(d3::Case::Double));
    return r;
}

}  // namespace

TEST_SUITE("unfold_engine") {

TEST_CASE("codimension closed form") {
    const cplx a(0, 1.3);
    const cplx b(0, 2.1);
    CHECK(codimension_formula({{a, {1}}, {-a, {1}}, {b, {1}}, {-b, {1}}}) == 4);
    CHECK(codimension_formula({{a, {1, 1}}, {-a, {1, 1}}, {b, {1, 1}}, {-b, {1, 1}}}) == 16);
    CHECK(codimension_formula({{0.0, {3}}}) == 3);
    CHECK(codimension_formula({{0.0, {1, 2}}}) == 2 + 3);  // sorted to {2, 1}
}

TEST_CASE("orbit geometry of the two diagonal matrices") {
    const double w1 = 1.3;
    const double w2 = 2.1;
    const cplx i(0, 1);
    const CMatrix b4 = diag({i * w1, -i * w1, i * w2, -i * w2});
    const auto g4 = orbit_geometry(b4, jordan_spec_of_diagonal(b4));
    CHECK(g4.codimension == 4);
    REQUIRE(g4.complement_positions.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(g4.complement_positions[static_cast<std::size_t>(k)] == std::pair<int, int>{k, k});
    }

    const CMatrix b8 = diag({i * w1, i * w1, -i * w1, -i * w1, i * w2, i * w2, -i * w2, -i * w2});
    const auto g8 = orbit_geometry(b8, jordan_spec_of_diagonal(b8));
    CHECK(g8.codimension == 16);
    CHECK(g8.tangent_basis.size() == 48);
    // Ordering (column within block, row within block, block).
    const std::vector<std::pair<int, int>> expected{{0, 0}, {2, 2}, {4, 4}, {6, 6}, {1, 0}, {3, 2}, {5, 4}, {7, 6},
                                                    {0, 1}, {2, 3}, {4, 5}, {6, 7}, {1, 1}, {3, 3}, {5, 5}, {7, 7}};
    CHECK(g8.complement_positions == expected);
}

TEST_CASE("zero matrix has full codimension") {
    const auto g = orbit_geometry(CMatrix::Zero(3, 3), {{0.0, {1, 1, 1}}});
    CHECK(g.codimension == 9);
    CHECK(g.tangent_basis.empty());
}

TEST_CASE("orbit geometry rejects a wrong Jordan spec") {
    CMatrix b = CMatrix::Zero(2, 2);
    b(0, 1) = 1.0;
    CHECK_THROWS_AS((void)orbit_geometry(b, {{0.0, {1, 1}}}), Error);
    CHECK(orbit_geometry(b, {{0.0, {2}}}).codimension == 2);
}

TEST_CASE("property: rank-based codimension and direct sums on random Jordan matrices") {
    gen::Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto spec = rng.jordan_spec(8);
        const CMatrix b = gen::jordan_matrix(spec);
        const int c = static_cast<int>(b.rows());
        const auto geo = orbit_geometry(b, spec);
        CHECK(geo.codimension == codimension_formula(spec));
        CHECK(c * c - numerical_rank(ad_matrix(b)) == geo.codimension);
        std::vector<CMatrix> all = geo.tangent_basis;
        all.insert(all.end(), geo.complement_basis.begin(), geo.complement_basis.end());
        CHECK(rank_of(all) == c * c);
        // Complement commutes with B^H.
        for (const auto& w : geo.complement_basis) {
            CHECK(max_abs(w * b.adjoint() - b.adjoint() * w) < 1e-10);
        }
    }
}

TEST_CASE("gamma orbit geometry and the centraliser identity") {
    const auto& s = simple_case();
    CHECK(s.assembly.gamma.commutant.size() == 16);
    CHECK(s.assembly.gamma.tangent_basis.size() == 12);
    CHECK(s.assembly.gamma.centralizer_dim == 4);
    const auto& d = double_case();
    CHECK(d.assembly.gamma.commutant.size() == 16);
    CHECK(d.assembly.gamma.tangent_basis.size() == 12);
    CHECK(d.assembly.gamma.centralizer_dim == 4);
    CHECK(d.assembly.gamma.codimension() == d.assembly.gamma.centralizer_dim);
}

TEST_CASE("projection of the orbit tangent space is the gamma tangent space") {
    for (const auto* r : {&simple_case(), &double_case()}) {
        const auto& g = *r->frame.G;
        const auto projected = project_unfolding_directions(r->geometry.tangent_basis, g);
        const auto& tg = r->assembly.gamma.tangent_basis;
        CHECK(rank_of(projected) == static_cast<int>(tg.size()));
        std::vector<CMatrix> both = projected;
        both.insert(both.end(), tg.begin(), tg.end());
        CHECK(rank_of(both) == static_cast<int>(tg.size()));
    }
}

TEST_CASE("projection leaves equivariant directions unchanged") {
    gen::Rng rng(32);
    const auto& d = double_case();
    const auto& g = *d.frame.G;
    const CMatrix x = rng.combination(d.assembly.gamma.commutant);
    const std::vector<CMatrix> one{x};
    CHECK(max_abs(project_unfolding_directions(one, g).front() - x) < 1e-12);
    auto grp = std::make_shared<const FiniteGroup>(std::vector<std::vector<int>>{{0}});
    const std::vector<CMatrix> r4{rng.matrix(4, 4)};
    CHECK(max_abs(project_unfolding_directions(r4, trivial_representation(grp, 4)).front() - r4.front()) == 0.0);
}

TEST_CASE("theta of the complement basis is the identity") {
    const CMatrix b = diag({cplx(0, 1), cplx(0, -1), cplx(0, 2)});
    const auto geo = orbit_geometry(b, jordan_spec_of_diagonal(b));
    const auto t = theta_extract(geo, geo.complement_basis);
    CHECK(max_abs(t.theta - CMatrix::Identity(3, 3)) < 1e-12);
    CHECK(t.selected_rows == std::vector<int>{0, 1, 2});
    CHECK(t.rank == 3);
}

TEST_CASE("property: theta reproduces directions modulo the tangent space") {
    gen::Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = rng.jordan_spec(5);
        const CMatrix b = gen::jordan_matrix(spec);
        const auto geo = orbit_geometry(b, spec);
        std::vector<CMatrix> dirs;
        const int p = rng.integer(1, 6);
        for (int k = 0; k < p; ++k) {
            dirs.push_back(rng.matrix(b.rows(), b.cols()));
        }
        // Repeat a direction so the selection has to skip it.
        dirs.push_back(dirs.front() * cplx(2.0, -1.0));
        const auto t = theta_extract(geo, dirs);
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            CMatrix rest = dirs[i];
            for (std::size_t j = 0; j < geo.complement_basis.size(); ++j) {
                rest -= t.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * geo.complement_basis[j];
            }
            // rest lies in the tangent space.
            std::vector<CMatrix> span = geo.tangent_basis;
            const int base = rank_of(span);
            span.push_back(rest);
            CHECK((max_abs(rest) < 1e-10 || rank_of(span) == base));
        }
        CHECK(t.rank == numerical_rank(t.theta));
        CHECK(static_cast<int>(t.selected_rows.size()) == t.rank);
        CHECK(std::find(t.selected_rows.begin(), t.selected_rows.end(), static_cast<int>(dirs.size()) - 1) ==
              t.selected_rows.end());
        CHECK(std::is_sorted(t.selected_rows.begin(), t.selected_rows.end()));
    }
}

TEST_CASE("scalar R matrix is the inverse of psi(0)") {
    // z' = 0.5 z with the single root 0.5: Psi(0) = 1, so scale the seed.
    const DelayOperator op(1, {{0.0, scalar(0.5)}});
    auto frame = eigenbasis(op, {0.5});
    frame.psi[0].direction *= 2.0;
    frame.phi[0].direction /= 2.0;
    const auto geo = orbit_geometry(frame.B, jordan_spec_of_diagonal(frame.B));
    const auto r = build_R_matrices(frame, geo);
    REQUIRE(r.size() == 1);
    CHECK(std::abs(r[0](0, 0) - 0.5) < 1e-15);
}

TEST_CASE("scalar one-parameter unfolding") {
    const DelayOperator op(1, {{0.0, scalar(-1.0)}, {1.0, scalar(0.5)}});
    const cplx root = find_root(op, -0.5).root;
    auto frame = eigenbasis(op, {root});
    auto grp = std::make_shared<const FiniteGroup>(std::vector<std::vector<int>>{{0}});
    const auto triv = trivial_representation(grp, 1);
    frame.G = induce_representation(frame, triv);
    const auto geo = orbit_geometry(frame.B, jordan_spec_of_diagonal(frame.B));
    const std::vector<double> lags{0.0};
    const auto res = assemble_gamma_unfolding(triv, frame, geo, lags);
    REQUIRE(res.family.parameters.size() == 1);
    const cplx a0 = res.family.parameters[0].coefficients[0](0, 0);
    CHECK(std::abs(a0 - 1.0 / (frame.psi[0].direction(0) * frame.phi[0].direction(0))) < 1e-12);
    CHECK(res.versality.miniversal);
}

TEST_CASE("realisation of a scalar target on four lags") {
    // Exponential system with omega1 = 1, omega2 = 2 and lags {0, 1, 2, 3}.
    const cplx i(0, 1);
    const std::vector<cplx> eig{i, -i, 2.0 * i, -2.0 * i};
    const std::vector<double> lags{0.0, 1.0, 2.0, 3.0};
    const CMatrix m = exponential_matrix(eig, lags);
    for (int l = 0; l < 4; ++l) {
        for (int j = 0; j < 4; ++j) {
            CHECK(std::abs(m(l, j) - std::exp(-eig[static_cast<std::size_t>(l)] * lags[static_cast<std::size_t>(j)])) <
                  1e-15);
        }
    }
    CVector rhs = CVector::Zero(4);
    rhs(0) = 1.0;
    const CVector x = m.fullPivLu().solve(rhs);
    CHECK((m * x - rhs).norm() < 1e-10);

    // Same solve through the realisation engine for a scalar operator whose
    // frame is u = 1 at those eigenvalues.
    SpectralFrame frame{DelayOperator(1, {{0.0, scalar(0.0)}}), eig, {}, {}, CMatrix(), std::nullopt};
    for (cplx e : eig) {
        frame.phi.push_back({CVector::Ones(1), e});
        frame.psi.push_back({Eigen::RowVectorXcd::Ones(1), e});
    }
    CMatrix r = CMatrix::Zero(1, 4);
    r(0, 0) = 1.0;
    const auto sol = solve_delay_realization(frame, lags, r);
    CHECK(sol.residual < 1e-10);
    CHECK(sol.stacked_rank == 4);
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(sol.coefficients[static_cast<std::size_t>(j)](0, 0) - x(j)) < 1e-10);
    }
    // Equal lags make the system rank deficient.
    const std::vector<double> equal{0.0, 1.0, 1.0, 3.0};
    CHECK(std::abs(exponential_matrix(eig, equal).determinant()) < 1e-12);
    CHECK_THROWS_AS((void)solve_delay_realization(frame, equal, r), Error);
}

TEST_CASE("infeasible masks are reported") {
    const auto& s = simple_case();
    // Only diagonal entries at every lag cannot express J - I patterns, but
    // with four lags the diagonal alone still spans; use a single lag instead.
    std::vector<EntryMask> masks{EntryMask::Constant(3, 3, false)};
    masks[0](0, 0) = true;
    const std::vector<double> lags{0.0};
    CHECK_THROWS_AS((void)solve_delay_realization(s.frame, lags, s.assembly.R_projected.front(), masks), Error);
}

TEST_CASE("stacked rank and the default delay set") {
    const auto& d = double_case();
    CHECK(stacked_phi_rank(d.frame, d.lags) == 8);
    const std::vector<double> two{0.0, d.point.tau_s};
    CHECK(stacked_phi_rank(d.frame, two) == 4);
    const auto lags = default_delay_set(d.frame);
    CHECK(stacked_phi_rank(d.frame, lags) == 8);
    CHECK(lags.front() == 0.0);
}

TEST_CASE("projection identity for random equivariant operators") {
    gen::Rng rng(34);
    for (const auto* r : {&simple_case(), &double_case()}) {
        const auto& rho = r->rho;
        const auto& g = *r->frame.G;
        for (int trial = 0; trial < 20; ++trial) {
            const CMatrix a = rng.matrix(3, 3);
            const double lag = r->lags[static_cast<std::size_t>(rng.integer(0, 3))];
            const CMatrix lhs = equivariant_average(g, g, r->frame.psi_at(0) * a * r->frame.phi_at(-lag));
            const CMatrix rhs = r->frame.psi_at(0) * equivariant_average(rho, rho, a) * r->frame.phi_at(-lag);
            CHECK(max_abs(lhs - rhs) < 1e-10);
            // Intertwiner form on the n x c side.
            const CMatrix x = rng.matrix(3, r->frame.size());
            const CMatrix px = equivariant_average(rho, g, x);
            const CMatrix pcx = equivariant_average(g, g, r->frame.psi_at(0) * x);
            CHECK(max_abs(pcx - r->frame.psi_at(0) * px) < 1e-10);
        }
    }
}

TEST_CASE("simple case assembly") {
    const auto& s = simple_case();
    CHECK(s.frame.size() == 4);
    CHECK(s.geometry.codimension == 4);
    CHECK(s.assembly.theta.rank == 4);
    CHECK(s.assembly.theta.selected_rows == std::vector<int>{0, 1, 2, 3});
    const CMatrix& th = s.assembly.theta.theta;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i == j) {
                CHECK(std::abs(th(i, j)) > 1e-3);
            } else {
                CHECK(std::abs(th(i, j)) < 1e-8);
            }
        }
    }
    // Diagonal entry k equals sum_i psi_k(0)_i times the R vector weight,
    // which the R construction normalises to 1.
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(th(k, k) - 1.0) < 1e-8);
    }
    CHECK(s.assembly.versality.versal);
    CHECK(s.assembly.versality.miniversal);
    CHECK(s.assembly.versality.tangent_dim + s.assembly.versality.parameter_count == 16);
    CHECK(s.assembly.reconstruction_residual < 1e-9);
    CHECK(s.assembly.equivariance_residual < 1e-10);
    CHECK(s.patterns.ok);
    CHECK(s.patterns.residual < 1e-8);
    CHECK(s.assembly.projection_identity_residual < 1e-10);
}

TEST_CASE("simple case scalar system") {
    // The family's scalars s = (a0, a1, 2 b2, 2 b3) solve M s = eta_m e_m.
    const auto& s = simple_case();
    const CMatrix scale = diag({1.0, 1.0, 2.0, 2.0});
    const CMatrix ms = s.M * scale * s.epsilon;
    for (int m = 0; m < 4; ++m) {
        for (int l = 0; l < 4; ++l) {
            if (l != m) {
                CHECK(std::abs(ms(l, m)) < 1e-9);
            }
        }
        CHECK(std::abs(ms(m, m)) > 1e-3);
    }
}

TEST_CASE("double case assembly") {
    const auto& d = double_case();
    CHECK(d.frame.size() == 8);
    CHECK(d.geometry.codimension == 16);
    REQUIRE(d.assembly.directions.size() == 16);
    for (int m = 4; m < 12; ++m) {
        CHECK(max_abs(d.assembly.directions[static_cast<std::size_t>(m)]) < 1e-10);
        CHECK(max_abs(d.assembly.R_projected[static_cast<std::size_t>(m)]) < 1e-10);
    }
    const CMatrix& th = d.assembly.theta.theta;
    CHECK(d.assembly.theta.rank == 4);
    CHECK(d.assembly.theta.selected_rows == std::vector<int>{0, 1, 2, 3});
    CHECK(th.middleRows(4, 8).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(max_abs(th.middleRows(12, 4) - th.topRows(4)) < 1e-10);
    CHECK(d.assembly.versality.miniversal);
    CHECK(d.assembly.versality.tangent_dim == 12);
    CHECK(d.assembly.versality.parameter_count == 4);
    CHECK(d.patterns.ok);
}

TEST_CASE("all directions kept gives a versal but not minimal family") {
    d3::CaseOptions opt;
    opt.select_miniversal = false;
    const auto d = d3::run_case(d3::Case::Double, d3::default_point(d3::Case::Double), opt);
    CHECK(d.assembly.versality.versal);
    CHECK_FALSE(d.assembly.versality.miniversal);
    CHECK(d.assembly.family.parameters.size() == 16);
}

TEST_CASE("versality fails for tangent directions") {
    const auto& s = simple_case();
    std::vector<CMatrix> dirs;
    for (int k = 0; k < 4; ++k) {
        dirs.push_back(s.assembly.gamma.tangent_basis[static_cast<std::size_t>(k)]);
    }
    const auto rep = verify_gamma_versality(s.frame.B, *s.frame.G, dirs);
    CHECK_FALSE(rep.versal);
    CHECK(rep.deficiency == 4);
}

TEST_CASE("family evaluation and directions") {
    const auto& s = simple_case();
    const auto& fam = s.assembly.family;
    const std::vector<cplx> zero(4, 0.0);
    const auto base = fam.at(zero);
    for (double l : {0.0, 0.5, 2.0}) {
        const cplx lam(0.1, l);
        CHECK(max_abs(char_matrix(base, lam) - char_matrix(s.frame.op, lam)) < 1e-12);
    }
    const auto dirs = fam.directions(s.frame);
    REQUIRE(dirs.size() == 4);
    for (int m = 0; m < 4; ++m) {
        CHECK(max_abs(dirs[static_cast<std::size_t>(m)] - s.assembly.directions[static_cast<std::size_t>(m)]) < 1e-9);
    }
}

TEST_CASE("realified families") {
    for (const auto* r : {&simple_case(), &double_case()}) {
        REQUIRE(r->real.has_value());
        const auto& rf = *r->real;
        CHECK(rf.family.parameters.size() == 4);
        for (const auto& p : rf.family.parameters) {
            for (const auto& c : p.coefficients) {
                CHECK(c.imag().cwiseAbs().maxCoeff() < 1e-12);
            }
        }
        CHECK(rf.inverse_condition > 1e-8);
        CHECK(r->real_patterns.ok);
        CHECK(inverse_condition(r->epsilon) > 1e-8);
        const auto rep = verify_gamma_versality(r->frame.B, *r->frame.G, rf.family.directions(r->frame));
        CHECK(rep.miniversal);
    }
}

TEST_CASE("realify leaves a real family alone and rejects unpaired parameters") {
    const auto& s = simple_case();
    const auto twice = realify(s.real->family);
    for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t j = 0; j < twice.family.lags.size(); ++j) {
            CHECK(max_abs(twice.family.parameters[m].coefficients[j] - s.real->family.parameters[m].coefficients[j]) <
                  1e-14);
        }
    }
    UnfoldingFamily lone = s.assembly.family;
    lone.parameters.resize(1);
    CHECK_THROWS_AS((void)realify(lone), Error);
}

}
