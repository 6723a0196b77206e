#include "equnfold/d3_example.hpp"

#include <benchmark/benchmark.h>

using namespace equnfold;

static void BM_CharMatrixDet(benchmark::State& state) {
    const auto op = d3::d3_operator({-0.7, 0.4, 1.3, 2.9});
    cplx l(0.1, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(char_matrix(op, l).determinant());
        l += cplx(0.0, 1e-6);
    }
}
BENCHMARK(BM_CharMatrixDet);

static void BM_FindRoot(benchmark::State& state) {
    const auto c = d3::hopf_curve(d3::Factor::Delta1, 1.7, -0.5, 4.0, 1, 1);
    const auto op = d3::d3_operator({c.alpha, -0.5, c.tau_s, 4.0});
    for (auto _ : state) {
        benchmark::DoNotOptimize(find_root(op, cplx(0.05, 1.65)).root);
    }
}
BENCHMARK(BM_FindRoot);

static void BM_BilinearForm(benchmark::State& state) {
    const auto op = d3::d3_operator({-0.7, 0.4, 1.3, 2.9});
    const AdjointFunction psi{Eigen::RowVectorXcd::Ones(3), cplx(0.0, 1.1)};
    const EigenFunction phi{Eigen::VectorXcd::Ones(3), cplx(0.0, 2.3)};
    const bool quad = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(quad ? bilinear_form_quadrature(psi, phi, op) : bilinear_form(psi, phi, op));
    }
}
BENCHMARK(BM_BilinearForm)->Arg(0)->Arg(1);

static void BM_SweepCurves(benchmark::State& state) {
    d3::SweepOptions opt;
    opt.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(d3::sweep_curves(d3::Factor::Delta1, -0.5, 4.0, opt).size());
    }
}
BENCHMARK(BM_SweepCurves)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_LocateDoubleHopf(benchmark::State& state) {
    const auto c = static_cast<d3::Case>(state.range(0));
    const auto [beta, tn] = d3::case_window(c);
    for (auto _ : state) {
        benchmark::DoNotOptimize(d3::locate_double_hopf(d3::factor_of(c), beta, tn).size());
    }
}
BENCHMARK(BM_LocateDoubleHopf)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_RunCase(benchmark::State& state) {
    const auto c = static_cast<d3::Case>(state.range(0));
    const auto pt = d3::default_point(c);
    for (auto _ : state) {
        benchmark::DoNotOptimize(d3::run_case(c, pt).assembly.family.parameters.size());
    }
}
BENCHMARK(BM_RunCase)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_OrbitGeometry(benchmark::State& state) {
    const auto c = static_cast<int>(state.range(0));
    CMatrix b = CMatrix::Zero(c, c);
    for (int i = 0; i < c; ++i) {
        b(i, i) = cplx(0.0, static_cast<double>(i % 4) + 1.0);
    }
    const auto spec = jordan_spec_of_diagonal(b);
    for (auto _ : state) {
        benchmark::DoNotOptimize(orbit_geometry(b, spec).codimension);
    }
}
BENCHMARK(BM_OrbitGeometry)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
