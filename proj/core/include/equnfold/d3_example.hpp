#pragma once

// Three identical neurons with self and nearest-neighbour delays:
//   z'(t) = -z(t) + alpha z(t - tau_s) + beta (J - I) z(t - tau_n),
// D3 acting by permuting the cells. Hopf curves, double-Hopf points and
// the two unfolding cases (simple and double imaginary eigenvalues).

#include "equnfold/delay_system.hpp"
#include "equnfold/group_algebra.hpp"
#include "equnfold/spectral_frame.hpp"
#include "equnfold/unfold_engine.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace equnfold::d3 {

struct D3ModelParams {
    double alpha = 0.0;
    double beta = 0.0;
    double tau_s = 1.0;
    double tau_n = 1.0;
};

/// Element indices of the generators in d3_permutation_rep().
inline constexpr int kKappa = 1;
inline constexpr int kGamma = 2;

[[nodiscard]] CMatrix rho_kappa();
[[nodiscard]] CMatrix rho_gamma();

/// Permutation representation on C^3 closed from rho(kappa), rho(gamma).
[[nodiscard]] Representation d3_permutation_rep();

[[nodiscard]] DelayOperator d3_operator(const D3ModelParams& p);

/// v = (1, w, conj w) with w = exp(2 pi i / 3).
[[nodiscard]] CVector v_vector();

/// Generator matrices of the induced action in the double case, in the
/// (gamma, kappa) order.
[[nodiscard]] CMatrix g8_gamma();
[[nodiscard]] CMatrix g8_kappa();

enum class Factor { Delta1, Delta2 };

[[nodiscard]] std::string_view to_string(Factor f) noexcept;
/// Accepts "delta1" / "delta2". Throws Error(Structural) otherwise.
[[nodiscard]] Factor parse_factor(std::string_view s);

/// 2 for Delta1, -1 for Delta2.
[[nodiscard]] double coupling_weight(Factor f) noexcept;

/// lambda + 1 - alpha e^{-lambda tau_s} - c beta e^{-lambda tau_n}.
[[nodiscard]] cplx factor_value(Factor f, const D3ModelParams& p, cplx lambda);
[[nodiscard]] cplx factor_derivative(Factor f, const D3ModelParams& p, cplx lambda);

struct CurvePoint {
    double omega = 0.0;
    double alpha = 0.0;
    double tau_s = 0.0;
    int sign = 1;
    int branch = 0;
    Factor factor = Factor::Delta1;
};

/// Point of the Hopf curve Delta_f(i omega) = 0 on the given sign/branch.
/// Throws Error(Structural) for omega <= 0 or sign not +-1.
[[nodiscard]] CurvePoint hopf_curve(Factor f, double omega, double beta, double tau_n, int sign, int branch);

struct SweepOptions {
    double omega_min = 0.05;
    double omega_max = 5.0;
    double omega_step = 0.005;
    int branch_min = 0;
    int branch_max = 3;
    unsigned threads = 0;  // 0: hardware concurrency capped by EQUNFOLD_THREADS
};

/// Threads for sweeps: hardware concurrency, capped by EQUNFOLD_THREADS.
[[nodiscard]] unsigned sweep_threads(unsigned requested = 0);

/// Every (omega, sign, branch) sample, ordered by sign (+ then -), branch,
/// then omega. Throws Error(Structural) on an empty or reversed range.
[[nodiscard]] std::vector<CurvePoint> sweep_curves(Factor f, double beta, double tau_n, const SweepOptions& opt);

void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& points);

struct Window {
    double alpha_min = -4.0;
    double alpha_max = 4.0;
    double tau_min = 0.0;
    double tau_max = 10.0;
};

struct DoubleHopfSeed {
    int sign = 1;
    int branch1 = 0;
    int branch2 = 0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    double alpha = 0.0;
    double tau_s = 0.0;
};

/// Crossings of curve polylines of equal sign inside the window.
[[nodiscard]] std::vector<DoubleHopfSeed> detect_intersections(Factor f, double beta, double tau_n,
                                                               const SweepOptions& opt, const Window& window);

struct DoubleHopfPoint {
    Factor factor = Factor::Delta1;
    double beta = 0.0;
    double tau_n = 0.0;
    double alpha = 0.0;
    double tau_s = 0.0;
    double omega1 = 0.0;  // omega1 < omega2
    double omega2 = 0.0;
    double residual = 0.0;
    int iterations = 0;
    DoubleHopfSeed seed;

    [[nodiscard]] D3ModelParams params() const { return {alpha, beta, tau_s, tau_n}; }
};

/// Newton on (alpha, tau_s, omega1, omega2) for Re/Im Delta_f(i omega_k) = 0.
/// Throws Error(Structural) "not a non-resonant double Hopf" when the
/// frequencies coincide, Error(Convergence) on failure.
[[nodiscard]] DoubleHopfPoint find_double_hopf(Factor f, double beta, double tau_n, const DoubleHopfSeed& seed);

struct LocateOptions {
    SweepOptions sweep;
    Window window;
    double min_tau = 0.1;           // tau_s bounded away from 0
    double min_tau_gap = 0.1;       // |tau_s - tau_n|
    double min_other_factor = 1e-3; // the other factor must not vanish at i omega
};

/// Sweep, refine and deduplicate; the result is sorted by tau_s, then alpha.
/// Points violating the selection policy are dropped.
[[nodiscard]] std::vector<DoubleHopfPoint> locate_double_hopf(Factor f, double beta, double tau_n,
                                                              const LocateOptions& opt = {});

enum class Case { Simple, Double };

[[nodiscard]] std::string_view to_string(Case c) noexcept;
/// Accepts "simple"/"double" and the "d3:simple"/"d3:double" presets.
[[nodiscard]] Case parse_case(std::string_view s);
[[nodiscard]] Factor factor_of(Case c) noexcept;
/// Parameters of the window used for each case: beta, tau_n.
[[nodiscard]] std::pair<double, double> case_window(Case c) noexcept;

/// The first point of locate_double_hopf for the case window.
[[nodiscard]] DoubleHopfPoint default_point(Case c);

/// {0, tau_s, tau_n, tau_3} with tau_3 the largest k tau / 7 distinct from
/// the others (tau = max lag), halved while |det M| <= 1e-10.
[[nodiscard]] std::vector<double> default_lags(const DoubleHopfPoint& point);

/// Diagonal masks at lags 0, tau_s; off-diagonal masks at tau_n, tau_3.
[[nodiscard]] std::vector<EntryMask> structure_masks();

/// Eigenvalues {i w1, -i w1, i w2, -i w2}.
[[nodiscard]] std::vector<cplx> critical_eigenvalues(const DoubleHopfPoint& point);

/// Direction seeds for eigenbasis: u = (1,1,1) in the simple case and
/// (v, conj v), (conj v, v) blocks in the double case.
[[nodiscard]] std::vector<std::vector<CVector>> frame_seeds(Case c);

struct PatternReport {
    double residual = 0.0;  // largest entry outside the expected pattern
    bool ok = false;
};

/// Checks that coefficients are a I at lags 0 and tau_s and b (J - I) at
/// tau_n and tau_3, for every parameter.
[[nodiscard]] PatternReport coefficient_patterns(const UnfoldingFamily& family, double tol = 1e-8);

/// Rows (a at lag 0, a at tau_s, b at tau_n, b at tau_3); one column per
/// parameter.
[[nodiscard]] CMatrix epsilon_matrix(const UnfoldingFamily& family);

struct CaseResult {
    Case which = Case::Simple;
    DoubleHopfPoint point;
    Representation rho;
    SpectralFrame frame;
    OrbitGeometry geometry;
    AssemblyResult assembly;
    std::optional<RealFamily> real;
    std::vector<double> lags;
    CMatrix M;
    double det_M = 0.0;
    CMatrix epsilon;       // complex family
    CMatrix epsilon_real;  // real family (empty without realification)
    PatternReport patterns;
    PatternReport real_patterns;
};

struct CaseOptions {
    bool select_miniversal = true;
    std::optional<std::vector<double>> lags;
};

/// Frame, induced representation, Gamma-unfolding with the structure
/// masks, and realification.
[[nodiscard]] CaseResult run_case(Case c, const DoubleHopfPoint& point, const CaseOptions& options = {});

/// Nbar_p = sum_g rho(g) N_p G(g^{-1}) (unnormalised), N_p holding nu in
/// column p (1-based).
[[nodiscard]] CMatrix n_bar(const Representation& rho, const Representation& g, const CVector& nu, int p);

/// Closed form of Nbar_p in the double case: two nonzero columns built from
/// eta_1 or eta_2 of nu times v or conj v.
[[nodiscard]] CMatrix n_bar_expected(const CVector& nu, int p);

/// eta_1(nu) = nu1 + conj(w) nu2 + w nu3, eta_2(nu) = nu1 + w nu2 + conj(w) nu3.
[[nodiscard]] cplx eta1(const CVector& nu);
[[nodiscard]] cplx eta2(const CVector& nu);

}  // namespace equnfold::d3
