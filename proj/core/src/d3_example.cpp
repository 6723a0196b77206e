#include "equnfold/d3_example.hpp"

#include "equnfold/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <thread>

namespace equnfold::d3 {

namespace {

constexpr double kPi = std::numbers::pi;

cplx omega3() { return std::polar(1.0, 2.0 * kPi / 3.0); }

}  // namespace

CMatrix rho_kappa() {
    CMatrix m = CMatrix::Zero(3, 3);
    m(0, 0) = 1.0;
    m(1, 2) = 1.0;
    m(2, 1) = 1.0;
    return m;
}

CMatrix rho_gamma() {
    CMatrix m = CMatrix::Zero(3, 3);
    m(0, 1) = 1.0;
    m(1, 2) = 1.0;
    m(2, 0) = 1.0;
    return m;
}

Representation d3_permutation_rep() {
    Representation rep = close_generators({rho_kappa(), rho_gamma()});
    if (rep.group->order() != 6) {
        throw Error(ErrorKind::Verification, "D3 closure does not have order 6");
    }
    return rep;
}

DelayOperator d3_operator(const D3ModelParams& p) {
    const CMatrix id = CMatrix::Identity(3, 3);
    return DelayOperator::merged(3, {{0.0, -id}, {p.tau_s, p.alpha * id}, {p.tau_n, p.beta * ones_minus_identity(3)}});
}

CVector v_vector() {
    CVector v(3);
    v << 1.0, omega3(), std::conj(omega3());
    return v;
}

CMatrix g8_gamma() {
    const cplx w = omega3();
    const cplx wb = std::conj(w);
    CVector d(8);
    d << w, wb, wb, w, w, wb, wb, w;
    return d.asDiagonal();
}

CMatrix g8_kappa() {
    CMatrix m = CMatrix::Zero(8, 8);
    for (int b = 0; b < 4; ++b) {
        m(2 * b, 2 * b + 1) = 1.0;
        m(2 * b + 1, 2 * b) = 1.0;
    }
    return m;
}

std::string_view to_string(Factor f) noexcept { return f == Factor::Delta1 ? "delta1" : "delta2"; }

Factor parse_factor(std::string_view s) {
    if (s == "delta1") {
        return Factor::Delta1;
    }
    if (s == "delta2") {
        return Factor::Delta2;
    }
    throw Error(ErrorKind::Structural, "unknown factor '" + std::string(s) + "' (expected delta1 or delta2)");
}

double coupling_weight(Factor f) noexcept { return f == Factor::Delta1 ? 2.0 : -1.0; }

cplx factor_value(Factor f, const D3ModelParams& p, cplx lambda) {
    return lambda + 1.0 - p.alpha * std::exp(-lambda * p.tau_s) -
           coupling_weight(f) * p.beta * std::exp(-lambda * p.tau_n);
}

cplx factor_derivative(Factor f, const D3ModelParams& p, cplx lambda) {
    return 1.0 + p.alpha * p.tau_s * std::exp(-lambda * p.tau_s) +
           coupling_weight(f) * p.beta * p.tau_n * std::exp(-lambda * p.tau_n);
}

namespace {

double base_angle(Factor f, double omega, double beta, double tau_n, int sign) {
    const double c = coupling_weight(f);
    const double x = 1.0 - c * beta * std::cos(omega * tau_n);
    const double y = omega + c * beta * std::sin(omega * tau_n);
    double theta = std::atan2(-y, x) + (sign < 0 ? kPi : 0.0);
    theta = std::fmod(theta, 2.0 * kPi);
    if (theta < 0.0) {
        theta += 2.0 * kPi;
    }
    return theta;
}

}  // namespace

CurvePoint hopf_curve(Factor f, double omega, double beta, double tau_n, int sign, int branch) {
    if (!(omega > 0.0)) {
        throw Error(ErrorKind::Structural, "hopf_curve needs omega > 0");
    }
    if (sign != 1 && sign != -1) {
        throw Error(ErrorKind::Structural, "hopf_curve sign must be +1 or -1");
    }
    const double c = coupling_weight(f);
    const double x = 1.0 - c * beta * std::cos(omega * tau_n);
    const double y = omega + c * beta * std::sin(omega * tau_n);
    CurvePoint pt;
    pt.omega = omega;
    pt.alpha = sign * std::hypot(x, y);
    pt.tau_s = (base_angle(f, omega, beta, tau_n, sign) + 2.0 * kPi * branch) / omega;
    pt.sign = sign;
    pt.branch = branch;
    pt.factor = f;
    return pt;
}

unsigned sweep_threads(unsigned requested) {
    unsigned n = requested != 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("EQUNFOLD_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) {
            n = std::min(n, static_cast<unsigned>(cap));
        }
    }
    return std::max(1U, n);
}

namespace {

std::vector<double> omega_grid(const SweepOptions& opt) {
    if (!(opt.omega_step > 0.0) || !(opt.omega_max > opt.omega_min) || !(opt.omega_min > 0.0)) {
        throw Error(ErrorKind::Structural, "omega range must satisfy 0 < min < max with a positive step");
    }
    if (opt.branch_max < opt.branch_min) {
        throw Error(ErrorKind::Structural, "branch range is empty");
    }
    const auto count = static_cast<std::size_t>(std::floor((opt.omega_max - opt.omega_min) / opt.omega_step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = opt.omega_min + static_cast<double>(i) * opt.omega_step;
    }
    return grid;
}

}  // namespace

std::vector<CurvePoint> sweep_curves(Factor f, double beta, double tau_n, const SweepOptions& opt) {
    const auto grid = omega_grid(opt);
    struct Job {
        int sign;
        int branch;
    };
    std::vector<Job> jobs;
    for (int sign : {1, -1}) {
        for (int k = opt.branch_min; k <= opt.branch_max; ++k) {
            jobs.push_back({sign, k});
        }
    }
    std::vector<std::vector<CurvePoint>> parts(jobs.size());
    const unsigned nthreads = std::min<unsigned>(sweep_threads(opt.threads), static_cast<unsigned>(jobs.size()));
    auto work = [&](unsigned t) {
        for (std::size_t j = t; j < jobs.size(); j += nthreads) {
            auto& out = parts[j];
            out.reserve(grid.size());
            for (double w : grid) {
                out.push_back(hopf_curve(f, w, beta, tau_n, jobs[j].sign, jobs[j].branch));
            }
        }
    };
    if (nthreads <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) {
            pool.emplace_back(work, t);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    std::vector<CurvePoint> all;
    for (auto& p : parts) {
        all.insert(all.end(), p.begin(), p.end());
    }
    return all;
}

void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
    os << "omega,alpha,tau_s,sign,branch,factor\n";
    const auto old = os.precision(17);
    for (const auto& p : points) {
        os << p.omega << ',' << p.alpha << ',' << p.tau_s << ',' << p.sign << ',' << p.branch << ','
           << to_string(p.factor) << '\n';
    }
    os.precision(old);
}

namespace {

struct Segment {
    int sign;
    int branch;
    int curve;
    std::size_t index;  // position along the curve
    CurvePoint a;
    CurvePoint b;
};

bool inside(const Window& w, const CurvePoint& p) {
    return p.alpha >= w.alpha_min && p.alpha <= w.alpha_max && p.tau_s >= w.tau_min && p.tau_s <= w.tau_max;
}

}  // namespace

std::vector<DoubleHopfSeed> detect_intersections(Factor f, double beta, double tau_n, const SweepOptions& opt,
                                                 const Window& window) {
    const auto points = sweep_curves(f, beta, tau_n, opt);
    const std::size_t per_curve = omega_grid(opt).size();
    std::vector<Segment> segs;
    for (std::size_t start = 0, curve = 0; start < points.size(); start += per_curve, ++curve) {
        for (std::size_t i = start; i + 1 < start + per_curve; ++i) {
            const auto& a = points[i];
            const auto& b = points[i + 1];
            // The base angle wraps at 2 pi; those jumps are not curve segments.
            if (std::abs(a.omega * a.tau_s - b.omega * b.tau_s - 2.0 * kPi * (a.branch - b.branch)) > kPi) {
                continue;
            }
            if (!inside(window, a) && !inside(window, b)) {
                continue;
            }
            segs.push_back({a.sign, a.branch, static_cast<int>(curve), i - start, a, b});
        }
    }
    std::vector<DoubleHopfSeed> seeds;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s1 = segs[i];
        const double px = s1.a.alpha;
        const double py = s1.a.tau_s;
        const double rx = s1.b.alpha - px;
        const double ry = s1.b.tau_s - py;
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            const auto& s2 = segs[j];
            if (s1.sign != s2.sign) {
                continue;
            }
            if (s1.curve == s2.curve && s2.index <= s1.index + 1) {
                continue;
            }
            const double qx = s2.a.alpha;
            const double qy = s2.a.tau_s;
            const double sx = s2.b.alpha - qx;
            const double sy = s2.b.tau_s - qy;
            const double den = rx * sy - ry * sx;
            if (den == 0.0) {
                continue;
            }
            const double dx = qx - px;
            const double dy = qy - py;
            const double t = (dx * sy - dy * sx) / den;
            const double u = (dx * ry - dy * rx) / den;
            if (t < 0.0 || t >= 1.0 || u < 0.0 || u >= 1.0) {
                continue;
            }
            DoubleHopfSeed seed;
            seed.sign = s1.sign;
            seed.branch1 = s1.branch;
            seed.branch2 = s2.branch;
            seed.omega1 = s1.a.omega + t * (s1.b.omega - s1.a.omega);
            seed.omega2 = s2.a.omega + u * (s2.b.omega - s2.a.omega);
            seed.alpha = px + t * rx;
            seed.tau_s = py + t * ry;
            if (std::abs(seed.omega1 - seed.omega2) < 10.0 * opt.omega_step) {
                continue;
            }
            if (seed.alpha < window.alpha_min || seed.alpha > window.alpha_max || seed.tau_s < window.tau_min ||
                seed.tau_s > window.tau_max) {
                continue;
            }
            seeds.push_back(seed);
        }
    }
    return seeds;
}

DoubleHopfPoint find_double_hopf(Factor f, double beta, double tau_n, const DoubleHopfSeed& seed) {
    if (std::abs(seed.omega1 - seed.omega2) <= 1e-6) {
        throw Error(ErrorKind::Structural, "not a non-resonant double Hopf: seed frequencies coincide");
    }
    Eigen::Vector4d x(seed.alpha, seed.tau_s, seed.omega1, seed.omega2);
    auto residual = [&](const Eigen::Vector4d& y) {
        const D3ModelParams p{y(0), beta, y(1), tau_n};
        const cplx f1 = factor_value(f, p, cplx(0.0, y(2)));
        const cplx f2 = factor_value(f, p, cplx(0.0, y(3)));
        return Eigen::Vector4d(f1.real(), f1.imag(), f2.real(), f2.imag());
    };
    Eigen::Vector4d r = residual(x);
    int it = 0;
    constexpr int kMaxIterations = 60;
    for (; it < kMaxIterations && r.cwiseAbs().maxCoeff() > 1e-14; ++it) {
        const D3ModelParams p{x(0), beta, x(1), tau_n};
        Eigen::Matrix4d jac = Eigen::Matrix4d::Zero();
        for (int k = 0; k < 2; ++k) {
            const cplx lambda(0.0, x(2 + k));
            const cplx e = std::exp(-lambda * p.tau_s);
            const cplx d_alpha = -e;
            const cplx d_tau = p.alpha * lambda * e;
            const cplx d_omega = cplx(0.0, 1.0) * factor_derivative(f, p, lambda);
            jac(2 * k, 0) = d_alpha.real();
            jac(2 * k + 1, 0) = d_alpha.imag();
            jac(2 * k, 1) = d_tau.real();
            jac(2 * k + 1, 1) = d_tau.imag();
            jac(2 * k, 2 + k) = d_omega.real();
            jac(2 * k + 1, 2 + k) = d_omega.imag();
        }
        const Eigen::Vector4d step = jac.fullPivLu().solve(-r);
        if (!step.allFinite()) {
            break;
        }
        double scale = 1.0;
        Eigen::Vector4d trial = x + step;
        Eigen::Vector4d rt = residual(trial);
        while (rt.norm() > r.norm() && scale > 1e-4) {
            scale *= 0.5;
            trial = x + scale * step;
            rt = residual(trial);
        }
        x = trial;
        r = rt;
        if (step.norm() * scale <= 1e-15 * (1.0 + x.norm())) {
            ++it;
            break;
        }
    }
    DoubleHopfPoint pt;
    pt.factor = f;
    pt.beta = beta;
    pt.tau_n = tau_n;
    pt.alpha = x(0);
    pt.tau_s = x(1);
    pt.omega1 = std::min(x(2), x(3));
    pt.omega2 = std::max(x(2), x(3));
    pt.residual = r.cwiseAbs().maxCoeff();
    pt.iterations = it;
    pt.seed = seed;
    if (!x.allFinite() || pt.residual > 1e-10) {
        throw Error(ErrorKind::Convergence, "double-Hopf Newton did not converge: residual " +
                                                std::to_string(pt.residual) + " after " + std::to_string(it) +
                                                " iterations at alpha=" + std::to_string(x(0)) +
                                                " tau_s=" + std::to_string(x(1)));
    }
    if (pt.omega2 - pt.omega1 <= 1e-6 || pt.omega1 <= 0.0) {
        throw Error(ErrorKind::Structural, "not a non-resonant double Hopf: refined frequencies coincide");
    }
    return pt;
}

std::vector<DoubleHopfPoint> locate_double_hopf(Factor f, double beta, double tau_n, const LocateOptions& opt) {
    const Factor other = f == Factor::Delta1 ? Factor::Delta2 : Factor::Delta1;
    std::vector<DoubleHopfPoint> out;
    for (const auto& seed : detect_intersections(f, beta, tau_n, opt.sweep, opt.window)) {
        DoubleHopfPoint pt;
        try {
            pt = find_double_hopf(f, beta, tau_n, seed);
        } catch (const Error&) {
            continue;
        }
        const auto p = pt.params();
        if (pt.tau_s < opt.min_tau || std::abs(pt.tau_s - tau_n) < opt.min_tau_gap) {
            continue;
        }
        if (pt.alpha < opt.window.alpha_min || pt.alpha > opt.window.alpha_max || pt.tau_s < opt.window.tau_min ||
            pt.tau_s > opt.window.tau_max) {
            continue;
        }
        if (std::abs(factor_value(other, p, cplx(0.0, pt.omega1))) < opt.min_other_factor ||
            std::abs(factor_value(other, p, cplx(0.0, pt.omega2))) < opt.min_other_factor) {
            continue;
        }
        const bool dup = std::any_of(out.begin(), out.end(), [&](const DoubleHopfPoint& q) {
            return std::abs(q.alpha - pt.alpha) < 1e-7 && std::abs(q.tau_s - pt.tau_s) < 1e-7 &&
                   std::abs(q.omega1 - pt.omega1) < 1e-7 && std::abs(q.omega2 - pt.omega2) < 1e-7;
        });
        if (!dup) {
            out.push_back(pt);
        }
    }
    std::sort(out.begin(), out.end(), [](const DoubleHopfPoint& a, const DoubleHopfPoint& b) {
        if (a.tau_s != b.tau_s) {
            return a.tau_s < b.tau_s;
        }
        return a.alpha < b.alpha;
    });
    return out;
}

std::string_view to_string(Case c) noexcept { return c == Case::Simple ? "simple" : "double"; }

Case parse_case(std::string_view s) {
    if (s == "simple" || s == "d3:simple") {
        return Case::Simple;
    }
    if (s == "double" || s == "d3:double") {
        return Case::Double;
    }
    throw Error(ErrorKind::Structural, "unknown case '" + std::string(s) + "' (expected d3:simple or d3:double)");
}

Factor factor_of(Case c) noexcept { return c == Case::Simple ? Factor::Delta1 : Factor::Delta2; }

std::pair<double, double> case_window(Case c) noexcept {
    return c == Case::Simple ? std::pair{-0.5, 4.0} : std::pair{0.5, 3.0};
}

DoubleHopfPoint default_point(Case c) {
    const auto [beta, tau_n] = case_window(c);
    const auto pts = locate_double_hopf(factor_of(c), beta, tau_n);
    if (pts.empty()) {
        throw Error(ErrorKind::Convergence, "no double-Hopf point found in the default window");
    }
    return pts.front();
}

std::vector<cplx> critical_eigenvalues(const DoubleHopfPoint& point) {
    return {cplx(0.0, point.omega1), cplx(0.0, -point.omega1), cplx(0.0, point.omega2), cplx(0.0, -point.omega2)};
}

std::vector<double> default_lags(const DoubleHopfPoint& point) {
    const double tau = std::max(point.tau_s, point.tau_n);
    std::vector<double> lags{0.0, point.tau_s, point.tau_n};
    auto distinct = [&](double x) {
        return std::none_of(lags.begin(), lags.end(), [&](double l) { return std::abs(l - x) <= 1e-9 * tau; });
    };
    double tau3 = 0.0;
    for (int k = 7; k >= 1; --k) {
        const double cand = tau * k / 7.0;
        if (distinct(cand)) {
            tau3 = cand;
            break;
        }
    }
    const auto eig = critical_eigenvalues(point);
    for (int attempt = 0; attempt <= 10; ++attempt) {
        std::vector<double> trial = lags;
        trial.push_back(tau3);
        if (distinct(tau3) && std::abs(exponential_matrix(eig, trial).determinant()) > 1e-10) {
            return trial;
        }
        tau3 *= 0.5;
    }
    throw Error(ErrorKind::RankDeficient, "no generic fourth delay found: M stays singular");
}

std::vector<EntryMask> structure_masks() {
    EntryMask diag = EntryMask::Constant(3, 3, false);
    EntryMask off = EntryMask::Constant(3, 3, true);
    for (int i = 0; i < 3; ++i) {
        diag(i, i) = true;
        off(i, i) = false;
    }
    return {diag, diag, off, off};
}

std::vector<std::vector<CVector>> frame_seeds(Case c) {
    if (c == Case::Simple) {
        const CVector u = CVector::Ones(3);
        return {{u}, {u}, {u}, {u}};
    }
    const CVector v = v_vector();
    const CVector vb = v.conjugate();
    return {{v, vb}, {vb, v}, {v, vb}, {vb, v}};
}

PatternReport coefficient_patterns(const UnfoldingFamily& family, double tol) {
    PatternReport rep;
    if (family.lags.size() != 4) {
        return rep;
    }
    double scale = 0.0;
    for (const auto& p : family.parameters) {
        for (const auto& a : p.coefficients) {
            scale = std::max(scale, max_abs(a));
        }
    }
    for (const auto& p : family.parameters) {
        for (std::size_t j = 0; j < 4; ++j) {
            const CMatrix& a = p.coefficients[j];
            const bool diagonal = j < 2;
            const cplx ref = diagonal ? a(0, 0) : a(0, 1);
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) {
                    const bool on = (r == c) == diagonal;
                    rep.residual = std::max(rep.residual, std::abs(on ? a(r, c) - ref : a(r, c)));
                }
            }
        }
    }
    rep.ok = !family.parameters.empty() && rep.residual <= tol * std::max(1.0, scale);
    return rep;
}

CMatrix epsilon_matrix(const UnfoldingFamily& family) {
    CMatrix e(4, static_cast<Eigen::Index>(family.parameters.size()));
    for (std::size_t m = 0; m < family.parameters.size(); ++m) {
        const auto& a = family.parameters[m].coefficients;
        const auto col = static_cast<Eigen::Index>(m);
        e(0, col) = a.at(0)(0, 0);
        e(1, col) = a.at(1)(0, 0);
        e(2, col) = a.at(2)(0, 1);
        e(3, col) = a.at(3)(0, 1);
    }
    return e;
}

CaseResult run_case(Case c, const DoubleHopfPoint& point, const CaseOptions& options) {
    if (point.factor != factor_of(c)) {
        throw Error(ErrorKind::Structural, "double-Hopf point belongs to the other factor");
    }
    if (std::abs(point.tau_s - point.tau_n) <= 1e-9) {
        throw Error(ErrorKind::Structural, "tau_s and tau_n must differ for the unfolding delays");
    }
    Representation rho = d3_permutation_rep();
    EigenbasisOptions eopt;
    eopt.seeds = frame_seeds(c);
    SpectralFrame frame = eigenbasis(d3_operator(point.params()), critical_eigenvalues(point), eopt);
    frame.G = induce_representation(frame, rho);
    OrbitGeometry geometry = orbit_geometry(frame.B, jordan_spec_of_diagonal(frame.B));
    std::vector<double> lags = options.lags ? *options.lags : default_lags(point);
    AssemblyOptions aopt;
    aopt.masks = structure_masks();
    aopt.select_miniversal = options.select_miniversal;
    AssemblyResult assembly = assemble_gamma_unfolding(rho, frame, geometry, lags, aopt);
    CaseResult res{c, point, std::move(rho), std::move(frame), std::move(geometry), std::move(assembly),
                   std::nullopt, std::move(lags), CMatrix(), 0.0, CMatrix(), CMatrix(), {}, {}};
    const auto eig = res.frame.distinct_eigenvalues();
    res.M = exponential_matrix(eig, res.lags);
    res.det_M = res.M.rows() == res.M.cols() ? std::abs(res.M.determinant()) : 0.0;
    res.epsilon = epsilon_matrix(res.assembly.family);
    res.patterns = coefficient_patterns(res.assembly.family);
    if (options.select_miniversal) {
        res.real = realify(res.assembly.family);
        res.epsilon_real = epsilon_matrix(res.real->family);
        res.real_patterns = coefficient_patterns(res.real->family);
    }
    return res;
}

cplx eta1(const CVector& nu) {
    const cplx w = omega3();
    return nu(0) + std::conj(w) * nu(1) + w * nu(2);
}

cplx eta2(const CVector& nu) {
    const cplx w = omega3();
    return nu(0) + w * nu(1) + std::conj(w) * nu(2);
}

CMatrix n_bar(const Representation& rho, const Representation& g, const CVector& nu, int p) {
    CMatrix n = CMatrix::Zero(rho.dim, g.dim);
    n.col(p - 1) = nu;
    return static_cast<double>(rho.group->order()) * equivariant_average(rho, g, n);
}

CMatrix n_bar_expected(const CVector& nu, int p) {
    const CVector v = v_vector();
    const CVector vb = v.conjugate();
    CMatrix out = CMatrix::Zero(3, 8);
    switch (p) {
        case 1:
        case 5:
            out.col(p - 1) = eta1(nu) * v;
            out.col(p) = eta1(nu) * vb;
            break;
        case 4:
        case 8:
            out.col(p - 2) = eta1(nu) * vb;
            out.col(p - 1) = eta1(nu) * v;
            break;
        case 3:
        case 7:
            out.col(p - 1) = eta2(nu) * vb;
            out.col(p) = eta2(nu) * v;
            break;
        case 2:
        case 6:
            out.col(p - 2) = eta2(nu) * v;
            out.col(p - 1) = eta2(nu) * vb;
            break;
        default:
            throw Error(ErrorKind::Structural, "column index must be in 1..8");
    }
    return out;
}

}  // namespace equnfold::d3
