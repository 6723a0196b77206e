#include "equnfold/unfold_engine.hpp"

#include "equnfold/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

namespace equnfold {

int codimension_formula(const JordanSpec& spec) {
    int total = 0;
    for (const auto& eig : spec) {
        std::vector<int> sizes = eig.sizes;
        std::sort(sizes.begin(), sizes.end(), std::greater<>());
        for (std::size_t l = 0; l < sizes.size(); ++l) {
            total += (2 * static_cast<int>(l) + 1) * sizes[l];
        }
    }
    return total;
}

JordanSpec jordan_spec_of_diagonal(const CMatrix& b, double tol) {
    JordanSpec spec;
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        const cplx l = b(i, i);
        auto it = std::find_if(spec.begin(), spec.end(),
                               [&](const JordanBlocks& e) { return std::abs(e.eigenvalue - l) <= tol; });
        if (it == spec.end()) {
            spec.push_back({l, {1}});
        } else {
            it->sizes.push_back(1);
        }
    }
    return spec;
}

CMatrix ad_matrix(const CMatrix& b) {
    const auto c = b.rows();
    // vec(BY - YB) = (I kron B - B^T kron I) vec Y
    CMatrix ad = CMatrix::Zero(c * c, c * c);
    for (Eigen::Index i = 0; i < c; ++i) {
        ad.block(i * c, i * c, c, c) += b;
        for (Eigen::Index j = 0; j < c; ++j) {
            ad.block(i * c, j * c, c, c).diagonal().array() -= b(j, i);
        }
    }
    return ad;
}

namespace {

std::vector<CMatrix> columns_as_matrices(const CMatrix& cols, Eigen::Index rows, Eigen::Index ncols) {
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(cols.cols()));
    for (Eigen::Index k = 0; k < cols.cols(); ++k) {
        out.push_back(unvec(cols.col(k), rows, ncols));
    }
    return out;
}

bool is_diagonal(const CMatrix& b, double tol) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            if (i != j && std::abs(b(i, j)) > tol) {
                return false;
            }
        }
    }
    return true;
}

void validate_jordan_spec(const CMatrix& b, const JordanSpec& spec) {
    const auto c = b.rows();
    int total = 0;
    for (const auto& eig : spec) {
        for (int s : eig.sizes) {
            if (s <= 0) {
                throw Error(ErrorKind::Structural, "Jordan block sizes must be positive");
            }
            total += s;
        }
    }
    if (total != c) {
        throw Error(ErrorKind::Structural, "Jordan spec sizes do not add up to the matrix dimension");
    }
    const CMatrix id = CMatrix::Identity(c, c);
    for (const auto& eig : spec) {
        const int largest = *std::max_element(eig.sizes.begin(), eig.sizes.end());
        CMatrix shifted = b - eig.eigenvalue * id;
        CMatrix power = id;
        for (int k = 1; k <= largest + 1; ++k) {
            power = power * shifted;
            int deficiency = 0;
            for (int s : eig.sizes) {
                deficiency += std::min(k, s);
            }
            const double scale = std::max(1.0, b.norm());
            // Absolute cutoff relative to ||B||^k keeps nilpotent powers honest.
            Eigen::JacobiSVD<CMatrix> svd(power);
            const auto& sv = svd.singularValues();
            int rank = 0;
            for (Eigen::Index i = 0; i < sv.size(); ++i) {
                if (sv(i) > 1e-8 * std::pow(scale, k)) {
                    ++rank;
                }
            }
            if (rank != c - deficiency) {
                throw Error(ErrorKind::Structural, "Jordan spec inconsistent with B (rank test failed)");
            }
        }
    }
}

}  // namespace

OrbitGeometry orbit_geometry(const CMatrix& b, const JordanSpec& spec) {
    if (b.rows() != b.cols() || b.rows() == 0) {
        throw Error(ErrorKind::Structural, "orbit_geometry needs a nonempty square matrix");
    }
    validate_jordan_spec(b, spec);
    const auto c = b.rows();
    OrbitGeometry geo;
    geo.B = b;
    geo.jordan = spec;
    const CMatrix ad = ad_matrix(b);
    geo.tangent_basis = columns_as_matrices(column_space(ad), c, c);
    geo.codimension = static_cast<int>(c * c) - static_cast<int>(geo.tangent_basis.size());
    if (geo.codimension != codimension_formula(spec)) {
        throw Error(ErrorKind::Verification,
                    "orbit codimension " + std::to_string(geo.codimension) + " disagrees with the Jordan formula " +
                        std::to_string(codimension_formula(spec)));
    }

    if (is_diagonal(b, 1e-12)) {
        // Blocks of equal eigenvalues in first-appearance order.
        std::vector<int> block_of(static_cast<std::size_t>(c));
        std::vector<int> local_of(static_cast<std::size_t>(c));
        std::vector<cplx> reps;
        std::vector<int> counts;
        for (Eigen::Index i = 0; i < c; ++i) {
            std::size_t k = 0;
            while (k < reps.size() && std::abs(reps[k] - b(i, i)) > 1e-9 * (1.0 + std::abs(reps[k]))) {
                ++k;
            }
            if (k == reps.size()) {
                reps.push_back(b(i, i));
                counts.push_back(0);
            }
            block_of[static_cast<std::size_t>(i)] = static_cast<int>(k);
            local_of[static_cast<std::size_t>(i)] = counts[k]++;
        }
        std::vector<std::tuple<int, int, int, int, int>> slots;  // (local col, local row, block, row, col)
        for (Eigen::Index i = 0; i < c; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) {
                const auto si = static_cast<std::size_t>(i);
                const auto sj = static_cast<std::size_t>(j);
                if (block_of[si] == block_of[sj]) {
                    slots.emplace_back(local_of[sj], local_of[si], block_of[si], static_cast<int>(i),
                                       static_cast<int>(j));
                }
            }
        }
        std::sort(slots.begin(), slots.end());
        for (const auto& [lc, lr, blk, i, j] : slots) {
            CMatrix omega = CMatrix::Zero(c, c);
            omega(i, j) = 1.0;
            geo.complement_basis.push_back(std::move(omega));
            geo.complement_positions.emplace_back(i, j);
        }
    } else {
        const CMatrix ns = null_space(ad_matrix(b.adjoint()));
        // Row-reduce so the basis is canonical for a given subspace.
        const CMatrix reduced = rref(ns.transpose(), 1e-10);
        for (Eigen::Index r = 0; r < ns.cols(); ++r) {
            geo.complement_basis.push_back(unvec(reduced.row(r).transpose(), c, c));
        }
    }
    if (static_cast<int>(geo.complement_basis.size()) != geo.codimension) {
        throw Error(ErrorKind::Verification, "complement dimension differs from the orbit codimension");
    }
    std::vector<CMatrix> all = geo.tangent_basis;
    all.insert(all.end(), geo.complement_basis.begin(), geo.complement_basis.end());
    if (numerical_rank(vec_columns(all)) != static_cast<int>(c * c)) {
        throw Error(ErrorKind::Verification, "tangent space and complement are not a direct sum");
    }
    return geo;
}

GammaOrbitGeometry gamma_orbit_geometry(const CMatrix& b, const Representation& g) {
    if (g.dim != b.rows()) {
        throw Error(ErrorKind::Structural, "representation dimension does not match B");
    }
    if (commutation_residual(g, b) > 1e-10 * std::max(1.0, b.norm())) {
        throw Error(ErrorKind::Structural, "B is not in the commutant of G");
    }
    GammaOrbitGeometry geo;
    geo.commutant = commutant_basis(g);
    std::vector<CMatrix> images;
    images.reserve(geo.commutant.size());
    for (const auto& x : geo.commutant) {
        images.push_back(b * x - x * b);
    }
    const auto c = b.rows();
    if (images.empty()) {
        return geo;
    }
    const CMatrix img = vec_columns(images);
    // Relative cutoff against ||B|| so a zero B gives a zero tangent space.
    const CMatrix basis = img.norm() <= 1e-12 * std::max(1.0, b.norm()) ? CMatrix(img.rows(), 0) : column_space(img);
    geo.tangent_basis = columns_as_matrices(basis, c, c);
    geo.centralizer_dim = static_cast<int>(geo.commutant.size()) - static_cast<int>(geo.tangent_basis.size());
    return geo;
}

std::vector<CMatrix> project_unfolding_directions(std::span<const CMatrix> directions, const Representation& g) {
    std::vector<CMatrix> out;
    out.reserve(directions.size());
    for (const auto& d : directions) {
        out.push_back(equivariant_average(g, g, d));
    }
    return out;
}

ThetaReport theta_extract(const OrbitGeometry& geometry, std::span<const CMatrix> directions, double rel_tol) {
    const auto c = geometry.B.rows();
    std::vector<CMatrix> all = geometry.tangent_basis;
    all.insert(all.end(), geometry.complement_basis.begin(), geometry.complement_basis.end());
    const CMatrix k = vec_columns(all);
    const auto w = static_cast<Eigen::Index>(geometry.complement_basis.size());

    ThetaReport report;
    const auto p = static_cast<Eigen::Index>(directions.size());
    report.theta = CMatrix::Zero(p, w);
    if (p == 0) {
        return report;
    }
    Eigen::ColPivHouseholderQR<CMatrix> qr(k);
    for (Eigen::Index i = 0; i < p; ++i) {
        const CMatrix& d = directions[static_cast<std::size_t>(i)];
        if (d.rows() != c || d.cols() != c) {
            throw Error(ErrorKind::Structural, "theta_extract: direction has wrong shape");
        }
        const CVector rhs = vec(d);
        const CVector x = qr.solve(rhs);
        const double res = (k * x - rhs).norm();
        report.residuals.push_back(res);
        if (res > 1e-8 * std::max(1.0, rhs.norm())) {
            throw Error(ErrorKind::Verification,
                        "theta_extract: decomposition residual " + std::to_string(res) + " (bases not complementary)");
        }
        report.theta.row(i) = x.tail(w).transpose();
    }
    // Greedy earliest-first independent rows (Gram-Schmidt on rows).
    double scale = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        scale = std::max(scale, report.theta.row(i).norm());
    }
    std::vector<CRowVector> basis;
    for (Eigen::Index i = 0; i < p && scale > 0.0; ++i) {
        CRowVector r = report.theta.row(i);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                r -= (r * q.adjoint())(0, 0) * q;
            }
        }
        if (r.norm() > rel_tol * scale) {
            basis.push_back(r / r.norm());
            report.selected_rows.push_back(static_cast<int>(i));
        }
    }
    report.rank = static_cast<int>(report.selected_rows.size());
    return report;
}

std::vector<CMatrix> build_R_matrices(const SpectralFrame& frame, const OrbitGeometry& geometry) {
    if (geometry.complement_positions.size() != geometry.complement_basis.size()) {
        throw Error(ErrorKind::Structural, "build_R_matrices needs an elementary complement (diagonal B)");
    }
    const int n = frame.state_dim();
    const int c = frame.size();
    if (geometry.B.rows() != c) {
        throw Error(ErrorKind::Structural, "geometry and frame sizes differ");
    }
    const CMatrix psi0 = frame.psi_at(0.0);
    std::vector<CMatrix> out;
    out.reserve(geometry.complement_positions.size());
    for (const auto& [a, b] : geometry.complement_positions) {
        const cplx lambda = frame.eigenvalues[static_cast<std::size_t>(a)];
        std::vector<int> block;
        for (int i = 0; i < c; ++i) {
            if (std::abs(frame.eigenvalues[static_cast<std::size_t>(i)] - lambda) <= 1e-9 * (1.0 + std::abs(lambda))) {
                block.push_back(i);
            }
        }
        CMatrix pi(static_cast<Eigen::Index>(block.size()), n);
        CVector target = CVector::Zero(static_cast<Eigen::Index>(block.size()));
        for (std::size_t r = 0; r < block.size(); ++r) {
            pi.row(static_cast<Eigen::Index>(r)) = psi0.row(block[r]);
            if (block[r] == a) {
                target(static_cast<Eigen::Index>(r)) = 1.0;
            }
        }
        if (numerical_rank(pi) != static_cast<int>(block.size())) {
            throw Error(ErrorKind::RankDeficient, "adjoint rows dependent; E(W) construction fails");
        }
        CMatrix r = CMatrix::Zero(n, c);
        r.col(b) = min_norm_solve(pi, target);
        out.push_back(std::move(r));
    }
    return out;
}

int stacked_phi_rank(const SpectralFrame& frame, std::span<const double> lags) {
    const int n = frame.state_dim();
    CMatrix stacked(n * static_cast<Eigen::Index>(lags.size()), frame.size());
    for (std::size_t j = 0; j < lags.size(); ++j) {
        stacked.middleRows(static_cast<Eigen::Index>(j) * n, n) = frame.phi_at(-lags[j]);
    }
    return numerical_rank(stacked);
}

Realization solve_delay_realization(const SpectralFrame& frame, std::span<const double> lags, const CMatrix& r,
                                    std::span<const EntryMask> masks) {
    const int n = frame.state_dim();
    const int c = frame.size();
    if (r.rows() != n || r.cols() != c) {
        throw Error(ErrorKind::Structural, "realisation target must be n x c");
    }
    if (!masks.empty() && masks.size() != lags.size()) {
        throw Error(ErrorKind::Structural, "one sparsity mask per lag is required");
    }
    for (std::size_t i = 0; i < lags.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (lags[i] == lags[j]) {
                throw Error(ErrorKind::Structural, "realisation lags must be distinct");
            }
        }
    }
    Realization out;
    out.stacked_rank = stacked_phi_rank(frame, lags);
    if (out.stacked_rank < c) {
        throw Error(ErrorKind::RankDeficient, "stacked Phi has rank " + std::to_string(out.stacked_rank) +
                                                  " < " + std::to_string(c) + "; add or separate delays");
    }
    // vec(A Phi) = (Phi^T kron I_n) vec(A); keep only masked columns.
    std::vector<std::pair<std::size_t, Eigen::Index>> unknowns;  // (lag, vec index)
    for (std::size_t j = 0; j < lags.size(); ++j) {
        for (Eigen::Index col = 0; col < n; ++col) {
            for (Eigen::Index row = 0; row < n; ++row) {
                if (masks.empty() || masks[j](row, col)) {
                    unknowns.emplace_back(j, col * n + row);
                }
            }
        }
    }
    CMatrix k = CMatrix::Zero(static_cast<Eigen::Index>(n) * c, static_cast<Eigen::Index>(unknowns.size()));
    std::vector<CMatrix> phis;
    for (double lag : lags) {
        phis.push_back(frame.phi_at(-lag));
    }
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
        const auto [j, idx] = unknowns[u];
        const Eigen::Index row = idx % n;
        const Eigen::Index col = idx / n;
        // A = E_{row,col}: A Phi has row `row` equal to Phi row `col`.
        for (Eigen::Index q = 0; q < c; ++q) {
            k(q * n + row, static_cast<Eigen::Index>(u)) = phis[j](col, q);
        }
    }
    const CVector rhs = vec(r);
    const CVector x = unknowns.empty() ? CVector() : CVector(min_norm_solve(k, rhs));
    out.coefficients.assign(lags.size(), CMatrix::Zero(n, n));
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
        const auto [j, idx] = unknowns[u];
        out.coefficients[j](idx % n, idx / n) = x(static_cast<Eigen::Index>(u));
    }
    CMatrix recon = CMatrix::Zero(n, c);
    for (std::size_t j = 0; j < lags.size(); ++j) {
        recon += out.coefficients[j] * phis[j];
    }
    out.residual = max_abs(recon - r);
    if (out.residual > 1e-9 * std::max(1.0, max_abs(r))) {
        throw Error(ErrorKind::Infeasible,
                    "sparsity mask infeasible: least-squares residual " + std::to_string(out.residual));
    }
    return out;
}

CMatrix exponential_matrix(std::span<const cplx> eigenvalues, std::span<const double> lags) {
    CMatrix m(static_cast<Eigen::Index>(eigenvalues.size()), static_cast<Eigen::Index>(lags.size()));
    for (std::size_t l = 0; l < eigenvalues.size(); ++l) {
        for (std::size_t j = 0; j < lags.size(); ++j) {
            m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) = std::exp(-eigenvalues[l] * lags[j]);
        }
    }
    return m;
}

std::vector<double> default_delay_set(const SpectralFrame& frame) {
    std::vector<double> lags{0.0};
    for (const auto& t : frame.op.terms()) {
        lags.push_back(t.delay);
    }
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    const int c = frame.size();
    const double tau = frame.op.horizon() > 0.0 ? frame.op.horizon() : 1.0;
    int added = 0;
    for (int j = 1; stacked_phi_rank(frame, lags) < c && added < c; ++j) {
        const double candidate = tau * j / (c + 1.0);
        if (std::none_of(lags.begin(), lags.end(), [&](double l) { return std::abs(l - candidate) < 1e-12; })) {
            lags.push_back(candidate);
            ++added;
        }
        if (j > 4 * c) {
            break;
        }
    }
    if (stacked_phi_rank(frame, lags) < c) {
        throw Error(ErrorKind::RankDeficient, "could not reach stacked Phi rank c with the default delay policy");
    }
    return lags;
}

DelayOperator UnfoldingFamily::at(std::span<const cplx> alpha) const {
    if (alpha.size() != parameters.size()) {
        throw Error(ErrorKind::Structural, "parameter vector has wrong length");
    }
    std::vector<DelayTerm> terms = base.terms();
    for (std::size_t j = 0; j < lags.size(); ++j) {
        CMatrix sum = CMatrix::Zero(base.dim(), base.dim());
        for (std::size_t m = 0; m < parameters.size(); ++m) {
            sum += alpha[m] * parameters[m].coefficients[j];
        }
        terms.push_back({lags[j], sum});
    }
    return DelayOperator::merged(base.dim(), terms);
}

CMatrix UnfoldingFamily::direction(const SpectralFrame& frame, int m) const {
    const auto& p = parameters.at(static_cast<std::size_t>(m));
    CMatrix acc = CMatrix::Zero(frame.state_dim(), frame.size());
    for (std::size_t j = 0; j < lags.size(); ++j) {
        acc += p.coefficients[j] * frame.phi_at(-lags[j]);
    }
    return frame.psi_at(0.0) * acc;
}

std::vector<CMatrix> UnfoldingFamily::directions(const SpectralFrame& frame) const {
    std::vector<CMatrix> out;
    for (std::size_t m = 0; m < parameters.size(); ++m) {
        out.push_back(direction(frame, static_cast<int>(m)));
    }
    return out;
}

VersalityReport verify_gamma_versality(const CMatrix& b, const Representation& g, std::span<const CMatrix> directions) {
    const auto geo = gamma_orbit_geometry(b, g);
    VersalityReport rep;
    rep.commutant_dim = static_cast<int>(geo.commutant.size());
    rep.tangent_dim = static_cast<int>(geo.tangent_basis.size());
    rep.codimension = geo.codimension();
    rep.parameter_count = static_cast<int>(directions.size());
    const CMatrix basis = vec_columns(geo.commutant);
    const auto cols = static_cast<Eigen::Index>(geo.tangent_basis.size() + directions.size());
    CMatrix coords(basis.cols(), cols);
    Eigen::Index k = 0;
    for (const auto& t : geo.tangent_basis) {
        coords.col(k++) = basis.adjoint() * vec(t);
    }
    for (const auto& d : directions) {
        const CVector v = vec(d);
        const CVector cv = basis.adjoint() * v;
        rep.outside_residual = std::max(rep.outside_residual, (basis * cv - v).norm());
        coords.col(k++) = cv;
    }
    rep.span_rank = cols == 0 ? 0 : numerical_rank(coords);
    rep.deficiency = rep.commutant_dim - rep.span_rank;
    rep.versal = rep.deficiency == 0 && rep.outside_residual <= 1e-8;
    rep.miniversal = rep.versal && rep.parameter_count == rep.codimension;
    return rep;
}

AssemblyResult assemble_gamma_unfolding(const Representation& rep, const SpectralFrame& frame,
                                        const OrbitGeometry& geometry, std::span<const double> lags,
                                        const AssemblyOptions& options) {
    if (!frame.G) {
        throw Error(ErrorKind::Structural, "assemble_gamma_unfolding needs a frame with an induced representation");
    }
    const double eq = check_equivariance(frame.op, rep);
    if (eq > 1e-10) {
        throw Error(ErrorKind::Structural, "equivariance residual " + std::to_string(eq) + " exceeds 1e-10");
    }
    const Representation& g = *frame.G;
    AssemblyResult out{UnfoldingFamily{frame.op, {lags.begin(), lags.end()}, {}, true}, {}, {}, {}, {}, {}, {},
                       0.0, 0.0, 0.0};
    out.R = build_R_matrices(frame, geometry);
    const CMatrix psi0 = frame.psi_at(0.0);
    for (const auto& r : out.R) {
        CMatrix projected = equivariant_average(rep, g, r);
        CMatrix dir = psi0 * projected;
        out.projection_identity_residual =
            std::max(out.projection_identity_residual, max_abs(equivariant_average(g, g, psi0 * r) - dir));
        out.R_projected.push_back(std::move(projected));
        out.directions.push_back(std::move(dir));
    }
    if (out.projection_identity_residual > 1e-10) {
        throw Error(ErrorKind::Verification, "projected directions disagree between the two projection routes");
    }
    out.theta = theta_extract(geometry, out.directions);
    out.gamma = gamma_orbit_geometry(frame.B, g);

    std::vector<int> chosen;
    if (options.select_miniversal) {
        chosen = out.theta.selected_rows;
    } else {
        chosen.resize(out.directions.size());
        std::iota(chosen.begin(), chosen.end(), 0);
    }
    for (int m : chosen) {
        const auto& target = out.R_projected[static_cast<std::size_t>(m)];
        Realization real = solve_delay_realization(frame, lags, target, options.masks);
        CMatrix recon = CMatrix::Zero(frame.state_dim(), frame.size());
        for (std::size_t j = 0; j < lags.size(); ++j) {
            real.coefficients[j] = equivariant_average(rep, rep, real.coefficients[j]);
            recon += real.coefficients[j] * frame.phi_at(-lags[j]);
        }
        out.reconstruction_residual =
            std::max({out.reconstruction_residual, real.residual, max_abs(recon - target)});
        out.family.parameters.push_back({"alpha_" + std::to_string(out.family.parameters.size() + 1), m,
                                         std::move(real.coefficients)});
    }
    if (out.reconstruction_residual > 1e-9) {
        throw Error(ErrorKind::Verification,
                    "delay realisation residual " + std::to_string(out.reconstruction_residual));
    }
    for (const auto& p : out.family.parameters) {
        for (const auto& a : p.coefficients) {
            out.equivariance_residual = std::max(out.equivariance_residual, commutation_residual(rep, a));
        }
    }
    const auto dirs = out.family.directions(frame);
    out.versality = verify_gamma_versality(frame.B, g, dirs);
    if (!out.versality.versal) {
        throw Error(ErrorKind::Verification,
                    "assembled family is not Gamma-versal: span rank " + std::to_string(out.versality.span_rank) +
                        " of " + std::to_string(out.versality.commutant_dim) + " (deficiency " +
                        std::to_string(out.versality.deficiency) + ")");
    }
    return out;
}

namespace {

bool all_real(const UnfoldingParameter& p, double tol) {
    return std::all_of(p.coefficients.begin(), p.coefficients.end(),
                       [tol](const CMatrix& a) { return a.imag().cwiseAbs().maxCoeff() <= tol; });
}

bool conjugate_params(const UnfoldingParameter& a, const UnfoldingParameter& b, double tol) {
    double scale = 0.0;
    for (const auto& m : a.coefficients) {
        scale = std::max(scale, max_abs(m));
    }
    for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
        if (max_abs(a.coefficients[j] - b.coefficients[j].conjugate()) > tol * std::max(1.0, scale)) {
            return false;
        }
    }
    return true;
}

}  // namespace

RealFamily realify(const UnfoldingFamily& family, double tol) {
    RealFamily out{UnfoldingFamily{family.base, family.lags, {}, family.gamma_equivariant}, {}, CMatrix(), 0.0};
    const std::size_t p = family.parameters.size();
    std::vector<char> used(p, 0);
    for (std::size_t m = 0; m < p; ++m) {
        if (used[m] != 0) {
            continue;
        }
        const auto& par = family.parameters[m];
        double scale = 0.0;
        for (const auto& a : par.coefficients) {
            scale = std::max(scale, max_abs(a));
        }
        if (all_real(par, tol * std::max(1.0, scale))) {
            used[m] = 1;
            UnfoldingParameter q = par;
            for (auto& a : q.coefficients) {
                a = a.real().cast<cplx>();
            }
            q.name = "alpha_" + std::to_string(out.family.parameters.size() + 1);
            out.family.parameters.push_back(std::move(q));
            continue;
        }
        std::size_t partner = p;
        for (std::size_t k = m + 1; k < p; ++k) {
            if (used[k] == 0 && conjugate_params(par, family.parameters[k], tol)) {
                partner = k;
                break;
            }
        }
        if (partner == p) {
            throw Error(ErrorKind::Structural,
                        "parameter " + par.name + " has no conjugate partner; directions are not in conjugate pairs");
        }
        used[m] = used[partner] = 1;
        out.pairs.emplace_back(static_cast<int>(m), static_cast<int>(partner));
        UnfoldingParameter re{"", par.source_index, {}};
        UnfoldingParameter im{"", par.source_index, {}};
        for (const auto& a : par.coefficients) {
            re.coefficients.push_back(a.real().cast<cplx>());
            im.coefficients.push_back(a.imag().cast<cplx>());
        }
        re.name = "alpha_" + std::to_string(out.family.parameters.size() + 1);
        out.family.parameters.push_back(std::move(re));
        im.name = "alpha_" + std::to_string(out.family.parameters.size() + 1);
        out.family.parameters.push_back(std::move(im));
    }

    auto stack = [](const UnfoldingFamily& f) {
        std::vector<CMatrix> cols;
        for (const auto& par : f.parameters) {
            CMatrix all(par.coefficients.front().rows(), par.coefficients.front().cols() *
                                                             static_cast<Eigen::Index>(par.coefficients.size()));
            for (std::size_t j = 0; j < par.coefficients.size(); ++j) {
                all.middleCols(static_cast<Eigen::Index>(j) * par.coefficients[j].cols(), par.coefficients[j].cols()) =
                    par.coefficients[j];
            }
            cols.push_back(std::move(all));
        }
        return vec_columns(cols);
    };
    if (p > 0) {
        const CMatrix complex_cols = stack(family);
        const CMatrix real_cols = stack(out.family);
        const CMatrix q = column_space(complex_cols);
        out.reparametrization = q.adjoint() * real_cols;
        out.inverse_condition = out.reparametrization.rows() == out.reparametrization.cols()
                                    ? inverse_condition(out.reparametrization)
                                    : 0.0;
        if (out.inverse_condition <= 1e-8 || max_abs(q * out.reparametrization - real_cols) > 1e-8) {
            throw Error(ErrorKind::Verification, "real reparametrisation is singular");
        }
    }
    return out;
}

}  // namespace equnfold
