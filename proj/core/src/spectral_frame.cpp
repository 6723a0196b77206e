#include "equnfold/spectral_frame.hpp"

#include "equnfold/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace equnfold {

namespace {

int near_null_count(const Eigen::VectorXd& sv, double rel) {
    const double scale = std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    int m = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) < rel * scale) {
            ++m;
        }
    }
    return m;
}

std::string describe(cplx z) {
    std::ostringstream os;
    os.precision(17);
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

}  // namespace

RootResult find_root(const DelayOperator& op, cplx guess, const RootOptions& options) {
    RootResult out;
    cplx lambda = guess;
    bool secant_mode = false;
    cplx prev_lambda = 0.0;
    cplx prev_f = 0.0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        out.iterations = it;
        const CMatrix d = char_matrix(op, lambda);
        Eigen::PartialPivLU<CMatrix> lu(d);
        const cplx f = lu.determinant();
        Eigen::JacobiSVD<CMatrix> svd(d);
        const auto& sv = svd.singularValues();
        out.smallest_singular = sv(sv.size() - 1);
        out.residual = std::abs(f);
        if (f == 0.0) {
            out.root = lambda;
            return out;
        }
        const int m = std::max(1, near_null_count(sv, 1e-5));
        out.multiplicity_estimate = m;

        cplx step;
        if (!secant_mode) {
            const CMatrix x = lu.solve(char_matrix_derivative(op, lambda));
            const cplx trace = x.trace();
            const cplx fprime = f * trace;
            if (!std::isfinite(std::abs(trace))) {
                out.root = lambda;
                return out;
            }
            if (std::abs(fprime) < options.derivative_floor && out.residual >= options.residual_tol) {
                out.multiple_root_suspected = true;
                secant_mode = true;
                prev_lambda = lambda + cplx(1e-6, 1e-6);
                prev_f = char_matrix(op, prev_lambda).determinant();
                continue;
            }
            step = static_cast<double>(m) / trace;
        } else {
            if (f == prev_f) {
                break;
            }
            step = f * (lambda - prev_lambda) / (f - prev_f);
            prev_lambda = lambda;
            prev_f = f;
        }
        if (m > 1) {
            out.multiple_root_suspected = true;
        }
        const cplx next = lambda - step;
        if (out.residual < options.residual_tol && std::abs(step) <= 1e-12 * (1.0 + std::abs(lambda))) {
            out.root = next;
            out.residual = std::abs(char_matrix(op, next).determinant());
            return out;
        }
        lambda = next;
        if (!std::isfinite(std::abs(lambda))) {
            break;
        }
    }
    throw Error(ErrorKind::Convergence,
                "find_root did not converge; last iterate " + describe(lambda) +
                    ", |det| = " + std::to_string(out.residual));
}

CMatrix SpectralFrame::phi_at(double theta) const {
    CMatrix m(state_dim(), size());
    for (int j = 0; j < size(); ++j) {
        m.col(j) = phi[static_cast<std::size_t>(j)](theta);
    }
    return m;
}

CMatrix SpectralFrame::psi_at(double s) const {
    CMatrix m(size(), state_dim());
    for (int i = 0; i < size(); ++i) {
        m.row(i) = psi[static_cast<std::size_t>(i)](s);
    }
    return m;
}

std::vector<cplx> SpectralFrame::distinct_eigenvalues() const {
    std::vector<cplx> out;
    for (const auto& l : eigenvalues) {
        if (std::none_of(out.begin(), out.end(), [&](cplx x) { return x == l; })) {
            out.push_back(l);
        }
    }
    return out;
}

namespace {

bool same_value(cplx a, cplx b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)); }

// Phase-normalise each column so its first significant entry is real
// positive, then order by descending magnitude of that entry (stable).
std::vector<CVector> canonical_directions(const CMatrix& basis) {
    struct Item {
        CVector v;
        double lead;
        int index;
    };
    std::vector<Item> items;
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        CVector v = basis.col(c);
        double lead = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (std::abs(v(i)) > 1e-12) {
                lead = std::abs(v(i));
                v *= std::conj(v(i)) / lead;
                break;
            }
        }
        items.push_back({v, lead, static_cast<int>(c)});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (std::abs(a.lead - b.lead) > 1e-12) {
            return a.lead > b.lead;
        }
        return a.index < b.index;
    });
    std::vector<CVector> out;
    for (auto& it : items) {
        out.push_back(std::move(it.v));
    }
    return out;
}

}  // namespace

SpectralFrame eigenbasis(const DelayOperator& op, const std::vector<cplx>& lambdas, const EigenbasisOptions& options) {
    if (lambdas.empty()) {
        throw Error(ErrorKind::Structural, "eigenbasis needs at least one eigenvalue");
    }
    if (!options.seeds.empty() && options.seeds.size() != lambdas.size()) {
        throw Error(ErrorKind::Structural, "seed list must match the eigenvalue list");
    }
    const bool real_op = op.is_real();
    const int n = op.dim();

    SpectralFrame frame{op, {}, {}, {}, CMatrix(), std::nullopt};
    // Per-eigenvalue blocks, kept for the conjugate-pair convention.
    std::vector<std::vector<CVector>> right_blocks;
    std::vector<std::vector<CRowVector>> left_blocks;

    for (std::size_t idx = 0; idx < lambdas.size(); ++idx) {
        const cplx lambda = lambdas[idx];
        for (std::size_t j = 0; j < idx; ++j) {
            if (same_value(lambdas[j], lambda)) {
                throw Error(ErrorKind::Structural,
                            "inconsistent multiplicities: eigenvalue " + describe(lambda) + " listed twice");
            }
        }
        const CMatrix d = char_matrix(op, lambda);
        Eigen::JacobiSVD<CMatrix> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        double scale = std::max(1.0, std::abs(lambda));
        for (const auto& t : op.terms()) {
            scale = std::max(scale, t.coefficient.cwiseAbs().maxCoeff());
        }
        const double cutoff = options.rank_tol * std::max(sv(0), scale);
        int k = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv(i) <= cutoff || sv(0) == 0.0) {
                ++k;
            }
        }
        if (k == 0) {
            throw Error(ErrorKind::Structural, describe(lambda) + " is not a characteristic root");
        }

        std::vector<CVector> right;
        std::vector<CRowVector> left;
        std::ptrdiff_t conj_of = -1;
        if (real_op && lambda.imag() != 0.0) {
            for (std::size_t j = 0; j < idx; ++j) {
                if (same_value(std::conj(lambdas[j]), lambda)) {
                    conj_of = static_cast<std::ptrdiff_t>(j);
                }
            }
        }
        bool seeded = !options.seeds.empty() && !options.seeds[idx].empty();
        if (seeded && conj_of >= 0) {
            // Seeds that are exactly the conjugates of the partner block
            // fall under the conjugate-pair convention.
            const auto& partner = right_blocks[static_cast<std::size_t>(conj_of)];
            const auto& given = options.seeds[idx];
            bool matches = given.size() == partner.size();
            for (std::size_t c = 0; matches && c < given.size(); ++c) {
                matches = given[c].size() == partner[c].size() &&
                          (given[c] - partner[c].conjugate()).cwiseAbs().maxCoeff() <= 1e-12;
            }
            seeded = !matches;
        }
        if (conj_of >= 0 && !seeded) {
            for (const auto& v : right_blocks[static_cast<std::size_t>(conj_of)]) {
                right.push_back(v.conjugate());
            }
            for (const auto& w : left_blocks[static_cast<std::size_t>(conj_of)]) {
                left.push_back(w.conjugate());
            }
            if (static_cast<int>(right.size()) != k) {
                throw Error(ErrorKind::Structural, "conjugate eigenvalues have different multiplicities");
            }
        } else {
            if (seeded) {
                right = options.seeds[idx];
                if (static_cast<int>(right.size()) != k) {
                    throw Error(ErrorKind::Structural, "seed count does not match the null-space dimension");
                }
                CMatrix stacked(n, k);
                for (int c = 0; c < k; ++c) {
                    if (right[static_cast<std::size_t>(c)].size() != n) {
                        throw Error(ErrorKind::Structural, "seed vector has wrong length");
                    }
                    stacked.col(c) = right[static_cast<std::size_t>(c)];
                    const double res = (d * stacked.col(c)).norm();
                    if (res > options.root_tol * std::max(1.0, stacked.col(c).norm()) * std::max(1.0, sv(0))) {
                        throw Error(ErrorKind::Structural, "seed vector is not in the null space of Delta");
                    }
                }
                if (numerical_rank(stacked) != k) {
                    throw Error(ErrorKind::Structural, "seed vectors are linearly dependent");
                }
            } else {
                right = canonical_directions(svd.matrixV().rightCols(k));
            }
            // Left null vectors: w Delta = 0  <=>  Delta^H w^H = 0.
            const CMatrix u = svd.matrixU().rightCols(k);
            std::vector<AdjointFunction> raw;
            std::vector<EigenFunction> cols;
            for (int c = 0; c < k; ++c) {
                raw.push_back({u.col(c).adjoint(), lambda});
            }
            for (const auto& v : right) {
                cols.push_back({v, lambda});
            }
            const CMatrix gram = bilinear_gram(raw, cols, op);
            if (inverse_condition(gram) < 1e-12) {
                throw Error(ErrorKind::Defective,
                            "defective or mis-ordered spectrum at " + describe(lambda) +
                                " (singular Gram matrix)");
            }
            const CMatrix normalised = gram.inverse() * u.adjoint();
            for (int c = 0; c < k; ++c) {
                left.push_back(normalised.row(c));
            }
        }

        for (const auto& v : right) {
            frame.phi.push_back({v, lambda});
            frame.eigenvalues.push_back(lambda);
        }
        for (const auto& w : left) {
            frame.psi.push_back({w, lambda});
        }
        right_blocks.push_back(std::move(right));
        left_blocks.push_back(std::move(left));
    }

    const int c = frame.size();
    frame.B = CMatrix::Zero(c, c);
    for (int i = 0; i < c; ++i) {
        frame.B(i, i) = frame.eigenvalues[static_cast<std::size_t>(i)];
    }

    const CMatrix gram = bilinear_gram(frame.psi, frame.phi, op);
    if (max_abs(gram - CMatrix::Identity(c, c)) > 1e-9) {
        throw Error(ErrorKind::Defective, "defective or mis-ordered spectrum: (Psi, Phi) != I");
    }
    return frame;
}

std::vector<EigenFunction> act_on(const CMatrix& g, const std::vector<EigenFunction>& phi) {
    std::vector<EigenFunction> out;
    out.reserve(phi.size());
    for (const auto& f : phi) {
        out.push_back({g * f.direction, f.exponent});
    }
    return out;
}

Representation induce_representation(const SpectralFrame& frame, const Representation& rep) {
    const double eq = check_equivariance(frame.op, rep);
    if (eq > 1e-10) {
        throw Error(ErrorKind::Structural, "equivariance residual " + std::to_string(eq) + " exceeds 1e-10");
    }
    std::vector<CMatrix> mats;
    mats.reserve(rep.matrices.size());
    for (const auto& g : rep.matrices) {
        mats.push_back(bilinear_gram(frame.psi, act_on(g, frame.phi), frame.op));
    }
    Representation induced = make_representation(rep.group, std::move(mats));
    const auto report = check_representation(induced, 1e-8);
    if (!report.valid()) {
        throw Error(ErrorKind::Verification,
                    "induced matrices are not a representation (residual " + std::to_string(report.max_residual) + ")");
    }
    const double tau = frame.op.horizon();
    for (int s = 0; s <= 8; ++s) {
        const double theta = -tau * s / 8.0;
        const CMatrix phi = frame.phi_at(theta);
        for (int g = 0; g < rep.group->order(); ++g) {
            const double r = max_abs(rep(g) * phi - phi * induced(g));
            if (r > 1e-8) {
                throw Error(ErrorKind::Verification,
                            "rho(g) Phi != Phi G(g) on the sample grid (residual " + std::to_string(r) + ")");
            }
        }
    }
    return induced;
}

FrameReport check_frame(const SpectralFrame& frame, const Representation* rep) {
    FrameReport r;
    for (std::size_t j = 0; j < frame.phi.size(); ++j) {
        const CMatrix d = char_matrix(frame.op, frame.phi[j].exponent);
        r.null_residual = std::max(r.null_residual, (d * frame.phi[j].direction).norm());
        const CMatrix dl = char_matrix(frame.op, frame.psi[j].exponent);
        r.null_residual = std::max(r.null_residual, (frame.psi[j].direction * dl).norm());
    }
    const int c = frame.size();
    r.gram_residual = max_abs(bilinear_gram(frame.psi, frame.phi, frame.op) - CMatrix::Identity(c, c));
    CMatrix diag = CMatrix::Zero(c, c);
    for (int i = 0; i < c; ++i) {
        diag(i, i) = frame.eigenvalues[static_cast<std::size_t>(i)];
    }
    r.b_residual = max_abs(frame.B - diag);
    if (frame.G) {
        for (const auto& g : frame.G->matrices) {
            r.commute_residual = std::max(r.commute_residual, max_abs(frame.B * g - g * frame.B));
        }
        if (rep != nullptr) {
            for (const auto& g : rep->matrices) {
                std::vector<AdjointFunction> psi_g;
                for (const auto& p : frame.psi) {
                    psi_g.push_back({p.direction * g, p.exponent});
                }
                const CMatrix lhs = bilinear_gram(frame.psi, act_on(g, frame.phi), frame.op);
                const CMatrix rhs = bilinear_gram(psi_g, frame.phi, frame.op);
                r.transfer_residual = std::max(r.transfer_residual, max_abs(lhs - rhs));
            }
        }
    }
    return r;
}

}  // namespace equnfold
