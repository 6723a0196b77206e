#include "equnfold/group_algebra.hpp"

#include "equnfold/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace equnfold {

FiniteGroup::FiniteGroup(std::vector<std::vector<int>> mul_table, std::vector<int> generators)
    : table_(std::move(mul_table)), generators_(std::move(generators)) {
    const int n = order();
    if (n == 0) {
        throw Error(ErrorKind::Structural, "group must have at least one element");
    }
    for (const auto& row : table_) {
        if (static_cast<int>(row.size()) != n) {
            throw Error(ErrorKind::Structural, "multiplication table is not square");
        }
        for (int v : row) {
            if (v < 0 || v >= n) {
                throw Error(ErrorKind::Structural, "multiplication table entry out of range");
            }
        }
    }
    // Latin square.
    for (int i = 0; i < n; ++i) {
        std::vector<char> row_seen(n, 0);
        std::vector<char> col_seen(n, 0);
        for (int j = 0; j < n; ++j) {
            row_seen[table_[i][j]] = 1;
            col_seen[table_[j][i]] = 1;
        }
        if (std::count(row_seen.begin(), row_seen.end(), 1) != n ||
            std::count(col_seen.begin(), col_seen.end(), 1) != n) {
            throw Error(ErrorKind::Structural, "multiplication table is not a Latin square");
        }
    }
    identity_ = -1;
    for (int e = 0; e < n && identity_ < 0; ++e) {
        bool ok = true;
        for (int g = 0; g < n && ok; ++g) {
            ok = table_[e][g] == g && table_[g][e] == g;
        }
        if (ok) {
            identity_ = e;
        }
    }
    if (identity_ < 0) {
        throw Error(ErrorKind::Structural, "multiplication table has no identity");
    }
    inverse_.assign(n, -1);
    for (int g = 0; g < n; ++g) {
        for (int h = 0; h < n; ++h) {
            if (table_[g][h] == identity_ && table_[h][g] == identity_) {
                inverse_[g] = h;
                break;
            }
        }
        if (inverse_[g] < 0) {
            throw Error(ErrorKind::Structural, "element " + std::to_string(g) + " has no inverse");
        }
    }
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                if (table_[table_[a][b]][c] != table_[a][table_[b][c]]) {
                    throw Error(ErrorKind::Structural, "multiplication table is not associative");
                }
            }
        }
    }
    if (generators_.empty()) {
        generators_.resize(n);
        std::iota(generators_.begin(), generators_.end(), 0);
    }
    for (int g : generators_) {
        if (g < 0 || g >= n) {
            throw Error(ErrorKind::Structural, "generator index out of range");
        }
    }
}

Representation make_representation(GroupPtr group, std::vector<CMatrix> matrices) {
    if (!group) {
        throw Error(ErrorKind::Structural, "representation needs a group");
    }
    if (static_cast<int>(matrices.size()) != group->order()) {
        throw Error(ErrorKind::Structural, "representation needs one matrix per group element");
    }
    const auto dim = matrices.front().rows();
    for (const auto& m : matrices) {
        if (m.rows() != dim || m.cols() != dim) {
            throw Error(ErrorKind::Structural, "representation matrices have inconsistent dimensions");
        }
        Eigen::FullPivLU<CMatrix> lu(m);
        if (!lu.isInvertible()) {
            throw Error(ErrorKind::Structural, "representation matrix is singular");
        }
    }
    return Representation{std::move(group), static_cast<int>(dim), std::move(matrices)};
}

namespace {

int find_matrix(const std::vector<CMatrix>& elements, const CMatrix& m, double tol) {
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if ((elements[i] - m).cwiseAbs().maxCoeff() <= tol) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

}  // namespace

Representation close_generators(const std::vector<CMatrix>& generators, int max_order, double tol) {
    if (generators.empty()) {
        throw Error(ErrorKind::Structural, "closure needs at least one generator");
    }
    const auto dim = generators.front().rows();
    for (const auto& g : generators) {
        if (g.rows() != dim || g.cols() != dim) {
            throw Error(ErrorKind::Structural, "generator matrices have inconsistent dimensions");
        }
    }
    std::vector<CMatrix> elements{CMatrix::Identity(dim, dim)};
    std::vector<int> generator_index;
    for (const auto& g : generators) {
        int idx = find_matrix(elements, g, tol);
        if (idx < 0) {
            elements.push_back(g);
            idx = static_cast<int>(elements.size()) - 1;
        }
        generator_index.push_back(idx);
    }
    // Breadth-first closure under right multiplication by generators.
    for (std::size_t frontier = 0; frontier < elements.size(); ++frontier) {
        for (const auto& g : generators) {
            CMatrix prod = elements[frontier] * g;
            if (find_matrix(elements, prod, tol) < 0) {
                if (static_cast<int>(elements.size()) >= max_order) {
                    throw Error(ErrorKind::Structural,
                                "generator closure exceeded " + std::to_string(max_order) + " elements");
                }
                elements.push_back(std::move(prod));
            }
        }
    }
    const int n = static_cast<int>(elements.size());
    std::vector<std::vector<int>> table(n, std::vector<int>(n));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const int idx = find_matrix(elements, elements[a] * elements[b], tol);
            if (idx < 0) {
                throw Error(ErrorKind::Structural, "generator closure is not closed (tolerance too tight?)");
            }
            table[a][b] = idx;
        }
    }
    std::sort(generator_index.begin(), generator_index.end());
    generator_index.erase(std::unique(generator_index.begin(), generator_index.end()), generator_index.end());
    auto group = std::make_shared<const FiniteGroup>(std::move(table), std::move(generator_index));
    return make_representation(std::move(group), std::move(elements));
}

Representation trivial_representation(GroupPtr group, int dim) {
    std::vector<CMatrix> mats(static_cast<std::size_t>(group->order()), CMatrix::Identity(dim, dim));
    return make_representation(std::move(group), std::move(mats));
}

RepresentationReport check_representation(const Representation& rep, double tol) {
    if (!rep.group || static_cast<int>(rep.matrices.size()) != rep.group->order()) {
        throw Error(ErrorKind::Structural, "representation is missing matrices");
    }
    for (const auto& m : rep.matrices) {
        if (m.rows() != rep.dim || m.cols() != rep.dim) {
            throw Error(ErrorKind::Structural, "representation matrices have inconsistent dimensions");
        }
    }
    RepresentationReport report;
    const auto& grp = *rep.group;
    const CMatrix id = CMatrix::Identity(rep.dim, rep.dim);
    report.identity_ok = max_abs(rep(grp.identity()) - id) <= tol;
    for (int g = 0; g < grp.order(); ++g) {
        for (int h = 0; h < grp.order(); ++h) {
            const double r = max_abs(rep(grp.mul(g, h)) - rep(g) * rep(h));
            if (r > report.max_residual) {
                report.max_residual = r;
                report.worst_pair = {g, h};
            }
            if (r > tol) {
                report.violations.emplace_back(g, h);
            }
        }
    }
    return report;
}

CMatrix equivariant_average(const Representation& left, const Representation& right, const CMatrix& m) {
    if (left.group != right.group &&
        (!left.group || !right.group || left.group->mul_table() != right.group->mul_table())) {
        throw Error(ErrorKind::Structural, "equivariant_average: representations of different groups");
    }
    if (m.rows() != left.dim || m.cols() != right.dim) {
        throw Error(ErrorKind::Structural, "equivariant_average: matrix shape does not match representations");
    }
    const auto& grp = *left.group;
    CMatrix acc = CMatrix::Zero(m.rows(), m.cols());
    for (int g = 0; g < grp.order(); ++g) {
        acc += left(g) * m * right(grp.inverse(g));
    }
    return acc / static_cast<double>(grp.order());
}

std::vector<CMatrix> commutant_basis(const Representation& rep) {
    const auto d = static_cast<Eigen::Index>(rep.dim);
    const auto& gens = rep.group->generators();
    const CMatrix id = CMatrix::Identity(d, d);
    CMatrix constraints(static_cast<Eigen::Index>(gens.size()) * d * d, d * d);
    // vec(AX - XA) = (I kron A - A^T kron I) vec X
    for (std::size_t k = 0; k < gens.size(); ++k) {
        const CMatrix& a = rep(gens[k]);
        CMatrix block = CMatrix::Zero(d * d, d * d);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                block.block(i * d, j * d, d, d) += id(i, j) * a;
                block.block(i * d, j * d, d, d) -= a(j, i) * id;
            }
        }
        constraints.middleRows(static_cast<Eigen::Index>(k) * d * d, d * d) = block;
    }
    double scale = 1.0;
    for (int g : gens) {
        scale = std::max(scale, rep(g).norm());
    }
    // Numerically trivial actions leave rounding noise only; a cutoff
    // relative to that noise would invent constraints.
    const CMatrix ns = max_abs(constraints) <= 1e-10 * scale ? CMatrix(CMatrix::Identity(d * d, d * d))
                                                             : null_space(constraints);
    std::vector<CMatrix> basis;
    basis.reserve(static_cast<std::size_t>(ns.cols()));
    for (Eigen::Index c = 0; c < ns.cols(); ++c) {
        basis.push_back(unvec(ns.col(c), d, d));
    }
    return basis;
}

double commutation_residual(const Representation& rep, const CMatrix& x) {
    double r = 0.0;
    for (const auto& g : rep.matrices) {
        r = std::max(r, max_abs(g * x - x * g));
    }
    return r;
}

}  // namespace equnfold
