#include "equnfold/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace equnfold {

namespace {

Eigen::JacobiSVD<CMatrix> full_svd(const CMatrix& m) {
    return Eigen::JacobiSVD<CMatrix>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol) {
    if (sv.size() == 0 || sv(0) == 0.0) {
        return 0;
    }
    const double cutoff = rel_tol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) {
            ++r;
        }
    }
    return r;
}

}  // namespace

int numerical_rank(const CMatrix& m, double rel_tol) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<CMatrix> svd(m);
    return rank_from_singular_values(svd.singularValues(), rel_tol);
}

CMatrix null_space(const CMatrix& m, double rel_tol) {
    if (m.rows() == 0) {
        return CMatrix::Identity(m.cols(), m.cols());
    }
    const auto svd = full_svd(m);
    const int r = rank_from_singular_values(svd.singularValues(), rel_tol);
    return svd.matrixV().rightCols(m.cols() - r);
}

CMatrix column_space(const CMatrix& m, double rel_tol) {
    if (m.cols() == 0) {
        return CMatrix(m.rows(), 0);
    }
    const auto svd = full_svd(m);
    const int r = rank_from_singular_values(svd.singularValues(), rel_tol);
    return svd.matrixU().leftCols(r);
}

CMatrix min_norm_solve(const CMatrix& a, const CMatrix& b) {
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(a);
    cod.setThreshold(1e-13);
    return cod.solve(b);
}

double inverse_condition(const CMatrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0) {
        return 0.0;
    }
    return sv(sv.size() - 1) / sv(0);
}

CVector vec(const CMatrix& m) {
    return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

CMatrix vec_columns(std::span<const CMatrix> matrices) {
    if (matrices.empty()) {
        return CMatrix(0, 0);
    }
    CMatrix out(matrices.front().size(), static_cast<Eigen::Index>(matrices.size()));
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        out.col(static_cast<Eigen::Index>(i)) = vec(matrices[i]);
    }
    return out;
}

double max_abs(const CMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

CMatrix ones_minus_identity(Eigen::Index n) {
    return CMatrix::Ones(n, n) - CMatrix::Identity(n, n);
}

CMatrix rref(const CMatrix& m, double tol, std::vector<int>* pivots) {
    CMatrix a = m;
    Eigen::Index row = 0;
    if (pivots != nullptr) {
        pivots->clear();
    }
    for (Eigen::Index col = 0; col < a.cols() && row < a.rows(); ++col) {
        Eigen::Index best = row;
        double best_abs = 0.0;
        for (Eigen::Index r = row; r < a.rows(); ++r) {
            if (std::abs(a(r, col)) > best_abs) {
                best_abs = std::abs(a(r, col));
                best = r;
            }
        }
        if (best_abs <= tol) {
            a.block(row, col, a.rows() - row, 1).setZero();
            continue;
        }
        a.row(row).swap(a.row(best));
        a.row(row) /= a(row, col);
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            if (r != row) {
                a.row(r) -= a(r, col) * a.row(row);
            }
        }
        if (pivots != nullptr) {
            pivots->push_back(static_cast<int>(col));
        }
        ++row;
    }
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (std::abs(a(r, c)) <= tol) {
                a(r, c) = 0.0;
            }
        }
    }
    return a;
}

}  // namespace equnfold
