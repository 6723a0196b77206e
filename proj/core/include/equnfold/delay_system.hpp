#pragma once

// Linear retarded equations with finitely many point delays,
//   z'(t) = sum_k A_k z(t - r_k),
// their characteristic matrix and the adjoint bilinear form.

#include "equnfold/group_algebra.hpp"
#include "equnfold/linalg.hpp"

#include <vector>

namespace equnfold {

struct DelayTerm {
    double delay = 0.0;  // nonnegative lag r_k
    CMatrix coefficient;
};

class DelayOperator {
public:
    /// Throws Error(Structural) unless every coefficient is n x n, lags are
    /// nonnegative and pairwise distinct, and there is at least one term.
    DelayOperator(int n, std::vector<DelayTerm> terms);

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] const std::vector<DelayTerm>& terms() const noexcept { return terms_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] bool is_real(double tol = 0.0) const;

    /// Same operator with the terms summed over equal lags; zero lag terms
    /// are kept so the result is never empty.
    [[nodiscard]] static DelayOperator merged(int n, const std::vector<DelayTerm>& terms);

private:
    int n_;
    std::vector<DelayTerm> terms_;
    double horizon_ = 0.0;
};

/// phi(theta) = direction * exp(exponent * theta) on [-tau, 0].
struct EigenFunction {
    CVector direction;
    cplx exponent;

    [[nodiscard]] CVector operator()(double theta) const { return direction * std::exp(exponent * theta); }
};

/// psi(s) = direction * exp(-exponent * s) on [0, tau].
struct AdjointFunction {
    CRowVector direction;
    cplx exponent;

    [[nodiscard]] CRowVector operator()(double s) const { return direction * std::exp(-exponent * s); }
};

/// Delta(lambda) = lambda I - sum_k A_k exp(-lambda r_k).
[[nodiscard]] CMatrix char_matrix(const DelayOperator& op, cplx lambda);

/// d/dlambda Delta(lambda) = I + sum_k r_k A_k exp(-lambda r_k).
[[nodiscard]] CMatrix char_matrix_derivative(const DelayOperator& op, cplx lambda);

/// max over (g, k) of ||rho(g) A_k - A_k rho(g)||_max.
[[nodiscard]] double check_equivariance(const DelayOperator& op, const Representation& rep);

/// (psi, phi) = psi(0) phi(0) - sum_k int_0^{-r_k} psi(xi + r_k) A_k phi(xi) dxi,
/// in closed form.
[[nodiscard]] cplx bilinear_form(const AdjointFunction& psi, const EigenFunction& phi,
                                 const DelayOperator& op);

/// The same pairing by composite 8-point Gauss-Legendre panels on each
/// delay interval; npoints nodes per interval (rounded up to a multiple
/// of 8, at least 8).
[[nodiscard]] cplx bilinear_form_quadrature(const AdjointFunction& psi, const EigenFunction& phi,
                                            const DelayOperator& op, int npoints = 64);

/// Gram matrix ((psi_i, phi_j)) for row and column families.
[[nodiscard]] CMatrix bilinear_gram(const std::vector<AdjointFunction>& psi,
                                    const std::vector<EigenFunction>& phi, const DelayOperator& op);

}  // namespace equnfold
