#pragma once

// Critical spectrum of a delay operator: root location, the bases Phi/Psi
// normalised by (Psi, Phi) = I, the reduced matrix B, and the
// representation induced on the centre coordinates.

#include "equnfold/delay_system.hpp"
#include "equnfold/group_algebra.hpp"

#include <optional>
#include <vector>

namespace equnfold {

struct RootOptions {
    double residual_tol = 1e-12;
    int max_iterations = 100;
    double derivative_floor = 1e-14;
};

struct RootResult {
    cplx root;
    double residual = 0.0;        // |det Delta(root)|
    double smallest_singular = 0.0;
    int iterations = 0;
    int multiplicity_estimate = 1;
    bool multiple_root_suspected = false;
};

/// Newton iteration on det Delta with Jacobi's formula for the derivative,
/// multiplicity-corrected near rank-deficient points. Throws
/// Error(Convergence) with the last iterate on failure.
[[nodiscard]] RootResult find_root(const DelayOperator& op, cplx guess, const RootOptions& options = {});

struct SpectralFrame {
    DelayOperator op;
    std::vector<cplx> eigenvalues;   // one per basis column, in basis order
    std::vector<EigenFunction> phi;
    std::vector<AdjointFunction> psi;
    CMatrix B;
    std::optional<Representation> G;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(phi.size()); }
    [[nodiscard]] int state_dim() const noexcept { return op.dim(); }
    /// n x c matrix Phi(theta).
    [[nodiscard]] CMatrix phi_at(double theta) const;
    /// c x n matrix Psi(s).
    [[nodiscard]] CMatrix psi_at(double s) const;
    /// Distinct eigenvalues in first-appearance order.
    [[nodiscard]] std::vector<cplx> distinct_eigenvalues() const;
};

struct EigenbasisOptions {
    double rank_tol = 1e-8;       // relative singular-value cutoff for the null space
    double root_tol = 1e-9;       // accepted |Delta u| for supplied directions
    /// Optional directions per eigenvalue (same order as the eigenvalue
    /// list). An empty entry means "compute from the null space".
    std::vector<std::vector<CVector>> seeds;
};

/// Builds the semisimple frame for distinct eigenvalues `lambdas`.
/// Throws Error(Defective) when the Gram matrix is singular and
/// Error(Structural) on non-roots, repeated eigenvalues or bad seeds.
[[nodiscard]] SpectralFrame eigenbasis(const DelayOperator& op, const std::vector<cplx>& lambdas,
                                       const EigenbasisOptions& options = {});

/// G(g)_{ij} = (psi_i, rho(g) phi_j). Throws Error(Structural) if op is not
/// equivariant, Error(Verification) if the result fails to be a
/// representation or to satisfy rho(g) Phi = Phi G(g).
[[nodiscard]] Representation induce_representation(const SpectralFrame& frame, const Representation& rep);

struct FrameReport {
    double null_residual = 0.0;      // max |Delta(lambda) u|, |w Delta(lambda)|
    double gram_residual = 0.0;      // ||(Psi, Phi) - I||
    double b_residual = 0.0;         // ||B - diag(eigenvalues)||
    double commute_residual = 0.0;   // max ||B G - G B|| (0 without G)
    double transfer_residual = 0.0;  // max ||(Psi, g Phi) - (Psi g, Phi)|| (0 without G)
};

[[nodiscard]] FrameReport check_frame(const SpectralFrame& frame, const Representation* rep = nullptr);

/// Applies rho(g) to every column eigenfunction direction.
[[nodiscard]] std::vector<EigenFunction> act_on(const CMatrix& g, const std::vector<EigenFunction>& phi);

}  // namespace equnfold
