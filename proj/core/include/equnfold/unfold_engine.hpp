#pragma once

// Matrix-level versal and Gamma-versal unfolding machinery, and its
// realisation as point-delay perturbations of a delay operator.

#include "equnfold/delay_system.hpp"
#include "equnfold/group_algebra.hpp"
#include "equnfold/spectral_frame.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace equnfold {

struct JordanBlocks {
    cplx eigenvalue;
    std::vector<int> sizes;
};
using JordanSpec = std::vector<JordanBlocks>;

/// Codimension of the similarity orbit: sum_j sum_l (2l - 1) n_{j,l} with
/// the block sizes of each eigenvalue sorted in decreasing order.
[[nodiscard]] int codimension_formula(const JordanSpec& spec);

/// Groups the diagonal of B into eigenvalues with 1x1 blocks.
[[nodiscard]] JordanSpec jordan_spec_of_diagonal(const CMatrix& b, double tol = 1e-9);

/// Matrix of Y -> [B, Y] acting on column-major vec(Y).
[[nodiscard]] CMatrix ad_matrix(const CMatrix& b);

struct OrbitGeometry {
    CMatrix B;
    JordanSpec jordan;
    std::vector<CMatrix> tangent_basis;     // orthonormal basis of T_B Sigma
    std::vector<CMatrix> complement_basis;  // Omega_1..Omega_delta
    /// (row, col) of each Omega when they are elementary matrices.
    std::vector<std::pair<int, int>> complement_positions;
    int codimension = 0;
};

/// Tangent space of the similarity orbit and the complement given by the
/// centraliser of B^H. For diagonal B the complement consists of
/// elementary matrices, ordered by (column within eigenvalue block, row
/// within block, block). Throws Error(Structural) if the Jordan spec does
/// not match B and Error(Verification) if rank and formula disagree.
[[nodiscard]] OrbitGeometry orbit_geometry(const CMatrix& b, const JordanSpec& spec);

struct GammaOrbitGeometry {
    std::vector<CMatrix> commutant;        // orthonormal basis of Mat^Gamma
    std::vector<CMatrix> tangent_basis;    // orthonormal basis of T_B Sigma^Gamma
    int centralizer_dim = 0;               // dim Z^Gamma_B

    [[nodiscard]] int codimension() const noexcept {
        return static_cast<int>(commutant.size()) - static_cast<int>(tangent_basis.size());
    }
};

/// Throws Error(Structural) if B does not commute with G.
[[nodiscard]] GammaOrbitGeometry gamma_orbit_geometry(const CMatrix& b, const Representation& g);

/// Applies the commutant projection for G to each direction.
[[nodiscard]] std::vector<CMatrix> project_unfolding_directions(std::span<const CMatrix> directions,
                                                                const Representation& g);

struct ThetaReport {
    CMatrix theta;                    // p x delta coordinates along Omega
    std::vector<double> residuals;    // decomposition residual per row
    std::vector<int> selected_rows;   // 0-based, increasing
    int rank = 0;
};

/// Decomposes each direction as [B, y_i] + sum_j theta_ij Omega_j and picks
/// the earliest maximal independent set of rows. Throws
/// Error(Verification) when a decomposition residual exceeds 1e-8.
[[nodiscard]] ThetaReport theta_extract(const OrbitGeometry& geometry, std::span<const CMatrix> directions,
                                        double rel_tol = 1e-9);

/// One n x c matrix per Omega slot: a single nonzero column at the Omega
/// column, holding the minimum-norm v with Psi_block(0) v = unit vector.
[[nodiscard]] std::vector<CMatrix> build_R_matrices(const SpectralFrame& frame, const OrbitGeometry& geometry);

using EntryMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Realization {
    std::vector<CMatrix> coefficients;  // one n x n matrix per lag
    double residual = 0.0;              // max |sum_j A_j Phi(-lag_j) - R|
    int stacked_rank = 0;
};

/// Solves R = sum_j A_j Phi(-lag_j) for the entries of the A_j allowed by
/// `masks` (all entries when empty), minimum-norm. Throws
/// Error(RankDeficient) if the stacked Phi has rank < c and
/// Error(Infeasible) if the masked system has no solution.
[[nodiscard]] Realization solve_delay_realization(const SpectralFrame& frame, std::span<const double> lags,
                                                  const CMatrix& r, std::span<const EntryMask> masks = {});

/// Rank of col(Phi(-lag_0), ..., Phi(-lag_J)).
[[nodiscard]] int stacked_phi_rank(const SpectralFrame& frame, std::span<const double> lags);

/// M_{l,j} = exp(-lambda_l lag_j): the scalar system solved per equivariant
/// pattern when Phi has rank one per eigenvalue.
[[nodiscard]] CMatrix exponential_matrix(std::span<const cplx> eigenvalues, std::span<const double> lags);

/// Native lags of the operator plus 0, extended by equally spaced lags in
/// (0, tau] until the stacked Phi reaches rank c (at most c extra lags).
[[nodiscard]] std::vector<double> default_delay_set(const SpectralFrame& frame);

struct UnfoldingParameter {
    std::string name;
    int source_index = 0;               // 0-based index into the full direction list
    std::vector<CMatrix> coefficients;  // one per lag
};

struct UnfoldingFamily {
    DelayOperator base;
    std::vector<double> lags;
    std::vector<UnfoldingParameter> parameters;
    bool gamma_equivariant = false;

    /// L(alpha) as a delay operator.
    [[nodiscard]] DelayOperator at(std::span<const cplx> alpha) const;
    /// Derivative of the reduced matrix along parameter m:
    /// Psi(0) sum_j A_j^m Phi(-lag_j).
    [[nodiscard]] CMatrix direction(const SpectralFrame& frame, int m) const;
    [[nodiscard]] std::vector<CMatrix> directions(const SpectralFrame& frame) const;
};

struct VersalityReport {
    int commutant_dim = 0;
    int tangent_dim = 0;
    int codimension = 0;
    int parameter_count = 0;
    int span_rank = 0;        // rank of tangent + directions
    int deficiency = 0;       // commutant_dim - span_rank
    double outside_residual = 0.0;  // distance of directions from Mat^Gamma
    bool versal = false;
    bool miniversal = false;
};

[[nodiscard]] VersalityReport verify_gamma_versality(const CMatrix& b, const Representation& g,
                                                     std::span<const CMatrix> directions);

struct AssemblyOptions {
    std::vector<EntryMask> masks;   // per lag; empty means unrestricted
    bool select_miniversal = true;  // false keeps every direction
};

struct AssemblyResult {
    UnfoldingFamily family;
    ThetaReport theta;
    GammaOrbitGeometry gamma;
    VersalityReport versality;
    std::vector<CMatrix> R;             // unprojected, one per Omega
    std::vector<CMatrix> R_projected;   // intertwiner projection rho <- G
    std::vector<CMatrix> directions;    // Psi(0) R_projected, one per Omega
    double projection_identity_residual = 0.0;  // pi_c(Psi(0) R) vs Psi(0) R_projected
    double reconstruction_residual = 0.0;
    double equivariance_residual = 0.0;
};

/// Full pipeline over the frame's operator: R matrices, projection,
/// Theta selection, delay realisation of the selected directions, and
/// Gamma-versality check. The frame must carry G.
[[nodiscard]] AssemblyResult assemble_gamma_unfolding(const Representation& rep, const SpectralFrame& frame,
                                                      const OrbitGeometry& geometry, std::span<const double> lags,
                                                      const AssemblyOptions& options = {});

struct RealFamily {
    UnfoldingFamily family;
    std::vector<std::pair<int, int>> pairs;  // (m, conjugate partner), 0-based
    CMatrix reparametrization;               // real directions in a basis of the complex span
    double inverse_condition = 0.0;
};

/// Replaces each conjugate pair (L, conj L) by (Re L, Im L). Real
/// parameters pass through. Throws Error(Structural) when a complex
/// parameter has no conjugate partner and Error(Verification) when the
/// reparametrisation is singular.
[[nodiscard]] RealFamily realify(const UnfoldingFamily& family, double tol = 1e-9);

}  // namespace equnfold
