#pragma once

// Finite groups, matrix representations, and the group-average projections
// onto commutants and intertwiner spaces.

#include "equnfold/linalg.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace equnfold {

/// A finite group given by its multiplication table. Element 0 need not be
/// the identity; `identity()` records which index is.
class FiniteGroup {
public:
    /// Validates the table: Latin square, two-sided identity, inverses,
    /// associativity (checked exhaustively). Throws Error(Structural).
    explicit FiniteGroup(std::vector<std::vector<int>> mul_table,
                         std::vector<int> generators = {});

    [[nodiscard]] int order() const noexcept { return static_cast<int>(table_.size()); }
    [[nodiscard]] int identity() const noexcept { return identity_; }
    [[nodiscard]] int mul(int a, int b) const { return table_[a][b]; }
    [[nodiscard]] int inverse(int a) const { return inverse_[a]; }
    [[nodiscard]] const std::vector<std::vector<int>>& mul_table() const noexcept { return table_; }

    /// Generating subset used to build commutation constraints. Falls back
    /// to every element when the group was built from a bare table.
    [[nodiscard]] const std::vector<int>& generators() const noexcept { return generators_; }

private:
    std::vector<std::vector<int>> table_;
    std::vector<int> inverse_;
    std::vector<int> generators_;
    int identity_ = 0;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

/// A matrix representation: one invertible dim x dim matrix per element.
struct Representation {
    GroupPtr group;
    int dim = 0;
    std::vector<CMatrix> matrices;

    [[nodiscard]] const CMatrix& operator()(int g) const { return matrices[static_cast<std::size_t>(g)]; }
};

/// Builds a representation over an existing group. Throws Error(Structural)
/// on shape mismatch or a singular matrix. The homomorphism property is
/// not enforced here; use check_representation.
[[nodiscard]] Representation make_representation(GroupPtr group, std::vector<CMatrix> matrices);

/// Closes a set of generator matrices under multiplication, deduplicating
/// with absolute entrywise tolerance `tol`. The identity gets index 0 and
/// generator i gets index i+1 (when the generators are distinct and not
/// the identity).
[[nodiscard]] Representation close_generators(const std::vector<CMatrix>& generators,
                                              int max_order = 512, double tol = 1e-10);

/// The trivial (all-identity) representation of `group` on C^dim.
[[nodiscard]] Representation trivial_representation(GroupPtr group, int dim);

struct RepresentationReport {
    std::vector<std::pair<int, int>> violations;  // (g, h) with rho(gh) != rho(g) rho(h)
    double max_residual = 0.0;
    std::pair<int, int> worst_pair{0, 0};
    bool identity_ok = true;

    [[nodiscard]] bool valid() const noexcept { return violations.empty() && identity_ok; }
};

[[nodiscard]] RepresentationReport check_representation(const Representation& rep,
                                                        double tol = 1e-10);

/// (1/|G|) sum_g left(g) M right(g)^{-1}. The result intertwines the two
/// representations. With left == right this is the projection onto the
/// commutant.
[[nodiscard]] CMatrix equivariant_average(const Representation& left, const Representation& right,
                                          const CMatrix& m);

/// Orthonormal (Frobenius) basis of { X : rho(g) X = X rho(g) for all g }.
[[nodiscard]] std::vector<CMatrix> commutant_basis(const Representation& rep);

/// Largest ||rho(g) X - X rho(g)|| over the group.
[[nodiscard]] double commutation_residual(const Representation& rep, const CMatrix& x);

}  // namespace equnfold
