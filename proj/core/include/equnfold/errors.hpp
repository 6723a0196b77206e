#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace equnfold {

enum class ErrorKind {
    Structural,    // shapes, group mismatch, malformed input
    Convergence,   // iterative solver did not converge
    Defective,     // Jordan structure where a semisimple frame was required
    RankDeficient, // a rank condition of the construction failed
    Infeasible,    // linear system has no solution under the requested mask
    Verification,  // a post-condition check failed
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Structural: return "structural";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Defective: return "defective";
        case ErrorKind::RankDeficient: return "rank_deficient";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::Verification: return "verification";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace equnfold
