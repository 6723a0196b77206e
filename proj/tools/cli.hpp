#pragma once

// Command-line front end: configs, the unfold pipeline, artifact
// verification and the subcommand dispatcher.

#include "equnfold/d3_example.hpp"
#include "equnfold/json_io.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace equnfold::cli {

using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitVersalOnly = 3;

struct Tolerances {
    double root = 1e-12;  // |det Delta| accepted by the root finder
    double rank = 1e-8;   // relative null-space cutoff for eigenbasis
};

struct RunConfig {
    std::optional<d3::Case> preset;
    int point_index = 0;                  // which located point a preset uses
    std::optional<json> model;
    std::optional<json> group;
    std::vector<cplx> lambda_seeds;
    std::vector<std::vector<CVector>> direction_seeds;
    std::optional<std::vector<double>> delays;
    std::vector<EntryMask> sparsity;
    Tolerances tolerances;
    bool select_miniversal = true;
    std::optional<std::filesystem::path> output;
};

/// Validates and resolves a config document; `*_file` entries are read
/// relative to `base_dir`. Throws io::SchemaError.
[[nodiscard]] RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir = {});

struct UnfoldOutcome {
    json artifact;
    int exit_code = kExitOk;
};

/// Runs the pipeline. Pipeline errors are captured in the artifact with
/// exit code 1; schema problems propagate as io::SchemaError.
[[nodiscard]] UnfoldOutcome unfold(const RunConfig& config);

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] json to_json() const;
    void print(std::ostream& os) const;
};

/// Re-derives the frame, projections, direct sums, equivariance,
/// reconstruction and versality from an artifact. Throws io::SchemaError
/// when the document does not follow the schema.
[[nodiscard]] VerifyReport verify_artifact(const json& artifact);

/// Dispatches a full command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace equnfold::cli
