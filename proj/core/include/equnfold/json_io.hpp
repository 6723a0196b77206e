#pragma once

// JSON contract shared by the CLI and downstream users. Complex numbers
// are [re, im] pairs, matrices are arrays of rows, keys are sorted.

#include "equnfold/delay_system.hpp"
#include "equnfold/group_algebra.hpp"
#include "equnfold/spectral_frame.hpp"
#include "equnfold/unfold_engine.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace equnfold::io {

using nlohmann::json;

inline constexpr const char* kSchema = "equivar-unfold/1";

/// Malformed or mistyped JSON input.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] json complex_to_json(cplx z);
/// Accepts [re, im] or a bare real number.
[[nodiscard]] cplx complex_from_json(const json& j);

[[nodiscard]] json matrix_to_json(const CMatrix& m);
[[nodiscard]] CMatrix matrix_from_json(const json& j);
[[nodiscard]] json vector_to_json(const CMatrix& v);  // flat list of entries
[[nodiscard]] CVector vector_from_json(const json& j);

[[nodiscard]] json operator_to_json(const DelayOperator& op);
[[nodiscard]] DelayOperator operator_from_json(const json& j);

/// {"order", "generators"}: the matrices at the group's generators.
[[nodiscard]] json representation_to_json(const Representation& rep);
/// {"generators": [...]} closes the generators; {"mul_table", "matrices"}
/// uses the table as given.
[[nodiscard]] Representation representation_from_json(const json& j);

[[nodiscard]] json frame_to_json(const SpectralFrame& frame);
[[nodiscard]] json theta_to_json(const ThetaReport& theta);
[[nodiscard]] json versality_to_json(const VersalityReport& rep);

[[nodiscard]] json family_to_json(const UnfoldingFamily& family);
/// Reads lags and parameters; the base operator is supplied separately.
[[nodiscard]] UnfoldingFamily family_from_json(const json& j, const DelayOperator& base);

[[nodiscard]] json mask_to_json(const EntryMask& m);
[[nodiscard]] EntryMask mask_from_json(const json& j);

/// Pretty-printed with a trailing newline.
[[nodiscard]] std::string dump(const json& j);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

[[nodiscard]] json read_file(const std::filesystem::path& path);

/// Typed accessors that raise SchemaError with the key name.
[[nodiscard]] const json& require(const json& j, const char* key);
[[nodiscard]] double require_number(const json& j, const char* key);

}  // namespace equnfold::io
