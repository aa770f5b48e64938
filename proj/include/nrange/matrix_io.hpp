#pragma once

// Matrix JSON: {"n": int, "entries": [[[re, im], ...], ...]} row-major.
// Extra top-level keys (name, params, notes) are ignored on read.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "nrange/core.hpp"

namespace nrange {

/// Parses matrix JSON. Syntax errors report line and column; ragged or
/// mis-sized rows raise DimensionError.
ComplexMatrix parse_matrix_json(std::string_view text);

ComplexMatrix matrix_from_json(const nlohmann::json& j);

ComplexMatrix load_matrix_file(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const ComplexMatrix& a);

/// [re, im] pair used for every complex scalar in JSON outputs.
nlohmann::json complex_to_json(Complex z);

}  // namespace nrange
