#pragma once

#include <filesystem>

#include "biad/rating_matrix.hpp"

namespace biad {

/// Dense CSV matrix format: header line "<users>,<items>", then one row per
/// user of comma-separated decimals. UTF-8, '.' decimal separator, '\n' line
/// endings. Values are written in shortest round-trip form, so
/// load(save(M)) == M exactly.
void save_matrix(const RatingMatrix& matrix, const std::filesystem::path& path);

/// Throws ParseError naming the offending line/column on malformed input
/// (wrong row length, non-numeric cell, value outside [0, 10]).
RatingMatrix load_matrix(const std::filesystem::path& path);

}  // namespace biad
