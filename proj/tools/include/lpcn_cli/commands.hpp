#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lpcn/core.hpp"
#include "lpcn/feature_compute.hpp"

namespace lpcn::cli {

/// Runs the tool with `args` (excluding the program name). Reports go to
/// `out` unless --out names a file; diagnostics go to `err`. Returns the
/// process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Three layers (3+F) -> 64 -> 64 -> 128, relu after each, weights drawn
/// from `seed`.
ModelSpec default_model_spec(std::size_t feat_dim, std::uint64_t seed);

/// "knn" or "bq:<radius>".
void parse_neighbor(const std::string& text, RunConfig& config);

/// Cache capacity: a count, "<m>K" for a multiple of the subset size, or
/// "unbounded".
std::size_t parse_cache_entries(const std::string& text, std::size_t subset_size);

}  // namespace lpcn::cli
