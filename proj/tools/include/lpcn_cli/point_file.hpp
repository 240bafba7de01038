#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "lpcn/core.hpp"

namespace lpcn::cli {

// Plain-text point file:
//
//   # dims F
//   x y z f_1 ... f_F
//   ...
//
// Whitespace-separated, one point per line, ids assigned in line order.
// Blank lines and further '#' comment lines are skipped.

PointCloud read_point_file(std::istream& in, const std::string& source_name);

/// Throws Error naming `path` when it cannot be opened.
PointCloud load_point_file(const std::string& path);

void write_point_file(std::ostream& out, const PointCloud& cloud);

}  // namespace lpcn::cli
