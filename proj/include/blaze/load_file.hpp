#pragma once

#include <string>
#include <vector>

#include "blaze/dist_vector.hpp"
#include "blaze/transport.hpp"

namespace blaze {

// Reads newline-delimited lines in parallel: the file is cut into equal byte
// ranges, one per worker, and a worker keeps every line whose first byte lies
// in its range. The trailing newline is optional. Several paths are treated
// as one stream in which each file also ends a line. Collective.
//
// Throws InputError on a missing file or when workers see different sizes.
DistVector<std::string> load_file(Context& ctx, const std::string& path);
DistVector<std::string> load_file(Context& ctx, const std::vector<std::string>& paths);

}  // namespace blaze
