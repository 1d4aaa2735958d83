#pragma once

#include <cstdint>
#include <string>

#include "blaze/dist_hash_map.hpp"
#include "blaze/dist_vector.hpp"
#include "blaze/mapreduce.hpp"

namespace blaze::apps {

struct WordCountResult {
  DistHashMap<std::string, std::uint64_t> counts;
  JobStats stats;
};

// Splits every line on single spaces (empty tokens dropped, no other
// normalization) and counts each token. Collective.
WordCountResult wordcount(const DistVector<std::string>& lines, const MapReduceOptions& options = {});

}  // namespace blaze::apps
