#include "blaze/apps/wordcount.hpp"

#include <string_view>

namespace blaze::apps {

WordCountResult wordcount(const DistVector<std::string>& lines, const MapReduceOptions& options) {
  WordCountResult result{DistHashMap<std::string, std::uint64_t>(lines.context()), {}};
  const auto mapper = [](std::size_t, const std::string& line, const auto& emit) {
    std::string_view rest = line;
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      const std::string_view word = rest.substr(0, sp);
      if (!word.empty()) emit(word, std::uint64_t{1});
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
  };
  result.stats = mapreduce(lines, mapper, "sum", result.counts, options);
  return result;
}

}  // namespace blaze::apps
