// blaze-gen <kind> [options]: writes deterministic synthetic input files.

#include <iostream>

#include "CLI11.hpp"
#include "blaze/apps/data.hpp"
#include "blaze/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate Blaze benchmark inputs"};
  std::string kind;
  std::uint64_t size = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::uint64_t pages = 0;
  int clusters = 5;
  int dim = 2;
  std::vector<std::string> inputs;
  app.add_option("kind", kind, "text, graph, or points")->required()->check(CLI::IsMember({"text", "graph", "points"}));
  app.add_option("--size", size, "text copies, edges, or points")->required();
  app.add_option("--seed", seed, "generator seed")->capture_default_str();
  app.add_option("--out", out, "output path")->required();
  app.add_option("--pages", pages, "graph: page count (default size / 10)");
  app.add_option("--clusters", clusters, "points: cluster count")->capture_default_str();
  app.add_option("--dim", dim, "points: dimension")->capture_default_str();
  app.add_option("--input", inputs, "text: base files (default: bundled sample text)");
  CLI11_PARSE(app, argc, argv);

  try {
    if (kind == "text") {
      if (inputs.empty()) {
        inputs = {blaze::apps::sample_text_dir() + "/genesis.txt", blaze::apps::sample_text_dir() + "/sonnets.txt"};
      }
      std::vector<std::string> base;
      for (const auto& f : inputs) {
        auto lines = blaze::apps::read_lines(f);
        base.insert(base.end(), lines.begin(), lines.end());
      }
      blaze::apps::write_lines(out, blaze::apps::replicate_text(base, size));
    } else if (kind == "graph") {
      blaze::apps::GraphSpec spec{size, pages ? pages : std::max<std::uint64_t>(1, size / 10), seed};
      blaze::apps::write_edges(out, blaze::apps::generate_edges(spec));
    } else {
      blaze::apps::PointCloudSpec spec;
      spec.points = size;
      spec.clusters = clusters;
      spec.dim = dim;
      spec.seed = seed;
      blaze::apps::write_points(out, blaze::apps::generate_points(spec));
    }
  } catch (const std::exception& e) {
    std::cerr << "blaze-gen: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
