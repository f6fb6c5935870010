#include <CLI11.hpp>
#include <cstdio>
#include <optional>

#include "hyperlab/runner.hpp"

namespace hr = hyperlab::runner;

// Exit status: 0 all verdicts pass, 1 some verdict fails, 2 configuration or runtime error.
int main(int argc, char** argv) {
  CLI::App app{"hyperlab verification runner"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON experiment config (defaults are built in)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--seed", seed, "corpus seed (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "print only the summary line");
  app.fallthrough();
  for (const auto& name : hr::suite_names()) app.add_subcommand(name, "run the " + name + " suite");

  CLI11_PARSE(app, argc, argv);
  const std::string check = app.get_subcommands().front()->get_name();
  try {
    hr::ExperimentConfig config = config_path.empty() ? hr::default_config(check) : hr::load_config(config_path);
    if (config.check != check) {
      throw hr::SchemaError("/check", "config is for '" + config.check + "' but subcommand is '" + check + "'");
    }
    if (!out_dir.empty()) config.output = out_dir;
    if (seed) config.corpus.seed = *seed;
    const auto report = hr::run(config, {jobs, true});
    if (!quiet) {
      for (const auto& v : report.verdicts) {
        std::printf("%-4s %-22s %-40s value=%-13.6g threshold=%-11.4g %s\n", v.pass ? "PASS" : "FAIL",
                    v.group.c_str(), v.name.c_str(), v.value, v.threshold, v.pass ? "" : v.recipe.c_str());
      }
      for (const auto& w : report.warnings) std::printf("warning: %s\n", w.c_str());
    }
    std::printf("%s: %s (%zu verdicts, %.2f s) -> %s\n", check.c_str(), report.pass ? "PASS" : "FAIL",
                report.verdicts.size(), report.wall_seconds, config.output.c_str());
    return report.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
