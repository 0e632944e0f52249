// Batch front-end: cohybrid <assign|match|targets|diagnose|synth> [options]
//
// Exit codes: 0 success, 1 validation or configuration error, 2 I/O error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cohybrid/error.hpp"
#include "cohybrid/log.hpp"
#include "cohybrid/pipeline.hpp"
#include "cohybrid/scene_io.hpp"
#include "cohybrid/synthetic.hpp"

namespace {

struct Options {
  std::string config;
  std::string input;
  std::string output;
  std::string matchings;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  int synth_images = 100;
};

cohybrid::RunConfig resolve(const Options& o) {
  cohybrid::RunConfig cfg = o.config.empty() ? cohybrid::RunConfig{} : cohybrid::load_config(o.config);
  if (!o.input.empty()) cfg.input = o.input;
  if (!o.output.empty()) cfg.output = o.output;
  if (!o.matchings.empty()) cfg.matchings = o.matchings;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (cfg.threads < 1) throw cohybrid::ConfigError("--threads must be >= 1");
  if (cfg.output.empty()) throw cohybrid::ConfigError("no output directory (use --output or config 'output')");
  return cfg;
}

int run(const std::string& command, const Options& o) {
  using namespace cohybrid;
  const RunConfig cfg = resolve(o);

  if (command == "synth") {
    SyntheticOptions so;
    so.num_images = o.synth_images;
    const SceneFile scene = make_synthetic_scene(so, cfg.seed);
    write_outputs(cfg.output, {{"scene.json", scene_to_json(scene).dump(1) + "\n"}});
    log::info("synth: wrote " + std::to_string(so.num_images) + " images");
    return 0;
  }

  if (cfg.input.empty()) throw ConfigError("no input scene (use --input or config 'input')");
  const SceneFile scene = load_scene(cfg.input);
  log::info("loaded " + std::to_string(scene.images.size()) + " images from " + cfg.input.string());

  std::vector<OutputFile> files;
  if (command == "assign") {
    files = cmd_assign(scene, cfg);
  } else if (command == "match") {
    files = cmd_match(scene, cfg);
  } else if (command == "targets") {
    files = cmd_targets(scene, cfg);
  } else if (command == "diagnose") {
    std::optional<std::vector<std::vector<GtQueryMap>>> matchings;
    if (!cfg.matchings.empty())
      matchings = parse_matchings(parse_json_text(read_text_file(cfg.matchings), cfg.matchings.string()));
    files = cmd_diagnose(scene, cfg, matchings);
  }
  write_outputs(cfg.output, files);
  for (const auto& f : files) log::debug("wrote " + (cfg.output / f.name).string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative hybrid label assignment, set matching and diagnostics"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Run configuration (JSON)");
    sub->add_option("--input", opt.input, "Scene file (JSON)");
    sub->add_option("--output", opt.output, "Output directory");
    sub->add_option("--seed", opt.seed, "Seed for synthetic proposals");
    sub->add_option("--threads", opt.threads, "Worker threads");
  };
  add_common(app.add_subcommand("assign", "Run the auxiliary-head assigners"));
  add_common(app.add_subcommand("match", "Hungarian matching of predictions to ground truth"));
  add_common(app.add_subcommand("targets", "Query groups, positive-query seeds and target bundles"));
  auto* diag = app.add_subcommand("diagnose", "IoF/IoB curves, score maps and matching instability");
  add_common(diag);
  diag->add_option("--matchings", opt.matchings, "Per-epoch gt->query matchings (JSON)");
  auto* synth = app.add_subcommand("synth", "Write a synthetic scene corpus");
  add_common(synth);
  synth->add_option("--images", opt.synth_images, "Number of images")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const cohybrid::IoError& e) {
    cohybrid::log::error(e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    cohybrid::log::error(e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    cohybrid::log::error(e.what());
    return 1;
  } catch (const std::exception& e) {
    cohybrid::log::error(std::string("unexpected failure: ") + e.what());
    return 1;
  }
}
