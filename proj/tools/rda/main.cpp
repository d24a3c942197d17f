#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace fs = std::filesystem;
using namespace rda::cli;

int main(int argc, char** argv) {
  CLI::App app{"rda: diffusion-based feature-space OOD detection with residual accumulation amplification"};
  app.require_subcommand(1);

  GlobalOptions global;
  std::uint64_t seed = 0;
  std::string config;
  auto* seed_opt = app.add_option("--seed", seed, "Override every seed of the command")->group("Global");
  app.add_option("--threads", global.threads, "Worker threads for scoring")->check(CLI::PositiveNumber)->group("Global");
  app.add_option("--set", global.overrides, "Configuration override key=value (repeatable)")->group("Global");
  app.add_option("--config", config, "JSON configuration file (flat dotted keys)")->group("Global");

  fs::path out_dir;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ID/OOD benchmark");
  synth->add_option("--out", out_dir, "Output directory")->required();

  fs::path features, model, out;
  auto* train = app.add_subcommand("train", "Fit the denoiser on ID training features");
  train->add_option("--features", features, "Training feature file")->required();
  train->add_option("--out", out, "Checkpoint path")->required();

  std::optional<fs::path> scores_out;
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the decision threshold on validation features");
  calibrate->add_option("--model", model, "Checkpoint")->required();
  calibrate->add_option("--features", features, "Validation feature file")->required();
  calibrate->add_option("--out", out, "Threshold JSON path")->required();
  calibrate->add_option("--scores", scores_out, "Also write the calibration score dump");

  std::optional<fs::path> threshold, report_out;
  auto* score = app.add_subcommand("score", "Score features; with --threshold also evaluate");
  score->add_option("--model", model, "Checkpoint")->required();
  score->add_option("--features", features, "Feature file to score")->required();
  score->add_option("--out", out, "Score dump (JSON lines)")->required();
  score->add_option("--threshold", threshold, "Threshold JSON; enables classification and metrics");
  score->add_option("--report", report_out, "Evaluation report JSON path");

  fs::path scores_in, threshold_in;
  auto* eval = app.add_subcommand("eval", "Evaluate a score dump against a threshold");
  eval->add_option("--scores", scores_in, "Score dump")->required();
  eval->add_option("--threshold", threshold_in, "Threshold JSON")->required();
  eval->add_option("--report", report_out, "Evaluation report JSON path");

  for (auto* sub : {synth, train, calibrate, score, eval}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (*seed_opt) global.seed = seed;
  if (!config.empty()) global.config = config;

  Streams io{std::cout, std::cerr};
  if (*synth) return cmd_synth(out_dir, global, io);
  if (*train) return cmd_train(features, out, global, io);
  if (*calibrate) return cmd_calibrate(model, features, out, scores_out, global, io);
  if (*score) return cmd_score(model, features, out, threshold, report_out, global, io);
  if (*eval) return cmd_eval(scores_in, threshold_in, report_out, io);
  return kConfigError;
}
