#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rda/diffusion.hpp"
#include "rda/raa.hpp"
#include "rda/synthetic.hpp"
#include "run_config.hpp"

namespace rda::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kIoError = 2,
  kNumericalError = 3,
};

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::vector<std::string> overrides;
  std::optional<std::filesystem::path> config;
};

/// Output sinks: `out` gets results and progress, `err` diagnostics and the
/// resolved-config log line.
struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// Defaults for each command's configuration keys.
nlohmann::ordered_json synth_defaults();
nlohmann::ordered_json train_defaults();
nlohmann::ordered_json scoring_defaults();

/// defaults <- config file <- --set overrides <- --seed.
RunConfig resolve_config(nlohmann::ordered_json defaults, const GlobalOptions& global,
                         std::initializer_list<const char*> seed_keys);

SyntheticSpec synthetic_spec_from(const RunConfig& cfg);
TrainConfig train_config_from(const RunConfig& cfg);
NoiseLevelSampler noise_sampler_from(const RunConfig& cfg);
RaaConfig raa_config_from(const RunConfig& cfg);

int cmd_synth(const std::filesystem::path& out_dir, const GlobalOptions& global, Streams io);

int cmd_train(const std::filesystem::path& features, const std::filesystem::path& out_model,
              const GlobalOptions& global, Streams io);

/// `scores_out`, when set, receives the score dump of the calibration rows.
int cmd_calibrate(const std::filesystem::path& model, const std::filesystem::path& features,
                  const std::filesystem::path& out_threshold, const std::optional<std::filesystem::path>& scores_out,
                  const GlobalOptions& global, Streams io);

/// Scores `features`; with a threshold also classifies and evaluates
/// (labelled rows only), writing the report JSON to `report_out` when set.
int cmd_score(const std::filesystem::path& model, const std::filesystem::path& features,
              const std::filesystem::path& out_scores, const std::optional<std::filesystem::path>& threshold,
              const std::optional<std::filesystem::path>& report_out, const GlobalOptions& global, Streams io);

/// Evaluates an existing score dump against a threshold.
int cmd_eval(const std::filesystem::path& scores, const std::filesystem::path& threshold,
             const std::optional<std::filesystem::path>& report_out, Streams io);

/// Runs `body`, mapping library exceptions onto exit codes and printing the
/// diagnostic to io.err.
int run_guarded(const std::function<int()>& body, Streams io);

}  // namespace rda::cli
