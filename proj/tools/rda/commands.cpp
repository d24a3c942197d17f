#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "rda/checkpoint.hpp"
#include "rda/errors.hpp"
#include "rda/eval.hpp"
#include "rda/feature_io.hpp"

namespace rda::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

json synth_defaults() {
  return {
      {"synth.dim", 16},
      {"synth.n_train", 2000},
      {"synth.n_val_id", 400},
      {"synth.n_test_id", 800},
      {"synth.n_val_ood", 200},
      {"synth.n_test_ood", 400},
      {"synth.id_kind", "isotropic_gaussian"},
      {"synth.id_scale", 1.0},
      {"synth.components", 4},
      {"synth.spread", 3.0},
      {"synth.ood_kind", "mean_shift"},
      {"synth.delta", 2.0},
      {"synth.gamma", 2.0},
      {"synth.axis", 0},
      {"synth.seed", 7},
  };
}

json train_defaults() {
  return {
      {"train.epochs", 100},
      {"train.batch_size", 64},
      {"train.learning_rate", 2e-4},
      {"train.beta1", 0.9},
      {"train.beta2", 0.999},
      {"train.epsilon", 1e-8},
      {"train.weight_decay", 0.01},
      {"train.seed", 0},
      {"train.loss_weighting", "edm_weighted"},
      {"train.lr_schedule", "constant"},
      {"noise.p_mean", -0.05},
      {"noise.p_std", 1.5},
      {"model.hidden", json::array()},
      {"model.activation", "silu"},
      {"model.sigma_data", nullptr},
  };
}

json scoring_defaults() {
  return {
      {"raa.T", 5},
      {"raa.s", 3},
      {"raa.m", 1.8},
      {"raa.noise_mean", 0.0},
      {"raa.noise_std", 1.0},
      {"raa.sigma_rec", nullptr},
      {"raa.track_iteration", false},
      {"raa.seed", 0},
      {"reverse.mode", "single_step"},
      {"reverse.steps", 1},
      {"reverse.step_size", 0.05},
      {"reverse.schedule", "geometric"},
      {"reverse.sigma_schedule", json::array()},
      {"reverse.stochastic", true},
      {"reverse.sigma_min", 0.002},
      {"reverse.sigma_max", 80.0},
      {"calibrate.population", "id_only"},
      {"calibrate.population_std", true},
      {"calibrate.coefficient", kDefaultThresholdCoefficient},
  };
}

RunConfig resolve_config(json defaults, const GlobalOptions& global, std::initializer_list<const char*> seed_keys) {
  RunConfig cfg(std::move(defaults));
  if (global.config) cfg.merge_file(*global.config);
  for (const auto& o : global.overrides) cfg.apply_override(o);
  if (global.seed) {
    for (const char* key : seed_keys) cfg.set(key, *global.seed);
  }
  return cfg;
}

SyntheticSpec synthetic_spec_from(const RunConfig& cfg) {
  SyntheticSpec spec;
  spec.dim = cfg.get_size("synth.dim");
  spec.id = {cfg.get_size("synth.n_train"), cfg.get_size("synth.n_val_id"), cfg.get_size("synth.n_test_id")};
  spec.ood = {0, cfg.get_size("synth.n_val_ood"), cfg.get_size("synth.n_test_ood")};
  spec.seed = cfg.get_u64("synth.seed");

  const auto id_kind = cfg.get_string("synth.id_kind");
  if (id_kind == "isotropic_gaussian") {
    spec.id_kind = IsotropicGaussian{cfg.get_double("synth.id_scale")};
  } else if (id_kind == "gaussian_mixture") {
    spec.id_kind =
        GaussianMixture{cfg.get_size("synth.components"), cfg.get_double("synth.spread"), cfg.get_double("synth.id_scale")};
  } else {
    throw ConfigError("unknown id_kind \"" + id_kind + "\"", "synth.id_kind");
  }

  const auto ood_kind = cfg.get_string("synth.ood_kind");
  if (ood_kind == "mean_shift") {
    spec.ood_kind = MeanShift{cfg.get_double("synth.delta")};
  } else if (ood_kind == "scale_shift") {
    spec.ood_kind = ScaleShift{cfg.get_double("synth.gamma")};
  } else if (ood_kind == "subspace_offset") {
    spec.ood_kind = SubspaceOffset{cfg.get_size("synth.axis"), cfg.get_double("synth.delta")};
  } else {
    throw ConfigError("unknown ood_kind \"" + ood_kind + "\"", "synth.ood_kind");
  }
  spec.validate();
  return spec;
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig t;
  t.epochs = cfg.get_size("train.epochs");
  t.batch_size = cfg.get_size("train.batch_size");
  t.learning_rate = cfg.get_double("train.learning_rate");
  t.beta1 = cfg.get_double("train.beta1");
  t.beta2 = cfg.get_double("train.beta2");
  t.epsilon = cfg.get_double("train.epsilon");
  t.weight_decay = cfg.get_double("train.weight_decay");
  t.seed = cfg.get_u64("train.seed");
  t.loss_weighting = parse_loss_weighting(cfg.get_string("train.loss_weighting"));
  t.lr_schedule = parse_lr_schedule(cfg.get_string("train.lr_schedule"));
  t.sigma_data = cfg.get_optional_double("model.sigma_data");
  t.arch.hidden = cfg.get_size_list("model.hidden");
  try {
    t.arch.hidden_activation = parse_activation(cfg.get_string("model.activation"));
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), "model.activation");
  }
  try {
    t.validate();
  } catch (const ConfigError& e) {
    // AdamW reports bare field names; qualify them with the key prefix.
    const bool bare = !e.field().empty() && e.field().find('.') == std::string::npos;
    throw ConfigError(e.what(), bare ? "train." + e.field() : e.field());
  }
  return t;
}

NoiseLevelSampler noise_sampler_from(const RunConfig& cfg) {
  NoiseLevelSampler s{cfg.get_double("noise.p_mean"), cfg.get_double("noise.p_std")};
  s.validate();
  return s;
}

RaaConfig raa_config_from(const RunConfig& cfg) {
  RaaConfig r;
  r.iterations = cfg.get_size("raa.T");
  r.candidates = cfg.get_size("raa.s");
  r.noise_weight = cfg.get_double("raa.m");
  r.noise_mean = cfg.get_double("raa.noise_mean");
  r.noise_std = cfg.get_double("raa.noise_std");
  r.sigma_rec = cfg.get_optional_double("raa.sigma_rec");
  r.track_iteration = cfg.get_bool("raa.track_iteration");
  r.seed = cfg.get_u64("raa.seed");
  r.reverse.mode = parse_reverse_mode(cfg.get_string("reverse.mode"));
  r.reverse.steps = cfg.get_size("reverse.steps");
  r.reverse.step_size = cfg.get_double("reverse.step_size");
  r.reverse.schedule = parse_schedule_kind(cfg.get_string("reverse.schedule"));
  r.reverse.sigma_schedule = cfg.get_double_list("reverse.sigma_schedule");
  r.reverse.stochastic = cfg.get_bool("reverse.stochastic");
  r.reverse.sigma_min = cfg.get_double("reverse.sigma_min");
  r.reverse.sigma_max = cfg.get_double("reverse.sigma_max");
  r.reverse.seed = r.seed;
  r.validate();
  return r;
}

namespace {

void log_config(const char* command, const RunConfig& cfg, Streams io) {
  io.err << "[" << command << "] resolved config: " << cfg.dump() << '\n';
}

void ensure_parent(const fs::path& file) {
  const auto parent = file.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

std::vector<Label> labels_of(const FeatureDataset& ds) {
  std::vector<Label> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = ds.label(i);
  return out;
}

/// Evaluates labelled entries only. Returns nullopt (after printing a notice)
/// when nothing is labelled.
std::optional<EvalReport> evaluate(std::span<const double> diffs, std::span<const Label> labels,
                                   const ThresholdConfig& thr, Streams io) {
  std::vector<Label> truth;
  std::vector<Label> predicted;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (labels.empty() || labels[i] == Label::Unlabeled) continue;
    truth.push_back(labels[i]);
    predicted.push_back(classify(diffs[i], thr));
  }
  if (truth.empty()) {
    io.err << "notice: no labelled samples; metrics skipped\n";
    return std::nullopt;
  }
  if (truth.size() < diffs.size()) {
    io.err << "notice: " << diffs.size() - truth.size() << " unlabelled samples excluded from metrics\n";
  }
  return confusion_metrics(truth, predicted);
}

void emit_report(const EvalReport& report, const std::optional<fs::path>& report_out, Streams io) {
  io.out << report_table(report, "RAA");
  if (report.degenerate) io.err << "notice: some metrics are undefined (zero denominator) and reported as 0\n";
  if (report_out) {
    ensure_parent(*report_out);
    std::ofstream f(*report_out, std::ios::trunc);
    if (!f) throw IoError("cannot write " + report_out->string());
    f << report_to_json(report);
    if (!f) throw IoError("write failed: " + report_out->string());
  }
}

}  // namespace

int run_guarded(const std::function<int()>& body, Streams io) {
  try {
    return body();
  } catch (const ConfigError& e) {
    io.err << "configuration error";
    if (!e.field().empty()) io.err << " [" << e.field() << "]";
    io.err << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const InputError& e) {
    io.err << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    io.err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    io.err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const FormatError& e) {
    io.err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const NumericalError& e) {
    io.err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}

int cmd_synth(const fs::path& out_dir, const GlobalOptions& global, Streams io) {
  return run_guarded(
      [&] {
        const auto cfg = resolve_config(synth_defaults(), global, {"synth.seed"});
        log_config("synth", cfg, io);
        const auto spec = synthetic_spec_from(cfg);
        const auto data = generate(spec);

        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

        std::vector<ManifestEntry> manifest;
        for (const FeatureDataset* ds : {&data.train, &data.val, &data.test}) {
          const std::string name = std::string(to_string(ds->split)) + ".rdaf";
          const auto bytes = write_features(*ds, out_dir / name);
          manifest.push_back({name, ds->split, ds->source, ds->size(), ds->dim()});
          io.out << "wrote " << (out_dir / name).string() << " (" << ds->size() << " vectors, " << bytes
                 << " bytes)\n";
        }
        write_manifest(manifest, out_dir / "manifest.json");
        io.out << "wrote " << (out_dir / "manifest.json").string() << '\n';
        return int{kOk};
      },
      io);
}

int cmd_train(const fs::path& features, const fs::path& out_model, const GlobalOptions& global, Streams io) {
  return run_guarded(
      [&] {
        const auto cfg = resolve_config(train_defaults(), global, {"train.seed"});
        log_config("train", cfg, io);
        const auto tc = train_config_from(cfg);
        const auto sampler = noise_sampler_from(cfg);

        auto dataset = read_features(features);
        if (dataset.split == Split::Unspecified) dataset.split = Split::Train;
        const auto params = train<float>(dataset, tc, sampler, [&](const EpochStats& s) {
          io.out << "epoch " << s.epoch << "/" << tc.epochs << " loss " << s.mean_loss << '\n';
        });
        ensure_parent(out_model);
        const auto bytes = save_checkpoint(params, out_model);
        io.out << "wrote " << out_model.string() << " (" << bytes << " bytes, sigma_data "
               << params.precond.sigma_data << ")\n";
        return int{kOk};
      },
      io);
}

int cmd_calibrate(const fs::path& model, const fs::path& features, const fs::path& out_threshold,
                  const std::optional<fs::path>& scores_out, const GlobalOptions& global, Streams io) {
  return run_guarded(
      [&] {
        const auto cfg = resolve_config(scoring_defaults(), global, {"raa.seed"});
        log_config("calibrate", cfg, io);
        const auto raa = raa_config_from(cfg);
        const auto population = cfg.get_string("calibrate.population");
        if (population != "id_only" && population != "full") {
          throw ConfigError("population must be \"id_only\" or \"full\"", "calibrate.population");
        }
        const bool population_std = cfg.get_bool("calibrate.population_std");
        const double coefficient = cfg.get_double("calibrate.coefficient");

        const auto params = load_checkpoint(model);
        const auto dataset = read_features(features);

        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
          if (population == "full" || dataset.label(i) != Label::Ood) rows.push_back(i);
        }
        if (population == "id_only" && !dataset.has_labels()) {
          io.err << "notice: calibration set is unlabelled; using every row as ID\n";
        }
        if (rows.empty()) throw InputError("no rows available for calibration");
        const auto subset = dataset.select(rows);

        const auto records = score_dataset(params, subset, raa, global.threads);
        const auto diffs = diffs_of(records);
        auto thr = calibrate_threshold(diffs, population_std, coefficient);
        thr.source_split = population;

        ensure_parent(out_threshold);
        write_threshold(thr, out_threshold);
        if (scores_out) {
          ensure_parent(*scores_out);
          const auto labels = labels_of(subset);
          write_score_dump(*scores_out, records, subset.has_labels() ? std::span<const Label>(labels)
                                                                      : std::span<const Label>{});
        }
        io.out << "calibrated on " << rows.size() << " rows: mu_diff " << thr.mu_diff << " sigma_diff "
               << thr.sigma_diff << " thre " << thr.thre << '\n';
        return int{kOk};
      },
      io);
}

int cmd_score(const fs::path& model, const fs::path& features, const fs::path& out_scores,
              const std::optional<fs::path>& threshold, const std::optional<fs::path>& report_out,
              const GlobalOptions& global, Streams io) {
  return run_guarded(
      [&] {
        const auto cfg = resolve_config(scoring_defaults(), global, {"raa.seed"});
        log_config("score", cfg, io);
        const auto raa = raa_config_from(cfg);

        const auto params = load_checkpoint(model);
        const auto dataset = read_features(features);
        std::optional<ThresholdConfig> thr;
        if (threshold) thr = read_threshold(*threshold);

        const auto records = score_dataset(params, dataset, raa, global.threads);
        const auto labels = labels_of(dataset);
        ensure_parent(out_scores);
        write_score_dump(out_scores, records,
                         dataset.has_labels() ? std::span<const Label>(labels) : std::span<const Label>{});
        io.out << "scored " << records.size() << " vectors -> " << out_scores.string() << '\n';

        if (thr) {
          const auto diffs = diffs_of(records);
          if (auto report = evaluate(diffs, labels, *thr, io)) emit_report(*report, report_out, io);
        }
        return int{kOk};
      },
      io);
}

int cmd_eval(const fs::path& scores, const fs::path& threshold, const std::optional<fs::path>& report_out,
             Streams io) {
  return run_guarded(
      [&] {
        const auto entries = read_score_dump(scores);
        const auto thr = read_threshold(threshold);
        std::vector<double> diffs;
        std::vector<Label> labels;
        for (const auto& e : entries) {
          diffs.push_back(e.record.diff);
          labels.push_back(e.label);
        }
        if (auto report = evaluate(diffs, labels, thr, io)) emit_report(*report, report_out, io);
        return int{kOk};
      },
      io);
}

}  // namespace rda::cli
