#include "rda/raa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "binary_io.hpp"
#include "json.hpp"
#include "rda/errors.hpp"

namespace rda {

using nlohmann::json;

void RaaConfig::validate() const {
  if (iterations == 0) throw ConfigError("iterations (T) must be at least 1", "raa.T");
  if (candidates == 0) throw ConfigError("candidates (s) must be at least 1", "raa.s");
  if (!(noise_weight >= 0.0) || !std::isfinite(noise_weight)) {
    throw ConfigError("noise weight (m) must be non-negative", "raa.m");
  }
  if (!std::isfinite(noise_mean)) throw ConfigError("noise mean must be finite", "raa.noise_mean");
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    throw ConfigError("noise std must be positive", "raa.noise_std");
  }
  if (sigma_rec && (!(*sigma_rec > 0.0) || !std::isfinite(*sigma_rec))) {
    throw ConfigError("sigma_rec must be positive", "raa.sigma_rec");
  }
  reverse.validate();
}

double RaaConfig::resolved_sigma_rec() const {
  return sigma_rec.value_or(std::max(noise_weight * noise_std, reverse.sigma_min));
}

template <typename Real>
ScoreRecord raa_score(const DenoiserParams<Real>& params, std::span<const Real> v, const RaaConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t dim = params.feature_dim();
  if (v.size() != dim) {
    throw InputError("feature of length " + std::to_string(v.size()) + " scored by a denoiser of dimension " +
                     std::to_string(dim));
  }

  ScoreRecord rec;
  rec.iterations = cfg.iterations;
  rec.candidates = cfg.candidates;
  rec.errors.resize(cfg.iterations * cfg.candidates);
  rec.selected.resize(cfg.iterations);

  const double base_sigma = cfg.resolved_sigma_rec();
  const auto weight = static_cast<Real>(cfg.noise_weight);
  std::normal_distribution<double> noise(cfg.noise_mean, cfg.noise_std);

  std::vector<Real> anchor(v.begin(), v.end());
  std::vector<Real> best;
  std::vector<Real> candidate(dim);

  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const double sigma = cfg.track_iteration ? base_sigma * std::sqrt(static_cast<double>(t + 1)) : base_sigma;
    double best_error = -1.0;
    for (std::size_t i = 0; i < cfg.candidates; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        candidate[j] = anchor[j] + weight * static_cast<Real>(noise(rng));
      }
      const auto recon = reconstruct(params, std::span<const Real>(candidate), cfg.reverse, sigma, rng);
      double sq = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = static_cast<double>(recon[j]) - static_cast<double>(v[j]);
        sq += d * d;
      }
      const double e = std::sqrt(sq);
      if (!std::isfinite(e)) {
        throw NumericalError("non-finite reconstruction at iteration " + std::to_string(t + 1) + ", candidate " +
                             std::to_string(i + 1));
      }
      rec.errors[t * cfg.candidates + i] = e;
      if (e > best_error) {  // strict: ties keep the lowest index
        best_error = e;
        rec.selected[t] = i;
        best = candidate;
      }
    }
    anchor.swap(best);
  }

  const auto last = std::span<const double>(rec.errors).subspan((cfg.iterations - 1) * cfg.candidates);
  rec.diff = *std::max_element(last.begin(), last.end());
  return rec;
}

template <typename Real>
ScoreRecord raa_score(const DenoiserParams<Real>& params, std::span<const Real> v, const RaaConfig& cfg,
                      std::uint64_t sample_index) {
  Rng rng = make_stream(cfg.seed, sample_index);
  return raa_score(params, v, cfg, rng);
}

std::vector<ScoreRecord> score_dataset(const DenoiserParams<float>& params, const FeatureDataset& dataset,
                                       const RaaConfig& cfg, std::size_t threads) {
  cfg.validate();
  params.validate();
  const std::size_t n = dataset.size();
  if (n > 0 && dataset.dim() != params.feature_dim()) {
    throw InputError("dataset dimension " + std::to_string(dataset.dim()) + " does not match denoiser dimension " +
                     std::to_string(params.feature_dim()));
  }
  std::vector<ScoreRecord> out(n);
  if (n == 0) return out;

  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        out[i] = raa_score(params, dataset.row(i), cfg, static_cast<std::uint64_t>(i));
      } catch (const NumericalError& e) {
        throw NumericalError("sample " + std::to_string(i) + ": " + e.what());
      }
    }
  };

  threads = std::clamp<std::size_t>(threads, 1, n);
  if (threads == 1) {
    score_range(0, n);
    return out;
  }

  std::vector<std::exception_ptr> failures(threads);
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, w, begin, end] {
        try {
          score_range(begin, end);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

std::vector<double> diffs_of(std::span<const ScoreRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.diff);
  return out;
}

ThresholdConfig calibrate_threshold(std::span<const double> diffs, bool population_std, double coefficient) {
  if (diffs.empty()) throw InputError("cannot calibrate a threshold from an empty score set");
  if (!std::isfinite(coefficient)) throw ConfigError("threshold coefficient must be finite", "calibrate.coefficient");
  const double n = static_cast<double>(diffs.size());
  double sum = 0.0;
  for (double d : diffs) sum += d;
  const double mean = sum / n;
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double denom = population_std ? n : n - 1.0;
  const double sd = denom > 0.0 ? std::sqrt(ss / denom) : 0.0;

  ThresholdConfig thr;
  thr.mu_diff = mean;
  thr.sigma_diff = sd;
  thr.coefficient = coefficient;
  thr.thre = mean + coefficient * sd;
  thr.population_std = population_std;
  thr.count = diffs.size();
  return thr;
}

Label classify(double diff, const ThresholdConfig& threshold) {
  return diff > threshold.thre ? Label::Ood : Label::Id;
}

std::string threshold_to_json(const ThresholdConfig& t) {
  nlohmann::ordered_json doc = {{"thre", t.thre},
              {"mu_diff", t.mu_diff},
              {"sigma_diff", t.sigma_diff},
              {"coefficient", t.coefficient},
              {"source_split", t.source_split},
              {"population_std", t.population_std},
              {"count", t.count}};
  return doc.dump(2) + "\n";
}

ThresholdConfig threshold_from_json(const std::string& text) {
  try {
    const auto doc = json::parse(text);
    ThresholdConfig t;
    t.thre = doc.at("thre").get<double>();
    t.mu_diff = doc.at("mu_diff").get<double>();
    t.sigma_diff = doc.at("sigma_diff").get<double>();
    t.coefficient = doc.value("coefficient", kDefaultThresholdCoefficient);
    t.source_split = doc.value("source_split", std::string("val"));
    t.population_std = doc.value("population_std", true);
    t.count = doc.value("count", std::size_t{0});
    if (t.sigma_diff < 0.0) throw FormatError(FormatErrorKind::BadDocument, "sigma_diff is negative");
    return t;
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::BadDocument, std::string("threshold: ") + e.what());
  }
}

void write_threshold(const ThresholdConfig& threshold, const std::filesystem::path& destination) {
  detail::write_text_file(destination, threshold_to_json(threshold));
}

ThresholdConfig read_threshold(const std::filesystem::path& source) {
  return threshold_from_json(detail::read_text_file(source));
}

void write_score_dump(std::ostream& out, std::span<const ScoreRecord> records, std::span<const Label> labels) {
  if (!labels.empty() && labels.size() != records.size()) {
    throw InputError("score dump needs one label per record");
  }
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    nlohmann::ordered_json line;
    line["index"] = k;
    line["diff"] = r.diff;
    if (!labels.empty() && labels[k] != Label::Unlabeled) line["label"] = std::string(to_string(labels[k]));
    line["selected_indices"] = r.selected;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < r.iterations; ++t) {
      rows.push_back(std::vector<double>(r.errors.begin() + static_cast<std::ptrdiff_t>(t * r.candidates),
                                         r.errors.begin() + static_cast<std::ptrdiff_t>((t + 1) * r.candidates)));
    }
    line["errors"] = std::move(rows);
    out << line.dump() << '\n';
  }
}

void write_score_dump(const std::filesystem::path& destination, std::span<const ScoreRecord> records,
                      std::span<const Label> labels) {
  std::ostringstream buf;
  write_score_dump(buf, records, labels);
  detail::write_text_file(destination, buf.str());
}

std::vector<ScoreDumpEntry> read_score_dump(const std::filesystem::path& source) {
  std::istringstream in(detail::read_text_file(source));
  std::vector<ScoreDumpEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto doc = json::parse(line);
      ScoreDumpEntry e;
      e.index = doc.at("index").get<std::size_t>();
      e.record.diff = doc.at("diff").get<double>();
      e.record.selected = doc.at("selected_indices").get<std::vector<std::size_t>>();
      const auto rows = doc.at("errors").get<std::vector<std::vector<double>>>();
      e.record.iterations = rows.size();
      e.record.candidates = rows.empty() ? 0 : rows.front().size();
      for (const auto& row : rows) {
        if (row.size() != e.record.candidates) {
          throw FormatError(FormatErrorKind::BadDocument, "ragged error matrix");
        }
        e.record.errors.insert(e.record.errors.end(), row.begin(), row.end());
      }
      if (doc.contains("label")) {
        const auto text = doc.at("label").get<std::string>();
        if (text == "ID") {
          e.label = Label::Id;
        } else if (text == "OOD") {
          e.label = Label::Ood;
        } else {
          throw FormatError(FormatErrorKind::BadLabel, "label \"" + text + "\"");
        }
      }
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw FormatError(FormatErrorKind::BadDocument,
                        source.string() + " line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const FormatError& ex) {
      throw FormatError(ex.kind(), source.string() + " line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

template ScoreRecord raa_score(const DenoiserParams<float>&, std::span<const float>, const RaaConfig&, Rng&);
template ScoreRecord raa_score(const DenoiserParams<double>&, std::span<const double>, const RaaConfig&, Rng&);
template ScoreRecord raa_score(const DenoiserParams<float>&, std::span<const float>, const RaaConfig&,
                               std::uint64_t);
template ScoreRecord raa_score(const DenoiserParams<double>&, std::span<const double>, const RaaConfig&,
                               std::uint64_t);

}  // namespace rda
