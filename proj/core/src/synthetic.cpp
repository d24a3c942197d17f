#include "rda/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rda/errors.hpp"
#include "rda/rng.hpp"

namespace rda {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Stream ids per block; the mixture centres use their own stream so every
// split sees the same components.
enum Stream : std::uint64_t {
  kCentres = 0,
  kTrainId = 1,
  kValId = 2,
  kTestId = 3,
  kValOod = 4,
  kTestOod = 5,
  kValShuffle = 6,
  kTestShuffle = 7,
};

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec) : spec_(spec) {
    if (const auto* mix = std::get_if<GaussianMixture>(&spec.id_kind)) {
      Rng rng = make_stream(spec.seed, kCentres);
      centres_.resize(mix->components * spec.dim);
      for (auto& c : centres_) c = mix->spread * standard_normal(rng);
    }
  }

  /// Appends `count` rows with the given label to `out`.
  void draw(std::size_t count, bool ood, Rng& rng, std::vector<float>& out, std::vector<Label>& labels) const {
    const std::size_t dim = spec_.dim;
    std::vector<double> centre(dim, 0.0);
    std::vector<double> dev(dim);
    for (std::size_t n = 0; n < count; ++n) {
      double scale = 1.0;
      std::visit(overloaded{[&](const IsotropicGaussian& g) {
                              std::fill(centre.begin(), centre.end(), 0.0);
                              scale = g.scale;
                            },
                            [&](const GaussianMixture& m) {
                              std::uniform_int_distribution<std::size_t> pick(0, m.components - 1);
                              const std::size_t k = pick(rng);
                              std::copy_n(centres_.begin() + static_cast<std::ptrdiff_t>(k * dim), dim,
                                          centre.begin());
                              scale = m.scale;
                            }},
                 spec_.id_kind);
      for (auto& d : dev) d = scale * standard_normal(rng);

      if (ood) {
        std::visit(overloaded{[&](const MeanShift& s) {
                                for (auto& c : centre) c += s.delta;
                              },
                              [&](const ScaleShift& s) {
                                for (auto& d : dev) d *= s.gamma;
                              },
                              [&](const SubspaceOffset& s) { centre[s.axis] += s.delta; }},
                   spec_.ood_kind);
      }
      for (std::size_t j = 0; j < dim; ++j) out.push_back(static_cast<float>(centre[j] + dev[j]));
      labels.push_back(ood ? Label::Ood : Label::Id);
    }
  }

 private:
  const SyntheticSpec& spec_;
  std::vector<double> centres_;
};

FeatureDataset build_split(const Generator& gen, const SyntheticSpec& spec, Split split, std::size_t n_id,
                           std::size_t n_ood, std::uint64_t id_stream, std::uint64_t ood_stream,
                           std::uint64_t shuffle_stream) {
  std::vector<float> values;
  std::vector<Label> labels;
  values.reserve((n_id + n_ood) * spec.dim);
  Rng id_rng = make_stream(spec.seed, id_stream);
  gen.draw(n_id, false, id_rng, values, labels);
  if (n_ood > 0) {
    Rng ood_rng = make_stream(spec.seed, ood_stream);
    gen.draw(n_ood, true, ood_rng, values, labels);
  }
  FeatureDataset ordered(spec.dim, std::move(values), std::move(labels));

  std::vector<std::size_t> order(ordered.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (split != Split::Train) {
    Rng shuffle_rng = make_stream(spec.seed, shuffle_stream);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
  }
  auto out = ordered.select(order);
  out.split = split;
  out.source = "synthetic:" + std::string(to_string(split));
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (dim == 0) throw ConfigError("dim must be at least 1", "synth.dim");
  if (ood.train != 0) throw ConfigError("the train split must be ID-only", "synth.n_train_ood");
  std::visit(overloaded{[](const IsotropicGaussian& g) {
                          if (!(g.scale > 0.0) || !std::isfinite(g.scale)) {
                            throw ConfigError("scale must be positive", "synth.id_scale");
                          }
                        },
                        [](const GaussianMixture& m) {
                          if (m.components == 0) throw ConfigError("need at least one component", "synth.components");
                          if (!(m.spread >= 0.0) || !std::isfinite(m.spread)) {
                            throw ConfigError("spread must be non-negative", "synth.spread");
                          }
                          if (!(m.scale > 0.0) || !std::isfinite(m.scale)) {
                            throw ConfigError("scale must be positive", "synth.id_scale");
                          }
                        }},
             id_kind);
  std::visit(overloaded{[](const MeanShift& s) {
                          if (!(s.delta >= 0.0) || !std::isfinite(s.delta)) {
                            throw ConfigError("delta must be non-negative", "synth.delta");
                          }
                        },
                        [](const ScaleShift& s) {
                          if (!(s.gamma > 0.0) || !std::isfinite(s.gamma)) {
                            throw ConfigError("gamma must be positive", "synth.gamma");
                          }
                        },
                        [this](const SubspaceOffset& s) {
                          if (s.axis >= dim) throw ConfigError("axis must be below dim", "synth.axis");
                          if (!(s.delta >= 0.0) || !std::isfinite(s.delta)) {
                            throw ConfigError("delta must be non-negative", "synth.delta");
                          }
                        }},
             ood_kind);
}

SyntheticDataset generate(const SyntheticSpec& spec) {
  spec.validate();
  const Generator gen(spec);
  SyntheticDataset out;
  out.train = build_split(gen, spec, Split::Train, spec.id.train, 0, kTrainId, kValOod, kValShuffle);
  out.val = build_split(gen, spec, Split::Val, spec.id.val, spec.ood.val, kValId, kValOod, kValShuffle);
  out.test = build_split(gen, spec, Split::Test, spec.id.test, spec.ood.test, kTestId, kTestOod, kTestShuffle);
  return out;
}

}  // namespace rda
