#ifndef STANCE_BASELINE_H_
#define STANCE_BASELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stance/rng.h"
#include "stance/silverset.h"

namespace stance {

// Character n-gram logistic regression used as a desk-scale stand-in for a
// pretrained encoder.
//
// Feature scheme: every n-gram (n in [min_n, max_n]) of the topic is keyed
// as "T·<ngram>" and of the claim as "C·<ngram>", so the two sides never
// share a feature. A key's bucket is Fnv1a64(utf8 key) mod buckets.
struct NgramRange {
  std::uint32_t min_n = 1;
  std::uint32_t max_n = 3;
};

inline constexpr std::uint32_t kDefaultBuckets = 1u << 20;

struct FeatureVector {
  // Sorted by bucket, unique, counts >= 1.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
};

std::map<std::string, std::uint32_t> NgramCounts(const std::string& topic,
                                                 const std::string& claim,
                                                 NgramRange range);

FeatureVector Featurize(const SilverExample& example, NgramRange range,
                        std::uint32_t buckets = kDefaultBuckets);

struct TrainParams {
  std::uint32_t epochs = 5;
  double learning_rate = 0.1;
  double l2 = 1e-6;
};

using ProbabilityVector = std::array<double, kNumLabels>;

class BaselineModel {
 public:
  BaselineModel(std::uint32_t buckets = kDefaultBuckets, NgramRange ngrams = {});

  std::uint32_t buckets() const { return buckets_; }
  NgramRange ngrams() const { return ngrams_; }

  double weight(std::uint32_t bucket, std::size_t cls) const {
    return weights_[bucket * kNumLabels + cls];
  }
  double& weight(std::uint32_t bucket, std::size_t cls) {
    return weights_[bucket * kNumLabels + cls];
  }
  std::array<double, kNumLabels>& bias() { return bias_; }
  const std::array<double, kNumLabels>& bias() const { return bias_; }

  std::array<double, kNumLabels> Scores(const FeatureVector& fv) const;
  ProbabilityVector PredictProba(const FeatureVector& fv) const;
  ProbabilityVector PredictProba(const SilverExample& ex) const;
  Label Predict(const SilverExample& ex) const;

  std::string config_digest;
  std::uint64_t seed = 0;
  TrainParams params;

 private:
  std::uint32_t buckets_;
  NgramRange ngrams_;
  std::vector<double> weights_;
  std::array<double, kNumLabels> bias_{};
};

ProbabilityVector Softmax(const std::array<double, kNumLabels>& scores);

// Per-example objective: cross-entropy plus (l2 / 2) times the squared norm
// of the weights on the example's active buckets.
double ExampleLoss(const BaselineModel& model, const FeatureVector& fv,
                   Label label, double l2);

struct SparseGradient {
  std::vector<std::pair<std::uint32_t, std::array<double, kNumLabels>>> weights;
  std::array<double, kNumLabels> bias{};
};

SparseGradient ExampleGradient(const BaselineModel& model,
                               const FeatureVector& fv, Label label, double l2);

// Plain SGD over a seeded shuffle per epoch. Throws stance::Error("train")
// when fewer than two classes are present.
BaselineModel Train(const SilverDataset& ds, const TrainParams& params,
                    Rng& rng, NgramRange ngrams = {},
                    std::uint32_t buckets = kDefaultBuckets);

struct Metrics {
  std::uint64_t total = 0;
  double accuracy = 0.0;
  std::array<double, kNumLabels> precision{};
  std::array<double, kNumLabels> recall{};
  // confusion[gold][predicted]
  std::array<std::array<std::uint64_t, kNumLabels>, kNumLabels> confusion{};

  nlohmann::ordered_json ToJson() const;
};

// Throws stance::Error("eval") on an empty dataset.
Metrics ComputeMetrics(const std::vector<Label>& gold,
                       const std::vector<Label>& predicted);
Metrics Evaluate(const BaselineModel& model, const SilverDataset& ds);

void SaveModel(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel LoadModel(const std::filesystem::path& path);

}  // namespace stance

#endif  // STANCE_BASELINE_H_
