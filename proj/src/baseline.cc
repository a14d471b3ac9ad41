#include "stance/baseline.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "stance/hash.h"
#include "stance/utf8.h"

namespace stance {

namespace {

using nlohmann::ordered_json;

constexpr int kModelVersion = 1;
constexpr std::string_view kTopicPrefix = "T·";
constexpr std::string_view kClaimPrefix = "C·";

template <typename Fn>
void ForEachNgram(std::string_view text, std::string_view prefix,
                  NgramRange range, Fn&& fn) {
  const auto chars = utf8::Chars(text);
  std::string key;
  for (std::uint32_t n = range.min_n; n <= range.max_n; ++n) {
    if (n == 0 || chars.size() < n) continue;
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
      key.assign(prefix);
      // Characters are contiguous in the source, so one substring suffices.
      const char* begin = chars[i].data();
      const char* end = chars[i + n - 1].data() + chars[i + n - 1].size();
      key.append(begin, end);
      fn(key);
    }
  }
}

}  // namespace

std::map<std::string, std::uint32_t> NgramCounts(const std::string& topic,
                                                 const std::string& claim,
                                                 NgramRange range) {
  std::map<std::string, std::uint32_t> out;
  auto add = [&](const std::string& key) { ++out[key]; };
  ForEachNgram(topic, kTopicPrefix, range, add);
  ForEachNgram(claim, kClaimPrefix, range, add);
  return out;
}

FeatureVector Featurize(const SilverExample& example, NgramRange range,
                        std::uint32_t buckets) {
  std::vector<std::uint32_t> ids;
  auto add = [&](const std::string& key) {
    ids.push_back(static_cast<std::uint32_t>(Fnv1a64(key) % buckets));
  };
  ForEachNgram(example.topic, kTopicPrefix, range, add);
  ForEachNgram(example.claim, kClaimPrefix, range, add);
  std::sort(ids.begin(), ids.end());
  FeatureVector fv;
  for (std::uint32_t id : ids) {
    if (!fv.entries.empty() && fv.entries.back().first == id) {
      ++fv.entries.back().second;
    } else {
      fv.entries.emplace_back(id, 1);
    }
  }
  return fv;
}

BaselineModel::BaselineModel(std::uint32_t buckets, NgramRange ngrams)
    : buckets_(buckets),
      ngrams_(ngrams),
      weights_(static_cast<std::size_t>(buckets) * kNumLabels, 0.0) {}

std::array<double, kNumLabels> BaselineModel::Scores(
    const FeatureVector& fv) const {
  std::array<double, kNumLabels> s = bias_;
  for (const auto& [id, count] : fv.entries) {
    for (std::size_t c = 0; c < kNumLabels; ++c) s[c] += count * weight(id, c);
  }
  return s;
}

ProbabilityVector Softmax(const std::array<double, kNumLabels>& scores) {
  const double m = *std::max_element(scores.begin(), scores.end());
  ProbabilityVector p;
  double z = 0.0;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    p[c] = std::exp(scores[c] - m);
    z += p[c];
  }
  for (double& v : p) v /= z;
  return p;
}

ProbabilityVector BaselineModel::PredictProba(const FeatureVector& fv) const {
  return Softmax(Scores(fv));
}

ProbabilityVector BaselineModel::PredictProba(const SilverExample& ex) const {
  return PredictProba(Featurize(ex, ngrams_, buckets_));
}

Label BaselineModel::Predict(const SilverExample& ex) const {
  const auto p = PredictProba(ex);
  return kAllLabels[static_cast<std::size_t>(
      std::max_element(p.begin(), p.end()) - p.begin())];
}

double ExampleLoss(const BaselineModel& model, const FeatureVector& fv,
                   Label label, double l2) {
  const auto scores = model.Scores(fv);
  const double m = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - m);
  double loss = -(scores[LabelIndex(label)] - m - std::log(z));
  double norm = 0.0;
  for (const auto& [id, count] : fv.entries) {
    for (std::size_t c = 0; c < kNumLabels; ++c) {
      const double w = model.weight(id, c);
      norm += w * w;
    }
  }
  return loss + 0.5 * l2 * norm;
}

SparseGradient ExampleGradient(const BaselineModel& model,
                               const FeatureVector& fv, Label label,
                               double l2) {
  ProbabilityVector g = model.PredictProba(fv);
  g[LabelIndex(label)] -= 1.0;
  SparseGradient out;
  out.bias = g;
  out.weights.reserve(fv.entries.size());
  for (const auto& [id, count] : fv.entries) {
    std::array<double, kNumLabels> gw;
    for (std::size_t c = 0; c < kNumLabels; ++c)
      gw[c] = count * g[c] + l2 * model.weight(id, c);
    out.weights.emplace_back(id, gw);
  }
  return out;
}

BaselineModel Train(const SilverDataset& ds, const TrainParams& params,
                    Rng& rng, NgramRange ngrams, std::uint32_t buckets) {
  std::size_t classes = 0;
  for (std::uint64_t c : ds.counts()) classes += c > 0 ? 1 : 0;
  if (classes < 2)
    throw Error("train", "training data must contain at least two classes");

  BaselineModel model(buckets, ngrams);
  model.seed = rng.seed();
  model.params = params;
  model.config_digest = ds.config_digest();

  std::vector<FeatureVector> features;
  features.reserve(ds.size());
  for (const auto& ex : ds.examples())
    features.push_back(Featurize(ex, ngrams, buckets));

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::uint32_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.Shuffle(order);
    for (std::size_t i : order) {
      const SparseGradient g =
          ExampleGradient(model, features[i], ds.examples()[i].label, params.l2);
      for (const auto& [id, gw] : g.weights) {
        for (std::size_t c = 0; c < kNumLabels; ++c)
          model.weight(id, c) -= params.learning_rate * gw[c];
      }
      for (std::size_t c = 0; c < kNumLabels; ++c)
        model.bias()[c] -= params.learning_rate * g.bias[c];
    }
  }
  return model;
}

ordered_json Metrics::ToJson() const {
  ordered_json j;
  j["total"] = total;
  j["accuracy"] = accuracy;
  for (Label l : kAllLabels) {
    const std::size_t c = LabelIndex(l);
    j["per_class"][std::string(LabelName(l))] = {{"precision", precision[c]},
                                                 {"recall", recall[c]}};
  }
  j["confusion"] = confusion;
  j["confusion_axes"] = "rows=gold, columns=predicted, order Support/Against/Neutral";
  return j;
}

Metrics ComputeMetrics(const std::vector<Label>& gold,
                       const std::vector<Label>& predicted) {
  if (gold.empty()) throw Error("eval", "cannot evaluate an empty dataset");
  if (gold.size() != predicted.size())
    throw Error("eval", "gold and predicted sizes differ");
  Metrics m;
  m.total = gold.size();
  std::uint64_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++m.confusion[LabelIndex(gold[i])][LabelIndex(predicted[i])];
    if (gold[i] == predicted[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    std::uint64_t col = 0;
    std::uint64_t row = 0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      col += m.confusion[k][c];
      row += m.confusion[c][k];
    }
    const double tp = static_cast<double>(m.confusion[c][c]);
    m.precision[c] = col ? tp / static_cast<double>(col) : 0.0;
    m.recall[c] = row ? tp / static_cast<double>(row) : 0.0;
  }
  return m;
}

Metrics Evaluate(const BaselineModel& model, const SilverDataset& ds) {
  std::vector<Label> gold;
  std::vector<Label> pred;
  gold.reserve(ds.size());
  pred.reserve(ds.size());
  for (const auto& ex : ds.examples()) {
    gold.push_back(ex.label);
    pred.push_back(model.Predict(ex));
  }
  return ComputeMetrics(gold, pred);
}

void SaveModel(const BaselineModel& model, const std::filesystem::path& path) {
  ordered_json j;
  j["format"] = "stance-baseline";
  j["version"] = kModelVersion;
  j["buckets"] = model.buckets();
  j["ngram_min"] = model.ngrams().min_n;
  j["ngram_max"] = model.ngrams().max_n;
  j["config_digest"] = model.config_digest;
  j["seed"] = model.seed;
  j["params"] = {{"epochs", model.params.epochs},
                 {"learning_rate", model.params.learning_rate},
                 {"l2", model.params.l2}};
  j["bias"] = model.bias();
  ordered_json rows = ordered_json::array();
  for (std::uint32_t b = 0; b < model.buckets(); ++b) {
    const double w0 = model.weight(b, 0);
    const double w1 = model.weight(b, 1);
    const double w2 = model.weight(b, 2);
    if (w0 == 0.0 && w1 == 0.0 && w2 == 0.0) continue;
    rows.push_back({b, w0, w1, w2});
  }
  j["weights"] = std::move(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write model: " + path.string());
  out << j.dump() << '\n';
}

BaselineModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open model: " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() ||
      j.value("format", "") != "stance-baseline") {
    throw Error("format", "not a baseline model file: " + path.string());
  }
  if (j.value("version", 0) != kModelVersion)
    throw Error("format", "unsupported model version in " + path.string());
  try {
    NgramRange ngrams{j.at("ngram_min").get<std::uint32_t>(),
                      j.at("ngram_max").get<std::uint32_t>()};
    BaselineModel model(j.at("buckets").get<std::uint32_t>(), ngrams);
    model.config_digest = j.at("config_digest").get<std::string>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.params.epochs = j.at("params").at("epochs").get<std::uint32_t>();
    model.params.learning_rate = j.at("params").at("learning_rate").get<double>();
    model.params.l2 = j.at("params").at("l2").get<double>();
    model.bias() = j.at("bias").get<std::array<double, kNumLabels>>();
    for (const auto& row : j.at("weights")) {
      const auto b = row.at(0).get<std::uint32_t>();
      if (b >= model.buckets()) throw Error("format", "bucket out of range");
      for (std::size_t c = 0; c < kNumLabels; ++c)
        model.weight(b, c) = row.at(c + 1).get<double>();
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", std::string("malformed model file: ") + e.what());
  }
}

}  // namespace stance
