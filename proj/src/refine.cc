#include "stance/refine.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "json.hpp"

namespace stance {

std::string_view NliLabelName(NliLabel label) {
  switch (label) {
    case NliLabel::kEntailment:
      return "Entailment";
    case NliLabel::kContradiction:
      return "Contradiction";
    case NliLabel::kNoEntailment:
      return "NoEntailment";
  }
  return "";
}

std::optional<NliLabel> ParseNliLabel(std::string_view token) {
  if (token == "Entailment") return NliLabel::kEntailment;
  if (token == "Contradiction") return NliLabel::kContradiction;
  if (token == "NoEntailment") return NliLabel::kNoEntailment;
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "entailment") return NliLabel::kEntailment;
  if (lower == "contradiction") return NliLabel::kContradiction;
  if (lower == "neutral") return NliLabel::kNoEntailment;
  return std::nullopt;
}

NliPredictions ParseNliPredictions(std::istream& in, std::string_view name) {
  NliPredictions out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where =
        std::string(name) + ": line " + std::to_string(lineno);
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
        !j.contains("nli_label") || !j["id"].is_string() ||
        !j["nli_label"].is_string()) {
      throw Error("format", where + ": expected {\"id\", \"nli_label\"}");
    }
    const std::string token = j["nli_label"].get<std::string>();
    const auto label = ParseNliLabel(token);
    if (!label) {
      throw Error("format", where + ": unknown nli_label '" + token + "'");
    }
    auto [it, inserted] = out.labels.insert_or_assign(j["id"].get<std::string>(), *label);
    (void)it;
    if (!inserted) ++out.duplicate_ids;
  }
  return out;
}

NliPredictions LoadNliPredictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open NLI predictions: " + path.string());
  return ParseNliPredictions(in, path.string());
}

bool LabelsAgree(Label stance, NliLabel nli) {
  switch (stance) {
    case Label::kSupport:
      return nli == NliLabel::kEntailment;
    case Label::kAgainst:
      return nli == NliLabel::kContradiction;
    case Label::kNeutral:
      return nli == NliLabel::kNoEntailment;
  }
  return false;
}

SilverDataset BuildD2(const SilverDataset& d1, const NliPredictions& nli,
                      const FilterConfig& cfg, std::uint64_t n, Rng& rng,
                      const std::string& config_digest, RefineStats* stats) {
  if (n == 0) throw Error("refine", "sample size n must be >= 1");
  RefineStats local;
  RefineStats& st = stats ? *stats : local;
  st = RefineStats{};

  std::vector<const SilverExample*> kept;
  for (const auto& ex : d1.examples()) {
    ++st.input;
    auto it = nli.labels.find(ex.example_id);
    if (it == nli.labels.end()) {
      ++st.missing_prediction;
      continue;
    }
    if (!IsTopicCandidate(ex.topic, cfg)) {
      ++st.no_indicator;
      continue;
    }
    if (!LabelsAgree(ex.label, it->second)) {
      ++st.disagree;
      continue;
    }
    kept.push_back(&ex);
  }
  st.kept = kept.size();
  if (kept.empty()) {
    throw Error("refine",
                "refinement produced nothing: no example passed the topic "
                "indicator and NLI agreement checks");
  }

  std::vector<SilverExample> out;
  for (std::size_t i : rng.SampleIndices(kept.size(), n)) {
    SilverExample ex = *kept[i];
    ex.tag = DatasetTag::kD2;
    out.push_back(std::move(ex));
  }
  st.emitted = out.size();
  return SilverDataset::Build(std::move(out), config_digest, rng.seed());
}

}  // namespace stance
