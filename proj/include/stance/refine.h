#ifndef STANCE_REFINE_H_
#define STANCE_REFINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "stance/filters.h"
#include "stance/rng.h"
#include "stance/silverset.h"

namespace stance {

enum class NliLabel { kEntailment, kContradiction, kNoEntailment };

std::string_view NliLabelName(NliLabel label);

// Accepts the canonical tokens Entailment / Contradiction / NoEntailment and
// the common three-way outputs entailment / contradiction / neutral (any
// case), with neutral mapped to NoEntailment.
std::optional<NliLabel> ParseNliLabel(std::string_view token);

struct NliPredictions {
  std::unordered_map<std::string, NliLabel> labels;
  std::uint64_t duplicate_ids = 0;
};

// JSONL with fields {id, nli_label}. Duplicate ids keep the last value.
// Throws stance::Error("format") naming the line for unknown labels or
// malformed lines.
NliPredictions LoadNliPredictions(const std::filesystem::path& path);
NliPredictions ParseNliPredictions(std::istream& in, std::string_view name);

// True for (Support, Entailment), (Against, Contradiction) and
// (Neutral, NoEntailment).
bool LabelsAgree(Label stance, NliLabel nli);

struct RefineStats {
  std::uint64_t input = 0;
  std::uint64_t missing_prediction = 0;
  std::uint64_t no_indicator = 0;
  std::uint64_t disagree = 0;
  std::uint64_t kept = 0;
  std::uint64_t emitted = 0;
};

// Keeps D1 examples whose topic carries a topic indicator and whose label
// agrees with the NLI prediction, then draws min(n, kept) of them uniformly
// without replacement. Output is tagged D2. Throws stance::Error("refine")
// when nothing survives.
SilverDataset BuildD2(const SilverDataset& d1, const NliPredictions& nli,
                      const FilterConfig& cfg, std::uint64_t n, Rng& rng,
                      const std::string& config_digest,
                      RefineStats* stats = nullptr);

}  // namespace stance

#endif  // STANCE_REFINE_H_
