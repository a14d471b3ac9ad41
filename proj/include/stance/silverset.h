#ifndef STANCE_SILVERSET_H_
#define STANCE_SILVERSET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stance/corpus.h"
#include "stance/filters.h"
#include "stance/patterns.h"
#include "stance/rng.h"
#include "stance/types.h"

namespace stance {

struct SilverExample {
  std::string example_id;
  std::string topic;
  std::string claim;
  Label label = Label::kNeutral;
  Provenance provenance;
  DatasetTag tag = DatasetTag::kD1;
};

// Hex FNV-1a of (label, topic, claim). Identical pairs collapse regardless of
// which document produced them.
std::string ExampleId(Label label, std::string_view topic,
                      std::string_view claim);

using LabelCounts = std::array<std::uint64_t, kNumLabels>;

// Immutable after construction; examples are unique by id and sorted by id.
class SilverDataset {
 public:
  SilverDataset() = default;

  // Drops later duplicates of an id (the first occurrence in `examples` wins)
  // and sorts by id.
  static SilverDataset Build(std::vector<SilverExample> examples,
                             std::string config_digest, std::uint64_t seed);

  const std::vector<SilverExample>& examples() const { return examples_; }
  const LabelCounts& counts() const { return counts_; }
  const std::string& config_digest() const { return config_digest_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  std::uint64_t duplicates_dropped() const { return duplicates_dropped_; }

 private:
  std::vector<SilverExample> examples_;
  LabelCounts counts_{};
  std::string config_digest_;
  std::uint64_t seed_ = 0;
  std::uint64_t duplicates_dropped_ = 0;
};

struct NeutralConfig {
  std::size_t per_pair = 1;
  std::size_t window = 3;
};

// Draws one Neutral partner for `topic_text` from the sentences within
// `window` of `topic_index`. Candidates exclude the topic sentence, every
// index in `excluded`, sentences whose trimmed text fails the filters, and
// sentences carrying a multi-character connective of `patterns`. Returns
// nullopt (without advancing `rng`) when nothing is eligible.
std::optional<CandidatePair> SampleNeutral(
    std::span<const Sentence> sentences, std::size_t topic_index,
    std::string_view topic_text, std::span<const std::size_t> excluded,
    std::size_t window, const FilterConfig& filters,
    std::span<const ConnectivePattern> patterns, Rng& rng);

struct ExtractConfig {
  SegmenterOptions segmenter;
  MatcherOptions matcher;
  FilterConfig filters;
  NeutralConfig neutral;
  std::vector<ConnectivePattern> patterns = DefaultPatterns();
};

struct ExtractStats {
  std::uint64_t docs = 0;
  std::uint64_t sentences = 0;
  std::uint64_t matches = 0;
  std::map<std::string, std::uint64_t> matches_by_pattern;
  std::map<std::string, std::uint64_t> rejections;  // keyed by verdict name
  std::uint64_t identical_pairs = 0;
  std::uint64_t labeled_kept = 0;
  std::uint64_t neutral_drawn = 0;
  std::uint64_t neutral_unavailable = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t empty_warnings = 0;

  void Merge(const ExtractStats& other);
  nlohmann::ordered_json ToJson() const;
};

// All examples extracted from one document, in sentence order. `ordinal` is
// the document's position in the input stream and keys its Neutral draws, so
// results do not depend on which worker runs it.
std::vector<SilverExample> ExtractDocument(const Document& doc,
                                           std::uint64_t ordinal,
                                           const ExtractConfig& cfg,
                                           std::uint64_t seed,
                                           ExtractStats* stats);

using DocumentSource = std::function<bool(Document*)>;

// Runs extraction over a document stream with `threads` workers. Output is
// identical for every thread count.
SilverDataset BuildD1(const DocumentSource& source, const ExtractConfig& cfg,
                      std::uint64_t seed, int threads,
                      const std::string& config_digest, ExtractStats* stats);

// Down-samples every class to min(target, class count) without replacement,
// where target defaults to the smallest non-empty class. Relative order is
// preserved and classes already at the target are untouched.
SilverDataset Balance(const SilverDataset& ds, Rng& rng,
                      std::optional<std::uint64_t> target_per_class);

// JSONL with fields {id, topic, claim, label, tag, doc_id, pattern_id}.
nlohmann::ordered_json ExampleToJson(const SilverExample& ex);
void WriteDatasetJsonl(const SilverDataset& ds, std::ostream& out);
void WriteDatasetJsonl(const SilverDataset& ds,
                       const std::filesystem::path& path);

// Reads a dataset file. Missing ids are computed with ExampleId, a missing
// tag defaults to `default_tag`. Throws stance::Error("format") naming the
// line on malformed input.
SilverDataset ReadDatasetJsonl(const std::filesystem::path& path,
                               DatasetTag default_tag,
                               std::string config_digest = "",
                               std::uint64_t seed = 0);

// FNV-1a over the canonical JSONL serialization.
std::string DatasetDigest(const SilverDataset& ds);

nlohmann::ordered_json CountsToJson(const LabelCounts& counts);

}  // namespace stance

#endif  // STANCE_SILVERSET_H_
