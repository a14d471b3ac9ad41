#ifndef STANCE_PATTERNS_H_
#define STANCE_PATTERNS_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stance/corpus.h"
#include "stance/types.h"

namespace stance {

enum class Arity { kMultiline, kSingleline };
enum class Role { kTopic, kClaim };

std::string_view ArityName(Arity arity);
std::string_view RoleName(Role role);

// A discourse-connective extraction rule.
//
// Multiline rules fire on two adjacent sentences where the second opens with
// `head`. Singleline rules fire on one sentence whose first fragment carries
// `head` and a later fragment opens with `tail`. `first_is` says which of the
// two extracted segments (in text order) becomes the topic.
struct ConnectivePattern {
  std::string pattern_id;
  Label relation = Label::kSupport;  // kSupport or kAgainst
  Arity arity = Arity::kMultiline;
  std::string head;
  std::string tail;  // empty for multiline
  Role first_is = Role::kClaim;
};

// The default connective inventory. Support rules put the consequence
// clause in the topic role; Against rules put the concessive clause (or the
// preceding sentence) in the topic role.
std::vector<ConnectivePattern> DefaultPatterns();

// Empty when valid.
std::vector<std::string> ValidatePatterns(
    std::span<const ConnectivePattern> patterns);

// JSON list of {pattern_id, relation, arity, head, tail, first_is}.
std::vector<ConnectivePattern> ParsePatterns(const nlohmann::json& doc);
std::vector<ConnectivePattern> LoadPatterns(const std::filesystem::path& path);
nlohmann::ordered_json PatternsToJson(std::span<const ConnectivePattern> patterns);

// A connective removed from `PatternMatch::source_text`.
struct Deletion {
  std::size_t offset = 0;  // byte offset in source_text
  std::string text;
  bool operator==(const Deletion&) const = default;
};

struct PatternMatch {
  std::string pattern_id;
  std::string doc_id;
  std::vector<std::size_t> sentence_indices;
  std::string first_segment;
  std::string second_segment;
  Label relation = Label::kSupport;
  // Concatenated window text and the connectives removed from it, in
  // ascending offset order.
  std::string source_text;
  std::vector<Deletion> deletions;
};

struct MatcherOptions {
  // Maximum number of characters allowed before the head connective of a
  // singleline rule inside the first fragment.
  std::size_t max_head_offset_chars = 10;
  std::string fragment_delimiter = "，";
};

// Characters stripped from both ends of every extracted segment.
inline constexpr std::string_view kTrimPunctuation = "。！？；，、：";
std::string_view TrimPunctuation(std::string_view text);

// Tries multiline rules first (only when `previous` is given), then
// singleline rules, each in inventory order; the first rule that yields two
// non-empty, connective-free segments wins.
std::optional<PatternMatch> MatchPair(
    const Sentence* previous, const Sentence& current,
    std::span<const ConnectivePattern> patterns,
    const MatcherOptions& options = {});

std::string RemoveDeletions(std::string_view source,
                            const std::vector<Deletion>& deletions);
std::string ReinsertDeletions(std::string_view residual,
                              const std::vector<Deletion>& deletions);

struct Provenance {
  std::string doc_id;
  std::string pattern_id;  // "neutral" for sampled pairs
  std::vector<std::size_t> sentence_indices;
};

struct CandidatePair {
  std::string topic;
  std::string claim;
  Label relation = Label::kSupport;
  Provenance provenance;
  std::size_t topic_sentence = 0;
  std::size_t claim_sentence = 0;
};

// Applies the role map of the matched pattern. Throws stance::Error when the
// pattern id is not in `patterns`.
CandidatePair ToCandidate(const PatternMatch& match,
                          std::span<const ConnectivePattern> patterns);

}  // namespace stance

#endif  // STANCE_PATTERNS_H_
