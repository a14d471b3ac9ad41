#include "stance/patterns.h"

#include <fstream>
#include <set>

#include "stance/utf8.h"

namespace stance {

namespace {

using nlohmann::json;

ConnectivePattern Multi(std::string id, Label rel, std::string head,
                        Role first_is) {
  return {std::move(id), rel, Arity::kMultiline, std::move(head), "", first_is};
}

ConnectivePattern Single(std::string id, Label rel, std::string head,
                         std::string tail, Role first_is) {
  return {std::move(id),   rel,           Arity::kSingleline,
          std::move(head), std::move(tail), first_is};
}

// Length of the trim character at the start of `text`, or 0.
std::size_t TrimCharAt(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return 0;
  std::size_t next = pos;
  utf8::Next(text, &next);
  const std::string_view ch = text.substr(pos, next - pos);
  if (ch.size() != 3) return 0;
  return kTrimPunctuation.find(ch) != std::string_view::npos ? ch.size() : 0;
}

bool Contains(std::string_view text, std::string_view needle) {
  return !needle.empty() && text.find(needle) != std::string_view::npos;
}

bool SegmentsClean(const std::string& a, const std::string& b,
                   const ConnectivePattern& p) {
  if (a.empty() || b.empty()) return false;
  for (const std::string* c : {&p.head, &p.tail}) {
    if (Contains(a, *c) || Contains(b, *c)) return false;
  }
  return true;
}

std::optional<PatternMatch> MatchMultiline(const Sentence& previous,
                                           const Sentence& current,
                                           const ConnectivePattern& p) {
  const std::string_view cur(current.text);
  std::size_t lead = 0;
  while (std::size_t n = TrimCharAt(cur, lead)) lead += n;
  if (!utf8::StartsWith(cur.substr(lead), p.head)) return std::nullopt;

  PatternMatch m;
  m.first_segment = std::string(TrimPunctuation(previous.text));
  m.second_segment =
      std::string(TrimPunctuation(cur.substr(lead + p.head.size())));
  if (!SegmentsClean(m.first_segment, m.second_segment, p)) return std::nullopt;
  m.pattern_id = p.pattern_id;
  m.doc_id = current.doc_id;
  m.sentence_indices = {previous.index, current.index};
  m.relation = p.relation;
  m.source_text = previous.text + current.text;
  m.deletions = {{previous.text.size() + lead, p.head}};
  return m;
}

std::optional<PatternMatch> MatchSingleline(const Sentence& s,
                                            const ConnectivePattern& p,
                                            const MatcherOptions& options) {
  if (s.fragments.size() < 2) return std::nullopt;
  const std::string_view first = s.fragment(0);
  const std::size_t head_pos = first.find(p.head);
  if (head_pos == std::string_view::npos) return std::nullopt;
  if (utf8::Length(first.substr(0, head_pos)) > options.max_head_offset_chars)
    return std::nullopt;

  std::size_t k = 1;
  while (k < s.fragments.size() && !utf8::StartsWith(s.fragment(k), p.tail))
    ++k;
  if (k == s.fragments.size()) return std::nullopt;

  const std::string_view text(s.text);
  const std::size_t head_at = s.fragments[0].start + head_pos;
  const std::size_t tail_at = s.fragments[k].start;
  // Everything before the delimiter that opens fragment k.
  const std::size_t first_end =
      s.fragments[k].start - options.fragment_delimiter.size();

  std::string first_raw(text.substr(0, head_at));
  first_raw += text.substr(head_at + p.head.size(),
                           first_end - head_at - p.head.size());
  const std::string_view second_raw = text.substr(tail_at + p.tail.size());

  PatternMatch m;
  m.first_segment = std::string(TrimPunctuation(first_raw));
  m.second_segment = std::string(TrimPunctuation(second_raw));
  if (!SegmentsClean(m.first_segment, m.second_segment, p)) return std::nullopt;
  m.pattern_id = p.pattern_id;
  m.doc_id = s.doc_id;
  m.sentence_indices = {s.index};
  m.relation = p.relation;
  m.source_text = s.text;
  m.deletions = {{head_at, p.head}, {tail_at, p.tail}};
  return m;
}

}  // namespace

std::string_view ArityName(Arity arity) {
  return arity == Arity::kMultiline ? "multiline" : "singleline";
}

std::string_view RoleName(Role role) {
  return role == Role::kTopic ? "topic" : "claim";
}

std::vector<ConnectivePattern> DefaultPatterns() {
  const Label S = Label::kSupport;
  const Label A = Label::kAgainst;
  return {
      Multi("support_multi_yinci", S, "因此", Role::kClaim),
      Multi("support_multi_yiner", S, "因而", Role::kClaim),
      Multi("support_multi_suoyi", S, "所以", Role::kClaim),
      Single("support_single_yinwei_suoyi", S, "因为", "所以", Role::kClaim),
      Single("support_single_zhiyao_jiu", S, "只要", "就", Role::kClaim),
      Single("support_single_yaoshi_jiu", S, "要是", "就", Role::kClaim),
      // The 之所以 clause is the consequence, so it comes first as topic.
      Single("support_single_zhisuoyi_shiyinwei", S, "之所以", "是因为",
             Role::kTopic),
      Multi("against_multi_danshi", A, "但是", Role::kTopic),
      Multi("against_multi_raner", A, "然而", Role::kTopic),
      Multi("against_multi_keshi", A, "可是", Role::kTopic),
      Single("against_single_suiran_danshi", A, "虽然", "但是", Role::kTopic),
      Single("against_single_suiran_keshi", A, "虽然", "可是", Role::kTopic),
      Single("against_single_jinguan_danshi", A, "尽管", "但是", Role::kTopic),
  };
}

namespace {

bool IsIdeographic(std::string_view text) {
  for (char32_t c : utf8::Decode(text)) {
    const bool cjk = (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x4E00 && c <= 0x9FFF) ||
                     (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x20000 && c <= 0x2FA1F);
    if (!cjk) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> ValidatePatterns(
    std::span<const ConnectivePattern> patterns) {
  std::vector<std::string> errors;
  std::set<std::string> ids;
  for (const auto& p : patterns) {
    const std::string where = "patterns[" + p.pattern_id + "]";
    if (p.pattern_id.empty()) errors.push_back("patterns: empty pattern_id");
    if (!ids.insert(p.pattern_id).second)
      errors.push_back(where + ": duplicate pattern_id");
    if (p.relation == Label::kNeutral)
      errors.push_back(where + ": relation must be Support or Against");
    if (p.head.empty()) errors.push_back(where + ": empty head connective");
    if (!IsIdeographic(p.head) || !IsIdeographic(p.tail))
      errors.push_back(where + ": connectives must be Chinese characters");
    if (p.arity == Arity::kSingleline && p.tail.empty())
      errors.push_back(where + ": singleline pattern needs a tail connective");
    if (p.arity == Arity::kMultiline && !p.tail.empty())
      errors.push_back(where + ": multiline pattern must not have a tail");
  }
  return errors;
}

std::vector<ConnectivePattern> ParsePatterns(const json& doc) {
  if (!doc.is_array()) throw Error("config", "pattern file must be a JSON list");
  std::vector<ConnectivePattern> out;
  for (const auto& item : doc) {
    ConnectivePattern p;
    try {
      p.pattern_id = item.at("pattern_id").get<std::string>();
      const auto rel = ParseLabel(item.at("relation").get<std::string>());
      if (!rel) throw Error("config", "bad relation in " + p.pattern_id);
      p.relation = *rel;
      const auto arity = item.at("arity").get<std::string>();
      if (arity == "multiline") {
        p.arity = Arity::kMultiline;
      } else if (arity == "singleline") {
        p.arity = Arity::kSingleline;
      } else {
        throw Error("config", "bad arity in " + p.pattern_id);
      }
      p.head = item.at("head").get<std::string>();
      if (item.contains("tail") && !item.at("tail").is_null())
        p.tail = item.at("tail").get<std::string>();
      const auto first_is = item.at("first_is").get<std::string>();
      if (first_is == "topic") {
        p.first_is = Role::kTopic;
      } else if (first_is == "claim") {
        p.first_is = Role::kClaim;
      } else {
        throw Error("config", "bad first_is in " + p.pattern_id);
      }
    } catch (const json::exception& e) {
      throw Error("config", std::string("malformed pattern entry: ") + e.what());
    }
    out.push_back(std::move(p));
  }
  const auto errors = ValidatePatterns(out);
  if (!errors.empty()) throw Error("config", errors.front());
  return out;
}

std::vector<ConnectivePattern> LoadPatterns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open pattern file: " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded())
    throw Error("config", "pattern file is not valid JSON: " + path.string());
  return ParsePatterns(doc);
}

nlohmann::ordered_json PatternsToJson(
    std::span<const ConnectivePattern> patterns) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& p : patterns) {
    nlohmann::ordered_json item;
    item["pattern_id"] = p.pattern_id;
    item["relation"] = LabelName(p.relation);
    item["arity"] = ArityName(p.arity);
    item["head"] = p.head;
    if (p.tail.empty()) {
      item["tail"] = nullptr;
    } else {
      item["tail"] = p.tail;
    }
    item["first_is"] = RoleName(p.first_is);
    out.push_back(std::move(item));
  }
  return out;
}

std::string_view TrimPunctuation(std::string_view text) {
  std::size_t begin = 0;
  while (std::size_t n = TrimCharAt(text, begin)) begin += n;
  std::size_t end = text.size();
  while (end > begin) {
    // All trim characters are three-byte sequences.
    if (end - begin < 3) break;
    if (TrimCharAt(text, end - 3) == 3) {
      end -= 3;
    } else {
      break;
    }
  }
  return text.substr(begin, end - begin);
}

std::optional<PatternMatch> MatchPair(
    const Sentence* previous, const Sentence& current,
    std::span<const ConnectivePattern> patterns,
    const MatcherOptions& options) {
  if (previous != nullptr) {
    for (const auto& p : patterns) {
      if (p.arity != Arity::kMultiline) continue;
      if (auto m = MatchMultiline(*previous, current, p)) return m;
    }
  }
  for (const auto& p : patterns) {
    if (p.arity != Arity::kSingleline) continue;
    if (auto m = MatchSingleline(current, p, options)) return m;
  }
  return std::nullopt;
}

std::string RemoveDeletions(std::string_view source,
                            const std::vector<Deletion>& deletions) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& d : deletions) {
    out += source.substr(pos, d.offset - pos);
    pos = d.offset + d.text.size();
  }
  out += source.substr(pos);
  return out;
}

std::string ReinsertDeletions(std::string_view residual,
                              const std::vector<Deletion>& deletions) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& d : deletions) {
    // d.offset is in source coordinates; out.size() tracks them.
    const std::size_t take = d.offset - out.size();
    out += residual.substr(pos, take);
    pos += take;
    out += d.text;
  }
  out += residual.substr(pos);
  return out;
}

CandidatePair ToCandidate(const PatternMatch& match,
                          std::span<const ConnectivePattern> patterns) {
  const ConnectivePattern* pattern = nullptr;
  for (const auto& p : patterns) {
    if (p.pattern_id == match.pattern_id) {
      pattern = &p;
      break;
    }
  }
  if (pattern == nullptr)
    throw Error("internal", "unknown pattern id: " + match.pattern_id);

  const std::size_t first_sentence = match.sentence_indices.front();
  const std::size_t second_sentence = match.sentence_indices.back();
  CandidatePair c;
  c.relation = match.relation;
  c.provenance = {match.doc_id, match.pattern_id, match.sentence_indices};
  if (pattern->first_is == Role::kTopic) {
    c.topic = match.first_segment;
    c.claim = match.second_segment;
    c.topic_sentence = first_sentence;
    c.claim_sentence = second_sentence;
  } else {
    c.topic = match.second_segment;
    c.claim = match.first_segment;
    c.topic_sentence = second_sentence;
    c.claim_sentence = first_sentence;
  }
  return c;
}

}  // namespace stance
