#include "stance/silverset.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "stance/hash.h"
#include "stance/utf8.h"

namespace stance {

namespace {

using nlohmann::ordered_json;

constexpr std::size_t kBatchDocs = 4096;

SilverExample FromCandidate(const CandidatePair& c, DatasetTag tag) {
  SilverExample ex;
  ex.example_id = ExampleId(c.relation, c.topic, c.claim);
  ex.topic = c.topic;
  ex.claim = c.claim;
  ex.label = c.relation;
  ex.provenance = c.provenance;
  ex.tag = tag;
  return ex;
}

bool HasCueConnective(std::string_view text,
                      std::span<const ConnectivePattern> patterns) {
  for (const auto& p : patterns) {
    for (const std::string* c : {&p.head, &p.tail}) {
      if (utf8::Length(*c) >= 2 && text.find(*c) != std::string_view::npos)
        return true;
    }
  }
  return false;
}

}  // namespace

std::string ExampleId(Label label, std::string_view topic,
                      std::string_view claim) {
  return ToHex16(
      FieldHasher().Add(LabelName(label)).Add(topic).Add(claim).value());
}

SilverDataset SilverDataset::Build(std::vector<SilverExample> examples,
                                   std::string config_digest,
                                   std::uint64_t seed) {
  SilverDataset ds;
  ds.config_digest_ = std::move(config_digest);
  ds.seed_ = seed;
  std::unordered_set<std::string> seen;
  seen.reserve(examples.size());
  ds.examples_.reserve(examples.size());
  for (auto& ex : examples) {
    if (!seen.insert(ex.example_id).second) {
      ++ds.duplicates_dropped_;
      continue;
    }
    ds.examples_.push_back(std::move(ex));
  }
  std::sort(ds.examples_.begin(), ds.examples_.end(),
            [](const SilverExample& a, const SilverExample& b) {
              return a.example_id < b.example_id;
            });
  for (const auto& ex : ds.examples_) ++ds.counts_[LabelIndex(ex.label)];
  return ds;
}

std::optional<CandidatePair> SampleNeutral(
    std::span<const Sentence> sentences, std::size_t topic_index,
    std::string_view topic_text, std::span<const std::size_t> excluded,
    std::size_t window, const FilterConfig& filters,
    std::span<const ConnectivePattern> patterns, Rng& rng) {
  if (topic_index >= sentences.size()) return std::nullopt;
  const std::size_t lo = topic_index >= window ? topic_index - window : 0;
  const std::size_t hi = std::min(sentences.size() - 1, topic_index + window);

  std::vector<std::size_t> eligible;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (i == topic_index) continue;
    if (std::find(excluded.begin(), excluded.end(), i) != excluded.end())
      continue;
    const std::string_view text = TrimPunctuation(sentences[i].text);
    if (text.empty() || text == topic_text) continue;
    if (PassesFilters(text, filters) != FilterVerdict::kPass) continue;
    if (HasCueConnective(text, patterns)) continue;
    eligible.push_back(i);
  }
  if (eligible.empty()) return std::nullopt;

  const std::size_t pick =
      eligible[static_cast<std::size_t>(rng.Uniform(eligible.size()))];
  CandidatePair c;
  c.topic = std::string(topic_text);
  c.claim = std::string(TrimPunctuation(sentences[pick].text));
  c.relation = Label::kNeutral;
  c.provenance = {sentences[topic_index].doc_id, "neutral",
                  {topic_index, pick}};
  c.topic_sentence = topic_index;
  c.claim_sentence = pick;
  return c;
}

void ExtractStats::Merge(const ExtractStats& o) {
  docs += o.docs;
  sentences += o.sentences;
  matches += o.matches;
  for (const auto& [k, v] : o.matches_by_pattern) matches_by_pattern[k] += v;
  for (const auto& [k, v] : o.rejections) rejections[k] += v;
  identical_pairs += o.identical_pairs;
  labeled_kept += o.labeled_kept;
  neutral_drawn += o.neutral_drawn;
  neutral_unavailable += o.neutral_unavailable;
  duplicates += o.duplicates;
  empty_warnings += o.empty_warnings;
}

ordered_json ExtractStats::ToJson() const {
  ordered_json j;
  j["docs"] = docs;
  j["sentences"] = sentences;
  j["matches"] = matches;
  j["matches_by_pattern"] = ordered_json::object();
  for (const auto& [k, v] : matches_by_pattern) j["matches_by_pattern"][k] = v;
  j["rejections"] = ordered_json::object();
  for (const auto& [k, v] : rejections) j["rejections"][k] = v;
  j["identical_pairs"] = identical_pairs;
  j["labeled_kept"] = labeled_kept;
  j["neutral_drawn"] = neutral_drawn;
  j["neutral_unavailable"] = neutral_unavailable;
  j["duplicates"] = duplicates;
  j["empty_warnings"] = empty_warnings;
  return j;
}

std::vector<SilverExample> ExtractDocument(const Document& doc,
                                           std::uint64_t ordinal,
                                           const ExtractConfig& cfg,
                                           std::uint64_t seed,
                                           ExtractStats* stats) {
  const std::vector<Sentence> sentences = Segment(doc, cfg.segmenter);
  ++stats->docs;
  stats->sentences += sentences.size();

  Rng rng = Rng(seed).Derive(ordinal);
  std::vector<SilverExample> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const Sentence* prev = i > 0 ? &sentences[i - 1] : nullptr;
    auto match = MatchPair(prev, sentences[i], cfg.patterns, cfg.matcher);
    if (!match) continue;
    ++stats->matches;
    ++stats->matches_by_pattern[match->pattern_id];

    const CandidatePair c = ToCandidate(*match, cfg.patterns);
    const FilterVerdict tv = PassesFilters(c.topic, cfg.filters);
    if (tv != FilterVerdict::kPass) {
      ++stats->rejections["topic." + std::string(FilterVerdictName(tv))];
      continue;
    }
    const FilterVerdict cv = PassesFilters(c.claim, cfg.filters);
    if (cv != FilterVerdict::kPass) {
      ++stats->rejections["claim." + std::string(FilterVerdictName(cv))];
      continue;
    }
    if (c.topic == c.claim) {
      ++stats->identical_pairs;
      continue;
    }
    out.push_back(FromCandidate(c, DatasetTag::kD1));
    ++stats->labeled_kept;

    std::vector<std::size_t> excluded = {c.claim_sentence};
    for (std::size_t k = 0; k < cfg.neutral.per_pair; ++k) {
      auto neutral = SampleNeutral(sentences, c.topic_sentence, c.topic,
                                   excluded, cfg.neutral.window, cfg.filters,
                                   cfg.patterns, rng);
      if (!neutral) {
        ++stats->neutral_unavailable;
        break;
      }
      excluded.push_back(neutral->claim_sentence);
      out.push_back(FromCandidate(*neutral, DatasetTag::kD1));
      ++stats->neutral_drawn;
    }
  }
  return out;
}

SilverDataset BuildD1(const DocumentSource& source, const ExtractConfig& cfg,
                      std::uint64_t seed, int threads,
                      const std::string& config_digest, ExtractStats* stats) {
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  std::vector<SilverExample> all;
  std::vector<Document> batch;
  std::uint64_t ordinal = 0;
  bool more = true;

  while (more) {
    batch.clear();
    Document doc;
    while (batch.size() < kBatchDocs && (more = source(&doc))) {
      batch.push_back(std::move(doc));
      doc = Document();
    }
    if (batch.empty()) break;

    std::vector<std::vector<SilverExample>> results(batch.size());
    std::vector<ExtractStats> worker_stats(workers);
    std::atomic<std::size_t> next{0};
    auto work = [&](std::size_t w) {
      for (std::size_t i = next++; i < batch.size(); i = next++) {
        results[i] =
            ExtractDocument(batch[i], ordinal + i, cfg, seed, &worker_stats[w]);
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (const auto& ws : worker_stats) stats->Merge(ws);
    for (auto& r : results) {
      for (auto& ex : r) all.push_back(std::move(ex));
    }
    ordinal += batch.size();
  }

  SilverDataset ds = SilverDataset::Build(std::move(all), config_digest, seed);
  stats->duplicates += ds.duplicates_dropped();
  if (ds.empty()) ++stats->empty_warnings;
  return ds;
}

SilverDataset Balance(const SilverDataset& ds, Rng& rng,
                      std::optional<std::uint64_t> target_per_class) {
  if (ds.empty()) throw Error("balance", "cannot balance an empty dataset");
  const LabelCounts& counts = ds.counts();

  std::uint64_t target = 0;
  if (target_per_class) {
    target = *target_per_class;
    if (std::all_of(counts.begin(), counts.end(),
                    [&](std::uint64_t c) { return target > c; })) {
      throw Error("balance", "target_per_class " + std::to_string(target) +
                                 " exceeds every class count");
    }
  } else {
    target = ~std::uint64_t{0};
    for (std::uint64_t c : counts) {
      if (c > 0) target = std::min(target, c);
    }
  }

  std::vector<bool> keep(ds.size(), true);
  for (Label label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.examples()[i].label == label) members.push_back(i);
    }
    if (members.size() <= target) continue;
    for (std::size_t m : members) keep[m] = false;
    for (std::size_t pick : rng.SampleIndices(members.size(), target))
      keep[members[pick]] = true;
  }

  std::vector<SilverExample> kept;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (keep[i]) kept.push_back(ds.examples()[i]);
  }
  return SilverDataset::Build(std::move(kept), ds.config_digest(), ds.seed());
}

ordered_json ExampleToJson(const SilverExample& ex) {
  ordered_json j;
  j["id"] = ex.example_id;
  j["topic"] = ex.topic;
  j["claim"] = ex.claim;
  j["label"] = LabelName(ex.label);
  j["tag"] = DatasetTagName(ex.tag);
  j["doc_id"] = ex.provenance.doc_id;
  j["pattern_id"] = ex.provenance.pattern_id;
  return j;
}

void WriteDatasetJsonl(const SilverDataset& ds, std::ostream& out) {
  for (const auto& ex : ds.examples()) {
    out << ExampleToJson(ex).dump(-1, ' ', false,
                                  nlohmann::json::error_handler_t::replace)
        << '\n';
  }
}

void WriteDatasetJsonl(const SilverDataset& ds,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  WriteDatasetJsonl(ds, out);
}

SilverDataset ReadDatasetJsonl(const std::filesystem::path& path,
                               DatasetTag default_tag,
                               std::string config_digest,
                               std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open dataset: " + path.string());
  std::vector<SilverExample> examples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (NormalizeWhitespace(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw Error("format", where + ": not a JSON object");
    try {
      SilverExample ex;
      ex.topic = j.at("topic").get<std::string>();
      ex.claim = j.at("claim").get<std::string>();
      const auto label = ParseLabel(j.at("label").get<std::string>());
      if (!label) throw Error("format", where + ": unknown label");
      ex.label = *label;
      ex.tag = default_tag;
      if (j.contains("tag")) {
        const auto tag = ParseDatasetTag(j.at("tag").get<std::string>());
        if (!tag) throw Error("format", where + ": unknown tag");
        ex.tag = *tag;
      }
      ex.example_id = j.contains("id") ? j.at("id").get<std::string>()
                                       : ExampleId(ex.label, ex.topic, ex.claim);
      if (j.contains("doc_id")) ex.provenance.doc_id = j["doc_id"].get<std::string>();
      if (j.contains("pattern_id"))
        ex.provenance.pattern_id = j["pattern_id"].get<std::string>();
      examples.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw Error("format", where + ": " + e.what());
    }
  }
  return SilverDataset::Build(std::move(examples), std::move(config_digest),
                              seed);
}

std::string DatasetDigest(const SilverDataset& ds) {
  std::ostringstream out;
  WriteDatasetJsonl(ds, out);
  return ToHex16(Fnv1a64(out.str()));
}

ordered_json CountsToJson(const LabelCounts& counts) {
  ordered_json j;
  for (Label l : kAllLabels) j[std::string(LabelName(l))] = counts[LabelIndex(l)];
  return j;
}

}  // namespace stance
