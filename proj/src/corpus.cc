#include "stance/corpus.h"

#include <array>
#include <cstring>

#include "json.hpp"
#include "stance/types.h"

namespace stance {

namespace {

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Byte positions where `needles` match, scanning left to right without
// overlap. Returns the end of each match.
class MultiMatcher {
 public:
  explicit MultiMatcher(const std::vector<std::string>& needles)
      : needles_(needles) {
    lead_.fill(false);
    for (const auto& n : needles_) {
      if (!n.empty()) lead_[static_cast<unsigned char>(n[0])] = true;
    }
  }

  // Length of the needle matching at `pos`, or 0.
  std::size_t MatchAt(std::string_view text, std::size_t pos) const {
    if (!lead_[static_cast<unsigned char>(text[pos])]) return 0;
    for (const auto& n : needles_) {
      if (!n.empty() && text.size() - pos >= n.size() &&
          std::memcmp(text.data() + pos, n.data(), n.size()) == 0) {
        return n.size();
      }
    }
    return 0;
  }

 private:
  const std::vector<std::string>& needles_;
  std::array<bool, 256> lead_;
};

std::vector<Span> SplitFragments(std::string_view sentence,
                                 std::string_view delimiter) {
  std::vector<Span> out;
  std::size_t start = 0;
  if (!delimiter.empty()) {
    std::size_t pos = sentence.find(delimiter);
    while (pos != std::string_view::npos) {
      out.push_back({start, pos});
      start = pos + delimiter.size();
      pos = sentence.find(delimiter, start);
    }
  }
  out.push_back({start, sentence.size()});
  return out;
}

}  // namespace

std::string NormalizeWhitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (IsAsciiSpace(c)) continue;
    // U+3000 is E3 80 80.
    if (static_cast<unsigned char>(c) == 0xE3 && i + 2 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x80) {
      i += 2;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<Sentence> Segment(const Document& doc,
                              const SegmenterOptions& options) {
  const std::string normalized = NormalizeWhitespace(doc.text);
  const std::string_view text(normalized);
  std::vector<Sentence> out;
  MultiMatcher terminators(options.terminators);

  auto emit = [&](std::size_t start, std::size_t end) {
    Sentence s;
    s.doc_id = doc.doc_id;
    s.index = out.size();
    s.text = std::string(text.substr(start, end - start));
    s.char_span = {start, end};
    s.fragments = SplitFragments(s.text, options.fragment_delimiter);
    out.push_back(std::move(s));
  };

  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t len = terminators.MatchAt(text, pos);
    if (len > 0) {
      pos += len;
      emit(start, pos);
      start = pos;
    } else {
      ++pos;
    }
  }
  if (start < text.size()) emit(start, text.size());
  return out;
}

std::optional<CorpusFormat> ParseCorpusFormat(std::string_view name) {
  if (name == "plain") return CorpusFormat::kPlain;
  if (name == "jsonl") return CorpusFormat::kJsonl;
  return std::nullopt;
}

std::string_view CorpusFormatName(CorpusFormat format) {
  return format == CorpusFormat::kPlain ? "plain" : "jsonl";
}

DocumentReader::DocumentReader(const std::filesystem::path& path,
                               CorpusFormat format)
    : in_(path, std::ios::binary),
      format_(format),
      source_tag_(path.filename().string()) {
  if (!in_) {
    throw Error("io", "cannot open corpus file: " + path.string());
  }
}

bool DocumentReader::Next(Document* doc) {
  while (std::getline(in_, line_)) {
    ++lineno_;
    counters_.bytes_read += line_.size() + 1;
    if (format_ == CorpusFormat::kPlain) {
      std::string text = NormalizeWhitespace(line_);
      if (text.empty()) {
        if (!line_.empty()) ++counters_.empty_skipped;
        continue;
      }
      doc->doc_id = source_tag_ + ":" + std::to_string(lineno_);
      doc->text = std::move(text);
      doc->source_tag = source_tag_;
      ++counters_.docs_read;
      return true;
    }

    if (NormalizeWhitespace(line_).empty()) continue;
    auto obj = nlohmann::json::parse(line_, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      ++counters_.malformed_lines;
      continue;
    }
    auto id = obj.find("id");
    auto text = obj.find("text");
    if (id == obj.end() || text == obj.end() || !id->is_string() ||
        !text->is_string()) {
      ++counters_.malformed_lines;
      continue;
    }
    std::string normalized = NormalizeWhitespace(text->get_ref<const std::string&>());
    if (normalized.empty()) {
      ++counters_.empty_skipped;
      continue;
    }
    doc->doc_id = id->get<std::string>();
    doc->text = std::move(normalized);
    doc->source_tag = source_tag_;
    ++counters_.docs_read;
    return true;
  }
  return false;
}

}  // namespace stance
