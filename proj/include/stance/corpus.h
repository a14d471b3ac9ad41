#ifndef STANCE_CORPUS_H_
#define STANCE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stance {

struct Document {
  std::string doc_id;
  std::string text;
  std::string source_tag;
};

// Half-open byte range.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - start; }
  bool operator==(const Span&) const = default;
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  // Byte offsets into the whitespace-normalized document text.
  Span char_span;
  // Byte offsets into `text`. Fragments are separated by exactly one
  // fragment delimiter, which belongs to neither neighbour; the last
  // fragment keeps the sentence terminator.
  std::vector<Span> fragments;

  std::string_view fragment(std::size_t i) const {
    return std::string_view(text).substr(fragments[i].start,
                                         fragments[i].size());
  }
};

struct SegmenterOptions {
  std::vector<std::string> terminators = {"。", "！", "？", "；"};
  std::string fragment_delimiter = "，";
};

// Removes ASCII whitespace and U+3000 IDEOGRAPHIC SPACE.
std::string NormalizeWhitespace(std::string_view text);

// Splits after every terminator; a trailing unterminated tail becomes the
// final sentence. Spans refer to NormalizeWhitespace(doc.text).
std::vector<Sentence> Segment(const Document& doc,
                              const SegmenterOptions& options = {});

enum class CorpusFormat { kPlain, kJsonl };
std::optional<CorpusFormat> ParseCorpusFormat(std::string_view name);
std::string_view CorpusFormatName(CorpusFormat format);

struct IngestCounters {
  std::uint64_t docs_read = 0;
  std::uint64_t malformed_lines = 0;
  std::uint64_t empty_skipped = 0;
  std::uint64_t bytes_read = 0;
};

// Streams documents from one file, one line at a time.
//
// plain: each non-empty line is a document with id "<filename>:<lineno>".
// jsonl: each line is an object with string fields "id" and "text"; lines
//        that fail to parse or lack either field are skipped and counted in
//        malformed_lines.
// Lines that are empty after whitespace normalization are skipped.
class DocumentReader {
 public:
  // Throws stance::Error("io") when the file cannot be opened.
  DocumentReader(const std::filesystem::path& path, CorpusFormat format);

  // Returns false at end of file.
  bool Next(Document* doc);

  const IngestCounters& counters() const { return counters_; }

 private:
  std::ifstream in_;
  CorpusFormat format_;
  std::string source_tag_;
  std::string line_;
  std::uint64_t lineno_ = 0;
  IngestCounters counters_;
};

}  // namespace stance

#endif  // STANCE_CORPUS_H_
