#include "stance/filters.h"

#include "stance/utf8.h"

namespace stance {

std::vector<std::string> FilterConfig::Validate() const {
  std::vector<std::string> errors;
  if (max_chars == 0) errors.push_back("filters.max_chars: must be > 0");
  if (pronouns.empty()) errors.push_back("filters.pronouns: must be non-empty");
  for (const auto& p : pronouns) {
    if (p.empty()) {
      errors.push_back("filters.pronouns: entries must be non-empty");
      break;
    }
  }
  if (topic_indicators.empty())
    errors.push_back("filters.topic_indicators: must be non-empty");
  for (const auto& t : topic_indicators) {
    if (t.empty()) {
      errors.push_back("filters.topic_indicators: entries must be non-empty");
      break;
    }
  }
  return errors;
}

std::string_view FilterVerdictName(FilterVerdict verdict) {
  switch (verdict) {
    case FilterVerdict::kPass:
      return "pass";
    case FilterVerdict::kNonChinese:
      return "non_chinese";
    case FilterVerdict::kTooLong:
      return "too_long";
    case FilterVerdict::kPronoun:
      return "pronoun";
  }
  return "";
}

bool IsAllowedChar(char32_t cp, const FilterConfig& cfg) {
  if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
      (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x20000 && cp <= 0x2FA1F)) {
    return true;
  }
  std::string_view punct(cfg.allowed_punctuation);
  std::size_t pos = 0;
  while (pos < punct.size()) {
    if (utf8::Next(punct, &pos) == cp) return true;
  }
  return false;
}

FilterVerdict PassesFilters(std::string_view text, const FilterConfig& cfg) {
  std::size_t chars = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!IsAllowedChar(utf8::Next(text, &pos), cfg))
      return FilterVerdict::kNonChinese;
    ++chars;
  }
  if (chars > cfg.max_chars) return FilterVerdict::kTooLong;
  for (const auto& p : cfg.pronouns) {
    if (!p.empty() && text.find(p) != std::string_view::npos)
      return FilterVerdict::kPronoun;
  }
  return FilterVerdict::kPass;
}

bool IsTopicCandidate(std::string_view text, const FilterConfig& cfg) {
  for (const auto& t : cfg.topic_indicators) {
    if (!t.empty() && text.find(t) != std::string_view::npos) return true;
  }
  return false;
}

}  // namespace stance
