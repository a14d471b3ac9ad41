#ifndef STANCE_FILTERS_H_
#define STANCE_FILTERS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stance {

// Surface constraints on extracted text.
//
// A character is allowed when it is a CJK ideograph (blocks 3400-4DBF,
// 4E00-9FFF, F900-FAFF, 20000-2FA1F) or one of `allowed_punctuation`.
// Pronouns and topic indicators match as raw substrings because the text is
// not word-segmented.
struct FilterConfig {
  std::size_t max_chars = 100;
  std::vector<std::string> pronouns = {"我",   "你",   "他",   "她",
                                       "它",   "我们", "你们", "他们",
                                       "她们", "它们", "这",   "那",
                                       "这些", "那些", "此",   "其"};
  std::string allowed_punctuation =
      "。，！？；：、“”‘’（）《》…—·";
  // 应 and 最 are the core indicators; the rest are local additions.
  std::vector<std::string> topic_indicators = {"应",   "最",   "应该",
                                               "必须", "不应", "更"};

  // Empty when valid; otherwise one message per violated field.
  std::vector<std::string> Validate() const;
};

enum class FilterVerdict { kPass, kNonChinese, kTooLong, kPronoun };
std::string_view FilterVerdictName(FilterVerdict verdict);

bool IsAllowedChar(char32_t cp, const FilterConfig& cfg);

// Reason priority is fixed: non_chinese, then too_long, then pronoun.
FilterVerdict PassesFilters(std::string_view text, const FilterConfig& cfg);

bool IsTopicCandidate(std::string_view text, const FilterConfig& cfg);

}  // namespace stance

#endif  // STANCE_FILTERS_H_
