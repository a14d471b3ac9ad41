#ifndef STANCE_TYPES_H_
#define STANCE_TYPES_H_

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stance {

// Class order is fixed: it is the column order of every probability vector
// and the tie-break order of every argmax.
enum class Label { kSupport = 0, kAgainst = 1, kNeutral = 2 };
inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::kSupport, Label::kAgainst, Label::kNeutral};

std::string_view LabelName(Label label);
std::optional<Label> ParseLabel(std::string_view name);
inline std::size_t LabelIndex(Label l) { return static_cast<std::size_t>(l); }

enum class DatasetTag { kD1, kD2, kGold, kBacktrans, kDx };
std::string_view DatasetTagName(DatasetTag tag);
std::optional<DatasetTag> ParseDatasetTag(std::string_view name);

// Base exception for every recoverable failure in the toolchain. `kind` is a
// short machine-readable slug surfaced in CLI error objects.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

}  // namespace stance

#endif  // STANCE_TYPES_H_
