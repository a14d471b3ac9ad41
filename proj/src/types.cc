#include "stance/types.h"

namespace stance {

std::string_view LabelName(Label label) {
  switch (label) {
    case Label::kSupport:
      return "Support";
    case Label::kAgainst:
      return "Against";
    case Label::kNeutral:
      return "Neutral";
  }
  return "";
}

std::optional<Label> ParseLabel(std::string_view name) {
  for (Label l : kAllLabels) {
    if (LabelName(l) == name) return l;
  }
  return std::nullopt;
}

std::string_view DatasetTagName(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::kD1:
      return "D1";
    case DatasetTag::kD2:
      return "D2";
    case DatasetTag::kGold:
      return "gold";
    case DatasetTag::kBacktrans:
      return "backtrans";
    case DatasetTag::kDx:
      return "Dx";
  }
  return "";
}

std::optional<DatasetTag> ParseDatasetTag(std::string_view name) {
  for (DatasetTag t : {DatasetTag::kD1, DatasetTag::kD2, DatasetTag::kGold,
                       DatasetTag::kBacktrans, DatasetTag::kDx}) {
    if (DatasetTagName(t) == name) return t;
  }
  return std::nullopt;
}

}  // namespace stance
