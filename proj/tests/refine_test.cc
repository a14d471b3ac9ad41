#include "stance/refine.h"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

namespace stance {
namespace {

SilverExample Make(Label label, const std::string& topic, const std::string& claim) {
  SilverExample ex;
  ex.label = label;
  ex.topic = topic;
  ex.claim = claim;
  ex.example_id = ExampleId(label, topic, claim);
  return ex;
}

NliPredictions Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseNliPredictions(in, "nli.jsonl");
}

TEST(NliPredictions, SingleLine) {
  const auto p = Parse("{\"id\":\"e1\",\"nli_label\":\"Entailment\"}\n");
  ASSERT_EQ(p.labels.size(), 1u);
  EXPECT_EQ(p.labels.at("e1"), NliLabel::kEntailment);
}

TEST(NliPredictions, DuplicateKeepsLast) {
  const auto p = Parse(
      "{\"id\":\"e1\",\"nli_label\":\"Entailment\"}\n"
      "{\"id\":\"e1\",\"nli_label\":\"Contradiction\"}\n");
  EXPECT_EQ(p.labels.at("e1"), NliLabel::kContradiction);
  EXPECT_EQ(p.duplicate_ids, 1u);
}

TEST(NliPredictions, UnknownLabelNamesLine) {
  try {
    Parse("{\"id\":\"e1\",\"nli_label\":\"Entailment\"}\n"
          "{\"id\":\"e2\",\"nli_label\":\"Maybe\"}\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "format");
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Parse("not json\n"), Error);
}

TEST(NliPredictions, Adapters) {
  EXPECT_EQ(ParseNliLabel("NoEntailment"), NliLabel::kNoEntailment);
  EXPECT_EQ(ParseNliLabel("neutral"), NliLabel::kNoEntailment);
  EXPECT_EQ(ParseNliLabel("ENTAILMENT"), NliLabel::kEntailment);
  EXPECT_EQ(ParseNliLabel("contradiction"), NliLabel::kContradiction);
  EXPECT_FALSE(ParseNliLabel("Maybe"));
}

TEST(LabelsAgree, TruthTable) {
  int agree = 0;
  for (Label l : kAllLabels) {
    for (NliLabel n : {NliLabel::kEntailment, NliLabel::kContradiction, NliLabel::kNoEntailment}) {
      const bool expected = (l == Label::kSupport && n == NliLabel::kEntailment) ||
                            (l == Label::kAgainst && n == NliLabel::kContradiction) ||
                            (l == Label::kNeutral && n == NliLabel::kNoEntailment);
      EXPECT_EQ(LabelsAgree(l, n), expected);
      agree += expected;
    }
  }
  EXPECT_EQ(agree, 3);
}

TEST(BuildD2, KeepsAgreeingIndicatorTopics) {
  const NliLabel nli[] = {NliLabel::kEntailment, NliLabel::kContradiction,
                          NliLabel::kNoEntailment};
  std::vector<SilverExample> rows;
  NliPredictions preds;
  std::set<std::string> expected;
  for (Label l : kAllLabels) {
    for (int k = 0; k < 3; ++k) {
      for (bool indicator : {true, false}) {
        const std::string topic = std::string(indicator ? "政府应投入" : "政府投入") +
                                  std::to_string(LabelIndex(l)) + std::to_string(k);
        auto ex = Make(l, topic, "甲");
        preds.labels[ex.example_id] = nli[k];
        if (indicator && LabelsAgree(l, nli[k])) expected.insert(ex.example_id);
        rows.push_back(ex);
      }
    }
  }
  rows.push_back(Make(Label::kSupport, "最好无预测", "乙"));
  const auto d1 = SilverDataset::Build(rows, "d", 1);
  Rng rng(3);
  RefineStats stats;
  const auto d2 = BuildD2(d1, preds, FilterConfig{}, 30000, rng, "d2", &stats);
  std::set<std::string> got;
  for (const auto& ex : d2.examples()) {
    got.insert(ex.example_id);
    EXPECT_EQ(ex.tag, DatasetTag::kD2);
  }
  EXPECT_EQ(got, expected);
  EXPECT_EQ(stats.missing_prediction, 1u);
  EXPECT_EQ(stats.no_indicator, 9u);
  EXPECT_EQ(stats.disagree, 6u);
  EXPECT_EQ(stats.kept, 3u);
}

std::pair<SilverDataset, NliPredictions> Agreeing(int n) {
  std::vector<SilverExample> rows;
  NliPredictions preds;
  for (int i = 0; i < n; ++i) {
    auto ex = Make(Label::kSupport, "应" + std::to_string(i), "甲");
    preds.labels[ex.example_id] = NliLabel::kEntailment;
    rows.push_back(ex);
  }
  return {SilverDataset::Build(rows, "d", 1), preds};
}

TEST(BuildD2, SizeIsMinOfTargetAndKept) {
  const auto [d1, preds] = Agreeing(40);
  Rng rng(1);
  EXPECT_EQ(BuildD2(d1, preds, FilterConfig{}, 30000, rng, "d").size(), 40u);
  EXPECT_EQ(BuildD2(d1, preds, FilterConfig{}, 15, rng, "d").size(), 15u);
}

TEST(BuildD2, SeedDeterministic) {
  const auto [d1, preds] = Agreeing(40);
  Rng a(6), b(6);
  const auto x = BuildD2(d1, preds, FilterConfig{}, 10, a, "d");
  const auto y = BuildD2(d1, preds, FilterConfig{}, 10, b, "d");
  EXPECT_EQ(DatasetDigest(x), DatasetDigest(y));
}

TEST(BuildD2, NothingKeptIsAnError) {
  const auto [d1, preds] = Agreeing(5);
  Rng rng(1);
  try {
    BuildD2(d1, NliPredictions{}, FilterConfig{}, 10, rng, "d");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "refine");
  }
}

}  // namespace
}  // namespace stance
