#include "stance/patterns.h"

#include <gtest/gtest.h>

#include <set>

#include "oracle/synthetic_corpus.h"
#include "stance/corpus.h"

namespace stance {
namespace {

std::vector<Sentence> Sentences(const std::string& text) {
  return Segment({"doc", text, ""});
}

std::optional<PatternMatch> MatchLast(const std::vector<Sentence>& s) {
  const auto patterns = DefaultPatterns();
  const Sentence* prev = s.size() > 1 ? &s[s.size() - 2] : nullptr;
  return MatchPair(prev, s.back(), patterns);
}

bool Contains(const std::vector<ConnectivePattern>& ps, Label rel, Arity ar,
              const std::string& head, const std::string& tail) {
  for (const auto& p : ps) {
    if (p.relation == rel && p.arity == ar && p.head == head && p.tail == tail)
      return true;
  }
  return false;
}

TEST(DefaultPatterns, CarriesInventory) {
  const auto ps = DefaultPatterns();
  EXPECT_EQ(ps.size(), 13u);
  for (const char* h : {"因此", "因而", "所以"})
    EXPECT_TRUE(Contains(ps, Label::kSupport, Arity::kMultiline, h, ""));
  for (const char* h : {"但是", "然而", "可是"})
    EXPECT_TRUE(Contains(ps, Label::kAgainst, Arity::kMultiline, h, ""));
  EXPECT_TRUE(Contains(ps, Label::kSupport, Arity::kSingleline, "因为", "所以"));
  EXPECT_TRUE(Contains(ps, Label::kSupport, Arity::kSingleline, "只要", "就"));
  EXPECT_TRUE(Contains(ps, Label::kSupport, Arity::kSingleline, "要是", "就"));
  EXPECT_TRUE(Contains(ps, Label::kSupport, Arity::kSingleline, "之所以", "是因为"));
  EXPECT_TRUE(Contains(ps, Label::kAgainst, Arity::kSingleline, "虽然", "但是"));
  EXPECT_TRUE(Contains(ps, Label::kAgainst, Arity::kSingleline, "虽然", "可是"));
  EXPECT_TRUE(Contains(ps, Label::kAgainst, Arity::kSingleline, "尽管", "但是"));
}

TEST(DefaultPatterns, IdsUniqueAndValid) {
  const auto ps = DefaultPatterns();
  std::set<std::string> ids;
  for (const auto& p : ps) ids.insert(p.pattern_id);
  EXPECT_EQ(ids.size(), ps.size());
  EXPECT_TRUE(ValidatePatterns(ps).empty());
}

TEST(DefaultPatterns, JsonRoundTrip) {
  const auto ps = DefaultPatterns();
  const auto back = ParsePatterns(nlohmann::json::parse(PatternsToJson(ps).dump()));
  ASSERT_EQ(back.size(), ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(back[i].pattern_id, ps[i].pattern_id);
    EXPECT_EQ(back[i].head, ps[i].head);
    EXPECT_EQ(back[i].tail, ps[i].tail);
    EXPECT_EQ(back[i].first_is, ps[i].first_is);
  }
}

TEST(ValidatePatterns, RejectsBadRules) {
  std::vector<ConnectivePattern> ps = DefaultPatterns();
  ps[0].tail = "就";  // multiline with a tail
  ps[3].tail = "";    // singleline without one
  ps[4].pattern_id = ps[5].pattern_id;
  ps[6].head = "so";
  EXPECT_GE(ValidatePatterns(ps).size(), 4u);
  EXPECT_THROW(ParsePatterns(nlohmann::json::parse(R"([{"pattern_id":"x"}])")),
               Error);
}

TEST(MatchPair, Multiline) {
  const auto s = Sentences("甲获得了冠军。因此甲实力很强。");
  const auto m = MatchLast(s);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->relation, Label::kSupport);
  EXPECT_EQ(m->first_segment, "甲获得了冠军");
  EXPECT_EQ(m->second_segment, "甲实力很强");
  EXPECT_EQ(m->sentence_indices, (std::vector<std::size_t>{0, 1}));
  const auto c = ToCandidate(*m, DefaultPatterns());
  EXPECT_EQ(c.topic, "甲实力很强");
  EXPECT_EQ(c.claim, "甲获得了冠军");
}

TEST(MatchPair, MultilineNeedsPreviousSentence) {
  EXPECT_FALSE(MatchLast(Sentences("因此甲实力很强。")));
}

TEST(MatchPair, SinglelineSupportExample) {
  const auto s =
      Sentences("因为生成的大数据可作为预测工具和预防策略，所以大数据带来了更多的好处。");
  const auto m = MatchLast(s);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->pattern_id, "support_single_yinwei_suoyi");
  EXPECT_EQ(m->first_segment, "生成的大数据可作为预测工具和预防策略");
  EXPECT_EQ(m->second_segment, "大数据带来了更多的好处");
  const auto c = ToCandidate(*m, DefaultPatterns());
  EXPECT_EQ(c.relation, Label::kSupport);
  EXPECT_EQ(c.topic, "大数据带来了更多的好处");
  EXPECT_EQ(c.claim, "生成的大数据可作为预测工具和预防策略");
}

TEST(MatchPair, ConcessiveWithoutTailDoesNotMatch) {
  EXPECT_FALSE(MatchLast(Sentences("虽然大数据带来了更多的好处，大数据的准确性难以确保。")));
}

TEST(MatchPair, ConcessiveWithTailIsAgainst) {
  const auto m = MatchLast(
      Sentences("虽然大数据带来了更多的好处，但是大数据的准确性难以确保。"));
  ASSERT_TRUE(m);
  const auto c = ToCandidate(*m, DefaultPatterns());
  EXPECT_EQ(c.relation, Label::kAgainst);
  EXPECT_EQ(c.topic, "大数据带来了更多的好处");
  EXPECT_EQ(c.claim, "大数据的准确性难以确保");
}

TEST(MatchPair, TailMustOpenFragment) {
  EXPECT_FALSE(MatchLast(Sentences("因为甲很强，乙所以丙。")));
}

TEST(MatchPair, HeadOffsetLimit) {
  // Ten leading characters are allowed, eleven are not.
  EXPECT_TRUE(MatchLast(Sentences("一二三四五六七八九十之所以甲，是因为乙。")));
  EXPECT_FALSE(MatchLast(Sentences("一二三四五六七八九十壹之所以甲，是因为乙。")));
}

TEST(MatchPair, ReasonFirstRuleTakesTopicFirst) {
  const auto m = MatchLast(Sentences("城市之所以发展，是因为交通便利。"));
  ASSERT_TRUE(m);
  const auto c = ToCandidate(*m, DefaultPatterns());
  EXPECT_EQ(c.topic, "城市发展");
  EXPECT_EQ(c.claim, "交通便利");
}

TEST(MatchPair, SegmentRepeatingConnectiveFails) {
  EXPECT_FALSE(MatchLast(Sentences("因为甲因为乙，所以丙。")));
}

TEST(MatchPair, MultilineBeatsSingleline) {
  // The multiline reading leaves 因此 in the second segment, so it fails and
  // the singleline rule wins.
  const auto m = MatchLast(Sentences("甲很好。因此虽然乙，但是因此丙。"));
  ASSERT_TRUE(m);
  EXPECT_EQ(m->pattern_id, "against_single_suiran_danshi");
  EXPECT_EQ(m->first_segment, "因此乙");
  const auto m2 = MatchLast(Sentences("甲很好。可是虽然乙，但是丙。"));
  ASSERT_TRUE(m2);
  EXPECT_EQ(m2->pattern_id, "against_multi_keshi");
}

TEST(ToCandidate, FlippingRoleSwapsTopicAndClaim) {
  auto ps = DefaultPatterns();
  const auto s =
      Sentences("虽然大数据带来了更多的好处，但是大数据的准确性难以确保。");
  const auto m = MatchPair(nullptr, s[0], ps);
  ASSERT_TRUE(m);
  const auto a = ToCandidate(*m, ps);
  for (auto& p : ps) p.first_is = p.first_is == Role::kTopic ? Role::kClaim : Role::kTopic;
  const auto b = ToCandidate(*m, ps);
  EXPECT_EQ(a.topic, b.claim);
  EXPECT_EQ(a.claim, b.topic);
  EXPECT_EQ(a.topic_sentence, b.claim_sentence);
}

TEST(ToCandidate, UnknownPatternThrows) {
  PatternMatch m;
  m.pattern_id = "nope";
  EXPECT_THROW(ToCandidate(m, DefaultPatterns()), Error);
}

TEST(TrimPunctuation, StripsBothEnds) {
  EXPECT_EQ(TrimPunctuation("，、甲乙。！"), "甲乙");
  EXPECT_EQ(TrimPunctuation("。"), "");
}

// Every match on generated text: segments are clean and reinserting the
// deleted connectives reconstructs the window text.
TEST(MatchPair, PropertiesOnSyntheticCorpus) {
  const auto ps = DefaultPatterns();
  oracle::SyntheticCorpus gen(99);
  int matches = 0;
  for (int i = 0; i < 500; ++i) {
    const auto s = Segment({"d", gen.Document(), ""});
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto m = MatchPair(k ? &s[k - 1] : nullptr, s[k], ps);
      if (!m) continue;
      ++matches;
      const ConnectivePattern* p = nullptr;
      for (const auto& q : ps) {
        if (q.pattern_id == m->pattern_id) p = &q;
      }
      ASSERT_NE(p, nullptr);
      for (const std::string* seg : {&m->first_segment, &m->second_segment}) {
        EXPECT_FALSE(seg->empty());
        EXPECT_EQ(seg->find(p->head), std::string::npos);
        if (!p->tail.empty()) EXPECT_EQ(seg->find(p->tail), std::string::npos);
      }
      const std::string window =
          m->sentence_indices.size() == 2 ? s[k - 1].text + s[k].text : s[k].text;
      EXPECT_EQ(m->source_text, window);
      EXPECT_EQ(ReinsertDeletions(RemoveDeletions(m->source_text, m->deletions),
                                  m->deletions),
                m->source_text);
      EXPECT_EQ(MatchPair(k ? &s[k - 1] : nullptr, s[k], ps)->first_segment,
                m->first_segment);
    }
  }
  EXPECT_GT(matches, 500);
}

}  // namespace
}  // namespace stance
