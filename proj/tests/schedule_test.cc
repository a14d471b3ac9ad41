#include "stance/schedule.h"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "stance/utf8.h"

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

SilverDataset Sized(std::size_t n, DatasetTag tag, const std::string& prefix) {
  std::vector<SilverExample> v;
  for (std::size_t i = 0; i < n; ++i) {
    auto ex = Make(kAllLabels[i % 3], prefix + std::to_string(i), "论点");
    ex.tag = tag;
    v.push_back(ex);
  }
  return SilverDataset::Build(std::move(v), "d", 0);
}

TEST(PlanDistant, DefaultStepCountAndMix) {
  const StageConfig cfg = StageConfig::Defaults(Stage::kDistant);
  Rng rng(1);
  const auto tickets = PlanDistant(cfg, 2100000, 400000, rng);
  ASSERT_EQ(tickets.size(), 58500u);
  std::size_t d1 = 0;
  for (std::size_t i = 0; i < tickets.size(); ++i) {
    EXPECT_EQ(tickets[i].step, i);
    EXPECT_EQ(tickets[i].example_indices.size(), 8u);
    d1 += tickets[i].source == DatasetTag::kD1;
  }
  EXPECT_NEAR(static_cast<double>(d1) / 58500.0, 0.8, 0.01);
}

TEST(PlanDistant, PinnedSequenceSeedSeven) {
  StageConfig cfg = StageConfig::Defaults(Stage::kDistant);
  cfg.total_steps = 10;
  Rng rng(7);
  const auto tickets = PlanDistant(cfg, 100, 100, rng);
  std::string got;
  for (const auto& t : tickets) {
    got += t.source == DatasetTag::kD1 ? "1" : "x";
    got += t.objective == Objective::kClassification ? "c" : "m";
    got += " ";
  }
  EXPECT_EQ(got, "1m 1m 1c xm 1m 1m 1c xc xm xc ");
  // Independent derivation from the raw engine: two words per step, upper
  // 32 bits compared with the quantized probability.
  std::mt19937_64 engine(7);
  std::string ref;
  for (int i = 0; i < 10; ++i) {
    ref += (engine() >> 32) < 3435973837ull ? "1" : "x";
    ref += (engine() >> 32) < 2147483648ull ? "c" : "m";
    ref += " ";
  }
  EXPECT_EQ(got, ref);
}

TEST(PlanDistant, EpochSamplerVisitsEveryRowOncePerPass) {
  StageConfig cfg = StageConfig::Defaults(Stage::kDistant);
  cfg.total_steps = 50;
  cfg.d1_mix_probability = 1.0;
  Rng rng(3);
  const auto tickets = PlanDistant(cfg, 40, 0, rng);
  std::vector<std::uint64_t> seq;
  for (const auto& t : tickets) seq.insert(seq.end(), t.example_indices.begin(), t.example_indices.end());
  for (std::size_t pass = 0; pass + 40 <= seq.size(); pass += 40) {
    std::set<std::uint64_t> s(seq.begin() + pass, seq.begin() + pass + 40);
    EXPECT_EQ(s.size(), 40u);
  }
}

TEST(PlanDistant, Reproducible) {
  const StageConfig cfg = StageConfig::Defaults(Stage::kDistant);
  Rng a(5), b(5);
  const auto x = PlanDistant(cfg, 1000, 1000, a);
  const auto y = PlanDistant(cfg, 1000, 1000, b);
  for (std::size_t i = 0; i < x.size(); i += 97) {
    EXPECT_EQ(TicketToJson(x[i]).dump(), TicketToJson(y[i]).dump());
  }
}

TEST(PlanDistant, EmptySourceRejected) {
  const StageConfig cfg = StageConfig::Defaults(Stage::kDistant);
  Rng rng(1);
  EXPECT_THROW(PlanDistant(cfg, 0, 10, rng), Error);
  EXPECT_THROW(PlanDistant(cfg, 10, 0, rng), Error);
  EXPECT_THROW(PlanDistant(StageConfig::Defaults(Stage::kNoisy), 10, 10, rng), Error);
}

TEST(MaskCount, CeilingArithmetic) {
  EXPECT_EQ(MaskCount(0.15, 20), 3u);
  EXPECT_EQ(MaskCount(0.15, 1), 1u);
  EXPECT_EQ(MaskCount(0.15, 7), 2u);
  EXPECT_EQ(MaskCount(0.0, 7), 0u);
  EXPECT_EQ(MaskCount(1.0, 7), 7u);
}

TEST(DecorateCmlm, LabelTokenAndPositions) {
  EXPECT_EQ(LabelToken(Label::kSupport), "[SUPPORT]");
  EXPECT_EQ(LabelToken(Label::kAgainst), "[AGAINST]");
  EXPECT_EQ(LabelToken(Label::kNeutral), "[NEUTRAL]");
  const std::string twenty = "一二三四五六七八九十壹贰叁肆伍陆柒捌玖拾";
  const auto ex = Make(Label::kSupport, twenty, "甲乙丙丁戊己庚辛壬癸子丑寅卯辰巳午未申酉");
  const StageConfig cfg = StageConfig::Defaults(Stage::kDistant);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto rec = DecorateCmlm(ex, cfg, rng);
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->label_token, "[SUPPORT]");
    ASSERT_EQ(rec->masked_positions.size(), 3u);
    const std::string& seg = rec->mask_target == MaskTarget::kTopic ? rec->topic : rec->claim;
    std::set<std::uint32_t> uniq(rec->masked_positions.begin(), rec->masked_positions.end());
    EXPECT_EQ(uniq.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_LT(rec->masked_positions[k], 20u);
      EXPECT_EQ(rec->targets[k], seg.substr(rec->masked_positions[k] * 3, 3));
    }
  }
}

TEST(DecorateCmlm, PinnedRecord) {
  const auto ex = Make(Label::kAgainst, "政府应加大投入", "财政压力很大");
  Rng rng(42);
  const auto rec = DecorateCmlm(ex, StageConfig::Defaults(Stage::kDistant), rng);
  ASSERT_TRUE(rec);
  std::string got = std::string(MaskTargetName(rec->mask_target)) + ":";
  for (auto p : rec->masked_positions) got += std::to_string(p) + ",";
  for (const auto& t : rec->targets) got += t;
  EXPECT_EQ(got, "topic:3,5,加投");
}

TEST(DecorateCmlm, EmptySegmentSkipped) {
  SilverExample ex = Make(Label::kNeutral, "", "");
  Rng rng(1);
  EXPECT_FALSE(DecorateCmlm(ex, StageConfig::Defaults(Stage::kDistant), rng));
}

TEST(DecorateTickets, MaskedPositionsInsideTargetAndDeferredForOpaque) {
  StageConfig cfg = StageConfig::Defaults(Stage::kDistant);
  cfg.total_steps = 300;
  const auto d1 = Sized(50, DatasetTag::kD1, "主题句子内容");
  Rng rng(8);
  auto tickets = PlanDistant(cfg, d1.size(), 30, rng);
  DecorateStats stats;
  DecorateTickets(tickets, cfg, &d1, nullptr, rng, &stats);
  EXPECT_GT(stats.decorated, 0u);
  EXPECT_GT(stats.deferred, 0u);
  for (const auto& t : tickets) {
    if (t.objective == Objective::kClassification) {
      EXPECT_TRUE(t.cmlm.empty());
      continue;
    }
    ASSERT_EQ(t.cmlm.size(), t.example_indices.size());
    for (std::size_t i = 0; i < t.cmlm.size(); ++i) {
      const CmlmSlot& s = t.cmlm[i];
      if (t.source == DatasetTag::kDx) {
        EXPECT_TRUE(s.deferred);
        continue;
      }
      const SilverExample& ex = d1.examples()[t.example_indices[i]];
      EXPECT_EQ(s.label_token, LabelToken(ex.label));
      const std::string& seg = s.mask_target == MaskTarget::kTopic ? ex.topic : ex.claim;
      for (auto p : s.masked_positions) EXPECT_LT(p, utf8::Length(seg));
    }
  }
}

TEST(CleanStage, NoisyCountArithmetic) {
  StageConfig cfg = StageConfig::Defaults(Stage::kClean);
  EXPECT_EQ(CleanStageNoisyCount(cfg, 6416), 513u);
  for (std::uint64_t n : {0, 250, 500, 1000}) {
    cfg.noisy_count_override = n;
    EXPECT_EQ(CleanStageNoisyCount(cfg, 6416), n);
  }
}

TEST(ComposeStage, CleanSizesAndOverrides) {
  const auto gold = Sized(6416, DatasetTag::kGold, "金");
  const auto d2 = Sized(30000, DatasetTag::kD2, "银");
  StageConfig cfg = StageConfig::Defaults(Stage::kClean);
  Rng rng(4);
  const auto comp = ComposeStage(Stage::kClean, cfg, d2, gold, nullptr, rng);
  EXPECT_EQ(comp.noisy_added, 513u);
  EXPECT_EQ(comp.members.size(), 6416u + 513u);
  ASSERT_EQ(comp.epoch_orders.size(), 2u);
  EXPECT_NE(comp.epoch_orders[0], comp.epoch_orders[1]);
  for (std::uint64_t n : {0, 250, 500, 1000}) {
    cfg.noisy_count_override = n;
    const auto c = ComposeStage(Stage::kClean, cfg, d2, gold, nullptr, rng);
    EXPECT_EQ(c.members.size(), 6416u + n);
    std::size_t noisy = 0;
    for (const auto& m : c.members) noisy += m.tag == DatasetTag::kD2;
    EXPECT_EQ(noisy, n);
  }
}

TEST(ComposeStage, ZeroFractionIsGoldExactly) {
  const auto gold = Sized(20, DatasetTag::kGold, "金");
  const auto d2 = Sized(5, DatasetTag::kD2, "银");
  StageConfig cfg = StageConfig::Defaults(Stage::kClean);
  cfg.noisy_fraction_clean_stage = 0.0;
  Rng rng(4);
  const auto comp = ComposeStage(Stage::kClean, cfg, d2, gold, nullptr, rng);
  ASSERT_EQ(comp.members.size(), gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i)
    EXPECT_EQ(comp.members[i].example_id, gold.examples()[i].example_id);
}

TEST(ComposeStage, Errors) {
  const auto gold = Sized(100, DatasetTag::kGold, "金");
  const auto d2 = Sized(5, DatasetTag::kD2, "银");
  StageConfig cfg = StageConfig::Defaults(Stage::kClean);
  Rng rng(4);
  EXPECT_THROW(ComposeStage(Stage::kClean, cfg, d2, gold, nullptr, rng), Error);
  EXPECT_THROW(ComposeStage(Stage::kNoisy, cfg, d2, SilverDataset{}, nullptr, rng), Error);
}

TEST(ComposeStage, NoisyConcatenatesAllSources) {
  const auto gold = Sized(10, DatasetTag::kGold, "金");
  const auto d2 = Sized(30, DatasetTag::kD2, "银");
  const auto bt = Sized(10, DatasetTag::kBacktrans, "译");
  Rng rng(4);
  const auto comp =
      ComposeStage(Stage::kNoisy, StageConfig::Defaults(Stage::kNoisy), d2, gold, &bt, rng);
  EXPECT_EQ(comp.members.size(), 50u);
  std::ostringstream out;
  WriteCompositionTickets(comp, out);
  std::size_t lines = 0;
  std::string line;
  std::istringstream in(out.str());
  while (std::getline(in, line)) {
    ++lines;
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["objective"], "classification");
  }
  EXPECT_EQ(lines, 4u);  // two epochs of 50 at batch 32
}

TEST(StageConfig, ValidateAndDefaults) {
  const auto d = StageConfig::Defaults(Stage::kDistant);
  EXPECT_EQ(d.batch_size * d.grad_accum, 32u);
  EXPECT_TRUE(d.reinit_head);
  StageConfig bad = d;
  bad.d1_mix_probability = 1.5;
  bad.batch_size = 0;
  bad.total_steps = 0;
  EXPECT_EQ(bad.Validate().size(), 3u);
  EXPECT_EQ(d.ToJson()["total_steps"], 58500);
}

}  // namespace
}  // namespace stance

namespace stance {
namespace {

TEST(TicketJson, FastWriterMatchesJsonTree) {
  StageConfig cfg = StageConfig::Defaults(Stage::kDistant);
  cfg.total_steps = 200;
  std::vector<SilverExample> rows;
  for (int i = 0; i < 20; ++i) {
    auto ex = Make(kAllLabels[i % 3], "主题" + std::to_string(i), "论点");
    if (i == 3) ex.example_id = "odd\"id\\\n";
    if (i == 4) ex.topic.clear();
    rows.push_back(ex);
  }
  const auto d1 = SilverDataset::Build(rows, "d", 0);
  Rng rng(2);
  auto tickets = PlanDistant(cfg, d1.size(), 7, rng);
  DecorateStats stats;
  DecorateTickets(tickets, cfg, &d1, nullptr, rng, &stats);
  for (const auto& t : tickets) {
    std::string fast;
    AppendTicketJson(t, &fast);
    EXPECT_EQ(fast, TicketToJson(t).dump());
  }
}

}  // namespace
}  // namespace stance
