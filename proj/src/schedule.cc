#include "stance/schedule.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "stance/utf8.h"

namespace stance {

namespace {

using nlohmann::ordered_json;

// Draws indices from [0, n) in reshuffled passes. The shuffle is performed
// lazily, one swap per draw.
class EpochSampler {
 public:
  EpochSampler(std::uint64_t n, Rng rng) : order_(n), rng_(std::move(rng)) {
    std::iota(order_.begin(), order_.end(), std::uint64_t{0});
  }

  std::uint64_t Next() {
    if (cursor_ == order_.size()) cursor_ = 0;
    const std::uint64_t j = cursor_ + rng_.Uniform(order_.size() - cursor_);
    std::swap(order_[cursor_], order_[j]);
    return order_[cursor_++];
  }

 private:
  std::vector<std::uint64_t> order_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

std::uint64_t ToBasisPoints(double fraction) {
  return static_cast<std::uint64_t>(std::llround(fraction * 10000.0));
}

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kDistant:
      return "distant";
    case Stage::kNoisy:
      return "noisy";
    case Stage::kClean:
      return "clean";
  }
  return "";
}

std::optional<Stage> ParseStage(std::string_view name) {
  for (Stage s : {Stage::kDistant, Stage::kNoisy, Stage::kClean}) {
    if (StageName(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view ObjectiveName(Objective objective) {
  return objective == Objective::kClassification ? "classification"
                                                 : "cond_mlm";
}

std::string_view MaskTargetName(MaskTarget target) {
  return target == MaskTarget::kTopic ? "topic" : "claim";
}

std::string_view LabelToken(Label label) {
  switch (label) {
    case Label::kSupport:
      return "[SUPPORT]";
    case Label::kAgainst:
      return "[AGAINST]";
    case Label::kNeutral:
      return "[NEUTRAL]";
  }
  return "";
}

StageConfig StageConfig::Defaults(Stage stage) {
  StageConfig cfg;
  cfg.stage = stage;
  if (stage != Stage::kDistant) {
    cfg.batch_size = 32;
    cfg.grad_accum = 1;
    cfg.learning_rate = 6e-6;
    cfg.objective_probability = 1.0;
  }
  return cfg;
}

std::vector<std::string> StageConfig::Validate() const {
  std::vector<std::string> errors;
  const std::string prefix = "schedule." + std::string(StageName(stage)) + ".";
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      errors.push_back(prefix + name + ": must be in [0, 1]");
  };
  prob(d1_mix_probability, "d1_mix_probability");
  prob(objective_probability, "objective_probability");
  prob(mask_rate, "mask_rate");
  prob(noisy_fraction_clean_stage, "noisy_fraction_clean_stage");
  if (batch_size < 1) errors.push_back(prefix + "batch_size: must be >= 1");
  if (grad_accum < 1) errors.push_back(prefix + "grad_accum: must be >= 1");
  if (stage == Stage::kDistant && total_steps < 1)
    errors.push_back(prefix + "total_steps: must be >= 1");
  if (stage != Stage::kDistant && epochs < 1)
    errors.push_back(prefix + "epochs: must be >= 1");
  if (!(learning_rate > 0.0))
    errors.push_back(prefix + "learning_rate: must be > 0");
  return errors;
}

ordered_json StageConfig::ToJson() const {
  ordered_json j;
  j["stage"] = StageName(stage);
  if (stage == Stage::kDistant) {
    j["total_steps"] = total_steps;
  } else {
    j["epochs"] = epochs;
  }
  j["batch_size"] = batch_size;
  j["grad_accum"] = grad_accum;
  j["effective_batch_size"] = batch_size * grad_accum;
  if (stage == Stage::kDistant) {
    j["d1_mix_probability"] = d1_mix_probability;
    j["objective_probability"] = objective_probability;
    j["mask_rate"] = mask_rate;
  }
  if (stage == Stage::kClean) {
    j["noisy_fraction_clean_stage"] = noisy_fraction_clean_stage;
    if (noisy_count_override) {
      j["noisy_count_override"] = *noisy_count_override;
    } else {
      j["noisy_count_override"] = nullptr;
    }
  }
  j["learning_rate"] = learning_rate;
  j["optimizer"] = "AdamW";
  j["reinit_head"] = reinit_head;
  return j;
}

std::vector<BatchTicket> PlanDistant(const StageConfig& cfg,
                                     std::uint64_t d1_size,
                                     std::uint64_t dx_size, Rng& rng) {
  if (cfg.stage != Stage::kDistant)
    throw Error("schedule", "PlanDistant needs a distant stage config");
  if (d1_size == 0 && cfg.d1_mix_probability > 0.0)
    throw Error("schedule", "D1 is empty but d1_mix_probability > 0");
  if (dx_size == 0 && cfg.d1_mix_probability < 1.0)
    throw Error("schedule", "Dx is empty but d1_mix_probability < 1");

  std::optional<EpochSampler> d1_order;
  std::optional<EpochSampler> dx_order;
  if (d1_size > 0) d1_order.emplace(d1_size, rng.Derive("order.D1"));
  if (dx_size > 0) dx_order.emplace(dx_size, rng.Derive("order.Dx"));

  std::vector<BatchTicket> tickets;
  tickets.reserve(cfg.total_steps);
  for (std::uint64_t step = 0; step < cfg.total_steps; ++step) {
    BatchTicket t;
    t.stage = Stage::kDistant;
    t.step = step;
    t.source = rng.Bernoulli(cfg.d1_mix_probability) ? DatasetTag::kD1
                                                      : DatasetTag::kDx;
    t.objective = rng.Bernoulli(cfg.objective_probability)
                      ? Objective::kClassification
                      : Objective::kCondMlm;
    EpochSampler& order = t.source == DatasetTag::kD1 ? *d1_order : *dx_order;
    t.example_indices.reserve(cfg.batch_size);
    for (std::uint32_t k = 0; k < cfg.batch_size; ++k)
      t.example_indices.push_back(order.Next());
    tickets.push_back(std::move(t));
  }
  return tickets;
}

std::uint32_t MaskCount(double mask_rate, std::size_t length) {
  const std::uint64_t bp = ToBasisPoints(mask_rate);
  return static_cast<std::uint32_t>((bp * length + 9999) / 10000);
}

std::optional<CmlmRecord> DecorateCmlm(const SilverExample& example,
                                       const StageConfig& cfg, Rng& rng) {
  CmlmRecord rec;
  rec.label_token = std::string(LabelToken(example.label));
  rec.topic = example.topic;
  rec.claim = example.claim;
  rec.mask_target = rng.Uniform(2) == 0 ? MaskTarget::kTopic : MaskTarget::kClaim;
  const std::string& segment =
      rec.mask_target == MaskTarget::kTopic ? rec.topic : rec.claim;
  const auto chars = utf8::Chars(segment);
  if (chars.empty()) return std::nullopt;
  const std::uint32_t count = std::min<std::uint32_t>(
      MaskCount(cfg.mask_rate, chars.size()),
      static_cast<std::uint32_t>(chars.size()));
  for (std::size_t pos : rng.SampleIndices(chars.size(), count)) {
    rec.masked_positions.push_back(static_cast<std::uint32_t>(pos));
    rec.targets.emplace_back(chars[pos]);
  }
  return rec;
}

void DecorateTickets(std::vector<BatchTicket>& tickets, const StageConfig& cfg,
                     const SilverDataset* d1, const SilverDataset* dx,
                     const Rng& rng, DecorateStats* stats) {
  const Rng base = rng.Derive("decorate");
  for (auto& t : tickets) {
    const SilverDataset* rows = t.source == DatasetTag::kD1 ? d1 : dx;
    t.example_ids.clear();
    t.cmlm.clear();
    if (rows != nullptr) {
      for (std::uint64_t idx : t.example_indices) {
        if (idx >= rows->size())
          throw Error("schedule", "ticket index outside dataset");
        t.example_ids.push_back(rows->examples()[idx].example_id);
      }
    }
    if (t.objective != Objective::kCondMlm) continue;
    Rng slot_rng = base.Derive(t.step);
    for (std::size_t slot = 0; slot < t.example_indices.size(); ++slot) {
      CmlmSlot s;
      if (rows == nullptr) {
        s.mask_target =
            slot_rng.Uniform(2) == 0 ? MaskTarget::kTopic : MaskTarget::kClaim;
        s.deferred = true;
        ++stats->deferred;
      } else {
        const auto rec = DecorateCmlm(rows->examples()[t.example_indices[slot]],
                                      cfg, slot_rng);
        if (!rec) {
          ++stats->skipped_empty;
          s.deferred = true;
        } else {
          s.mask_target = rec->mask_target;
          s.label_token = rec->label_token;
          s.masked_positions = rec->masked_positions;
          ++stats->decorated;
        }
      }
      t.cmlm.push_back(std::move(s));
    }
  }
}

ordered_json TicketToJson(const BatchTicket& t) {
  ordered_json j;
  j["stage"] = StageName(t.stage);
  j["step"] = t.step;
  j["source"] = DatasetTagName(t.source);
  j["objective"] = ObjectiveName(t.objective);
  ordered_json examples = ordered_json::array();
  for (std::size_t i = 0; i < t.example_indices.size(); ++i) {
    ordered_json e;
    e["index"] = t.example_indices[i];
    if (i < t.example_ids.size()) e["id"] = t.example_ids[i];
    if (i < t.cmlm.size()) {
      const CmlmSlot& s = t.cmlm[i];
      e["mask_target"] = MaskTargetName(s.mask_target);
      if (s.deferred) {
        e["label_token"] = nullptr;
        e["deferred"] = true;
      } else {
        e["label_token"] = s.label_token;
        e["masked_positions"] = s.masked_positions;
      }
    }
    examples.push_back(std::move(e));
  }
  j["examples"] = std::move(examples);
  return j;
}

namespace {

void AppendJsonString(std::string_view s, std::string* out) {
  const bool plain = std::none_of(s.begin(), s.end(), [](char c) {
    return c == '"' || c == '\\' || static_cast<unsigned char>(c) < 0x20;
  });
  if (plain) {
    out->push_back('"');
    out->append(s);
    out->push_back('"');
  } else {
    out->append(nlohmann::json(std::string(s)).dump(
        -1, ' ', false, nlohmann::json::error_handler_t::replace));
  }
}

}  // namespace

void AppendTicketJson(const BatchTicket& t, std::string* out) {
  out->append("{\"stage\":\"");
  out->append(StageName(t.stage));
  out->append("\",\"step\":");
  out->append(std::to_string(t.step));
  out->append(",\"source\":\"");
  out->append(DatasetTagName(t.source));
  out->append("\",\"objective\":\"");
  out->append(ObjectiveName(t.objective));
  out->append("\",\"examples\":[");
  for (std::size_t i = 0; i < t.example_indices.size(); ++i) {
    if (i > 0) out->push_back(',');
    out->append("{\"index\":");
    out->append(std::to_string(t.example_indices[i]));
    if (i < t.example_ids.size()) {
      out->append(",\"id\":");
      AppendJsonString(t.example_ids[i], out);
    }
    if (i < t.cmlm.size()) {
      const CmlmSlot& s = t.cmlm[i];
      out->append(",\"mask_target\":\"");
      out->append(MaskTargetName(s.mask_target));
      out->push_back('"');
      if (s.deferred) {
        out->append(",\"label_token\":null,\"deferred\":true");
      } else {
        out->append(",\"label_token\":");
        AppendJsonString(s.label_token, out);
        out->append(",\"masked_positions\":[");
        for (std::size_t k = 0; k < s.masked_positions.size(); ++k) {
          if (k > 0) out->push_back(',');
          out->append(std::to_string(s.masked_positions[k]));
        }
        out->push_back(']');
      }
    }
    out->push_back('}');
  }
  out->append("]}");
}

std::uint64_t CleanStageNoisyCount(const StageConfig& cfg,
                                   std::uint64_t gold_size) {
  if (cfg.noisy_count_override) return *cfg.noisy_count_override;
  return ToBasisPoints(cfg.noisy_fraction_clean_stage) * gold_size / 10000;
}

StageComposition ComposeStage(Stage stage, const StageConfig& cfg,
                              const SilverDataset& d2,
                              const SilverDataset& gold,
                              const SilverDataset* backtrans, Rng& rng) {
  if (stage == Stage::kDistant)
    throw Error("schedule", "ComposeStage handles the noisy and clean stages");
  if (gold.empty()) throw Error("schedule", "gold dataset is empty");

  StageComposition comp;
  comp.stage = stage;
  comp.config = cfg;
  comp.config.stage = stage;
  auto append = [&](const SilverDataset& ds) {
    for (const auto& ex : ds.examples()) comp.members.push_back(ex);
  };

  if (stage == Stage::kNoisy) {
    append(d2);
    append(gold);
    if (backtrans != nullptr) append(*backtrans);
  } else {
    const std::uint64_t added = CleanStageNoisyCount(cfg, gold.size());
    if (added > d2.size()) {
      throw Error("schedule", "clean stage needs " + std::to_string(added) +
                                  " noisy points but D2 has " +
                                  std::to_string(d2.size()));
    }
    append(gold);
    Rng sample_rng = rng.Derive("clean.sample");
    for (std::size_t i : sample_rng.SampleIndices(d2.size(), added))
      comp.members.push_back(d2.examples()[i]);
    comp.noisy_added = added;
  }

  for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
    std::vector<std::uint64_t> order(comp.members.size());
    std::iota(order.begin(), order.end(), std::uint64_t{0});
    Rng epoch_rng = rng.Derive(std::string(StageName(stage)) + ".epoch." +
                               std::to_string(e));
    epoch_rng.Shuffle(order);
    comp.epoch_orders.push_back(std::move(order));
  }
  return comp;
}

void WriteCompositionTickets(const StageComposition& comp, std::ostream& out) {
  const std::size_t batch = comp.config.batch_size;
  std::uint64_t step = 0;
  for (std::size_t e = 0; e < comp.epoch_orders.size(); ++e) {
    const auto& order = comp.epoch_orders[e];
    for (std::size_t start = 0; start < order.size(); start += batch) {
      ordered_json j;
      j["stage"] = StageName(comp.stage);
      j["step"] = step++;
      j["epoch"] = e;
      j["objective"] = ObjectiveName(Objective::kClassification);
      ordered_json examples = ordered_json::array();
      for (std::size_t i = start; i < std::min(order.size(), start + batch); ++i) {
        const SilverExample& ex = comp.members[order[i]];
        ordered_json item;
        item["id"] = ex.example_id;
        item["tag"] = DatasetTagName(ex.tag);
        examples.push_back(std::move(item));
      }
      j["examples"] = std::move(examples);
      out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)
          << '\n';
    }
  }
}

}  // namespace stance
