#ifndef STANCE_SCHEDULE_H_
#define STANCE_SCHEDULE_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stance/rng.h"
#include "stance/silverset.h"

namespace stance {

enum class Stage { kDistant, kNoisy, kClean };
enum class Objective { kClassification, kCondMlm };
enum class MaskTarget { kTopic, kClaim };

std::string_view StageName(Stage stage);
std::optional<Stage> ParseStage(std::string_view name);
std::string_view ObjectiveName(Objective objective);
std::string_view MaskTargetName(MaskTarget target);

// "[SUPPORT]", "[AGAINST]" or "[NEUTRAL]".
std::string_view LabelToken(Label label);

struct StageConfig {
  Stage stage = Stage::kDistant;
  std::uint64_t total_steps = 58500;  // distant stage only
  std::uint32_t epochs = 2;           // noisy and clean stages
  std::uint32_t batch_size = 8;
  std::uint32_t grad_accum = 4;
  double d1_mix_probability = 0.8;
  // Probability that a distant batch uses the classification objective.
  double objective_probability = 0.5;
  double mask_rate = 0.15;
  double learning_rate = 8e-6;
  double noisy_fraction_clean_stage = 0.08;
  // Exact number of D2 points added in the clean stage; overrides the
  // fraction when set.
  std::optional<std::uint64_t> noisy_count_override;
  bool reinit_head = true;

  static StageConfig Defaults(Stage stage);
  std::vector<std::string> Validate() const;
  nlohmann::ordered_json ToJson() const;
};

struct CmlmSlot {
  MaskTarget mask_target = MaskTarget::kTopic;
  // Empty when the source dataset is opaque; a trainer that owns the rows
  // fills it from the row label.
  std::string label_token;
  // Character (Unicode scalar) indices inside the masked segment, ascending.
  std::vector<std::uint32_t> masked_positions;
  bool deferred = false;
};

struct BatchTicket {
  Stage stage = Stage::kDistant;
  std::uint64_t step = 0;
  DatasetTag source = DatasetTag::kD1;
  Objective objective = Objective::kClassification;
  std::vector<std::uint64_t> example_indices;
  std::vector<std::string> example_ids;  // filled when rows are known
  std::vector<CmlmSlot> cmlm;            // one per example for cond_mlm
};

// Draws cfg.total_steps tickets. Per step, two words from `rng` decide the
// source (D1 with d1_mix_probability, else Dx) and the objective. Example
// indices come from per-source reshuffled epochs derived from `rng`'s seed.
// Tickets are undecorated; see DecorateTickets.
std::vector<BatchTicket> PlanDistant(const StageConfig& cfg,
                                     std::uint64_t d1_size,
                                     std::uint64_t dx_size, Rng& rng);

struct CmlmRecord {
  std::string label_token;
  std::string topic;
  std::string claim;
  MaskTarget mask_target = MaskTarget::kTopic;
  std::vector<std::uint32_t> masked_positions;
  std::vector<std::string> targets;  // original characters at those positions
};

// Integer mask count: ceil(mask_rate * length), with mask_rate quantized to
// basis points so the result is platform independent.
std::uint32_t MaskCount(double mask_rate, std::size_t length);

// Chooses topic or claim uniformly, then MaskCount distinct positions in it.
// Returns nullopt when the chosen segment is empty.
std::optional<CmlmRecord> DecorateCmlm(const SilverExample& example,
                                       const StageConfig& cfg, Rng& rng);

struct DecorateStats {
  std::uint64_t decorated = 0;
  std::uint64_t deferred = 0;
  std::uint64_t skipped_empty = 0;
};

// Fills example ids and cond_mlm slots. A dataset pointer may be null for an
// opaque source; its cond_mlm slots then carry only a mask target and are
// marked deferred. Each ticket's slots draw in order from a generator keyed
// by the step, so decoration does not depend on any other ticket.
void DecorateTickets(std::vector<BatchTicket>& tickets, const StageConfig& cfg,
                     const SilverDataset* d1, const SilverDataset* dx,
                     const Rng& rng, DecorateStats* stats);

nlohmann::ordered_json TicketToJson(const BatchTicket& ticket);

// Appends the compact serialization of TicketToJson(ticket), without
// building a JSON tree.
void AppendTicketJson(const BatchTicket& ticket, std::string* out);

struct StageComposition {
  Stage stage = Stage::kNoisy;
  StageConfig config;
  std::vector<SilverExample> members;  // unshuffled: D2 sample/D2, gold, backtrans
  // Training order per epoch, as indices into `members`.
  std::vector<std::vector<std::uint64_t>> epoch_orders;
  std::uint64_t noisy_added = 0;
};

// Number of D2 points added in the clean stage: the override when set, else
// floor(fraction * gold_size) computed in basis points.
std::uint64_t CleanStageNoisyCount(const StageConfig& cfg,
                                   std::uint64_t gold_size);

// noisy: D2 + gold + backtrans, one shuffle per epoch.
// clean: gold + a seeded sample of CleanStageNoisyCount points from D2.
// Throws stance::Error("schedule") when gold is empty or the clean sample
// exceeds |D2|.
StageComposition ComposeStage(Stage stage, const StageConfig& cfg,
                              const SilverDataset& d2,
                              const SilverDataset& gold,
                              const SilverDataset* backtrans, Rng& rng);

// Batched training order as JSONL ticket objects.
void WriteCompositionTickets(const StageComposition& comp, std::ostream& out);

}  // namespace stance

#endif  // STANCE_SCHEDULE_H_
