#ifndef STANCE_CONFIG_H_
#define STANCE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stance/baseline.h"
#include "stance/corpus.h"
#include "stance/ensemble.h"
#include "stance/filters.h"
#include "stance/patterns.h"
#include "stance/schedule.h"
#include "stance/silverset.h"
#include "stance/types.h"

namespace stance {

// Raised when a configuration is invalid; carries every violation found.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct CorpusSource {
  std::filesystem::path path;
  CorpusFormat format = CorpusFormat::kPlain;
};

struct Seeds {
  std::uint64_t extract = 1;
  std::uint64_t balance = 2;
  std::uint64_t refine = 3;
  std::uint64_t plan = 4;
  std::uint64_t baseline = 5;
};

// Typed view of the merged JSON configuration. Optional paths are resolved
// against output_dir when unset.
struct RunConfig {
  std::filesystem::path output_dir = "out";
  std::vector<CorpusSource> corpus;
  std::optional<std::filesystem::path> patterns_path;
  ExtractConfig extract;
  bool balance_enabled = true;
  std::optional<std::uint64_t> balance_target;

  std::optional<std::filesystem::path> refine_d1;
  std::optional<std::filesystem::path> refine_nli;
  std::uint64_t refine_n = 30000;

  std::optional<std::vector<Stage>> plan_stages;
  std::optional<std::filesystem::path> plan_d1;
  std::uint64_t plan_d1_size = 2100000;
  std::optional<std::filesystem::path> plan_dx;
  std::uint64_t plan_dx_size = 400000;
  std::optional<std::filesystem::path> plan_d2;
  std::optional<std::filesystem::path> plan_gold;
  std::optional<std::filesystem::path> plan_backtrans;
  StageConfig distant = StageConfig::Defaults(Stage::kDistant);
  StageConfig noisy = StageConfig::Defaults(Stage::kNoisy);
  StageConfig clean = StageConfig::Defaults(Stage::kClean);

  std::optional<std::filesystem::path> baseline_train;
  std::optional<std::filesystem::path> baseline_dev;
  std::optional<std::filesystem::path> baseline_model;
  TrainParams train;
  NgramRange ngrams;
  std::uint32_t buckets = kDefaultBuckets;

  std::optional<std::filesystem::path> eval_model;
  std::optional<std::filesystem::path> eval_data;

  std::vector<std::filesystem::path> ensemble_inputs;
  std::optional<std::filesystem::path> ensemble_output;
  EnsembleOptions ensemble;

  Seeds seeds;

  std::filesystem::path D1Path() const { return output_dir / "d1.jsonl"; }
  std::filesystem::path BalancedD1Path() const {
    return output_dir / "d1.balanced.jsonl";
  }
  std::filesystem::path RefineD1Path() const {
    return refine_d1.value_or(D1Path());
  }
  std::filesystem::path D2Path() const { return output_dir / "d2.jsonl"; }
  std::filesystem::path PlanD2Path() const { return plan_d2.value_or(D2Path()); }
  // Explicit plan.d1, else the extract output when present, else nothing
  // (the manifest then treats D1 as an opaque source of plan_d1_size rows).
  std::optional<std::filesystem::path> PlanD1Path() const;
  std::vector<Stage> PlanStages() const;
  std::filesystem::path BaselineTrainPath() const {
    return baseline_train.value_or(balance_enabled ? BalancedD1Path()
                                                   : D1Path());
  }
  std::filesystem::path BaselineModelPath() const {
    return baseline_model.value_or(output_dir / "baseline.model.json");
  }
  std::filesystem::path EvalModelPath() const {
    return eval_model.value_or(BaselineModelPath());
  }
  std::optional<std::filesystem::path> EvalDataPath() const {
    return eval_data ? eval_data : baseline_dev;
  }
  std::filesystem::path EnsembleOutputPath() const {
    return ensemble_output.value_or(output_dir / "ensemble.jsonl");
  }

  // Canonical JSON the config was parsed from and its FNV-1a digest.
  nlohmann::json source;
  std::string digest;
};

// Every key with its default value; the set of keys is the schema.
nlohmann::json DefaultConfigJson();

// Applies "a.b.c=value" overrides. The value is parsed as JSON when it is
// valid JSON and taken as a string otherwise.
void ApplyOverride(nlohmann::json& config, const std::string& assignment);

// Merges `user` over the defaults, applies overrides and parses. Throws
// ConfigError listing every violation (unknown keys, wrong types, bad
// ranges) at once.
RunConfig BuildRunConfig(const nlohmann::json& user,
                         const std::vector<std::string>& overrides);

// Reads a JSON config file (or uses an empty object when `path` is empty).
RunConfig LoadRunConfig(const std::optional<std::filesystem::path>& path,
                        const std::vector<std::string>& overrides);

// Subcommand-specific checks that input files exist. Throws ConfigError.
void ValidateForCommand(const RunConfig& cfg, const std::string& command);

}  // namespace stance

#endif  // STANCE_CONFIG_H_
