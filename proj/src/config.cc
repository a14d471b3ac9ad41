#include "stance/config.h"

#include <fstream>
#include <limits>

#include "stance/hash.h"

namespace stance {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string JoinViolations(const std::vector<std::string>& v) {
  std::string out = "invalid configuration:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

json StageJson(const StageConfig& c) {
  json j;
  j["total_steps"] = c.total_steps;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["grad_accum"] = c.grad_accum;
  j["d1_mix_probability"] = c.d1_mix_probability;
  j["objective_probability"] = c.objective_probability;
  j["mask_rate"] = c.mask_rate;
  j["learning_rate"] = c.learning_rate;
  j["noisy_fraction_clean_stage"] = c.noisy_fraction_clean_stage;
  j["noisy_count_override"] = nullptr;
  j["reinit_head"] = c.reinit_head;
  return j;
}

// Reports keys of `user` that have no counterpart in `schema`. Objects in
// the schema are recursed into; every other value is a leaf.
void FindUnknownKeys(const json& schema, const json& user,
                     const std::string& prefix,
                     std::vector<std::string>* violations) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.contains(key)) {
      violations->push_back(path + ": unknown key");
    } else if (schema[key].is_object() && value.is_object()) {
      FindUnknownKeys(schema[key], value, path, violations);
    }
  }
}

// Typed field access that records a violation instead of throwing.
class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  const json* Find(const std::string& dotted) const {
    const json* node = &root_;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = dotted.find('.', start);
      const std::string key = dotted.substr(start, dot - start);
      if (!node->is_object() || !node->contains(key)) return nullptr;
      node = &(*node)[key];
      if (dot == std::string::npos) return node;
      start = dot + 1;
    }
  }

  template <typename T>
  void Get(const std::string& key, T* out) {
    const json* v = Find(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v->is_number_integer()) throw std::invalid_argument("integer");
        if (v->is_number_unsigned()) {
          if (v->get<std::uint64_t>() >
              static_cast<std::uint64_t>(std::numeric_limits<T>::max()))
            throw std::invalid_argument("integer in range");
        } else if (v->get<std::int64_t>() < 0) {
          throw std::invalid_argument("non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw std::invalid_argument("boolean");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw std::invalid_argument("number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw std::invalid_argument("string");
      }
      *out = v->get<T>();
    } catch (const std::invalid_argument& e) {
      violations_.push_back(key + ": expected " + e.what());
    } catch (const json::exception&) {
      violations_.push_back(key + ": wrong type");
    }
  }

  void GetStrings(const std::string& key, std::vector<std::string>* out) {
    const json* v = Find(key);
    if (v == nullptr) return;
    if (!v->is_array()) {
      violations_.push_back(key + ": expected a list of strings");
      return;
    }
    std::vector<std::string> items;
    for (const auto& item : *v) {
      if (!item.is_string()) {
        violations_.push_back(key + ": expected a list of strings");
        return;
      }
      items.push_back(item.get<std::string>());
    }
    *out = std::move(items);
  }

  template <typename T>
  void GetOptional(const std::string& key, std::optional<T>* out) {
    const json* v = Find(key);
    if (v == nullptr || v->is_null()) {
      out->reset();
      return;
    }
    T value{};
    const std::size_t before = violations_.size();
    Get(key, &value);
    if (violations_.size() == before) *out = value;
  }

  void GetPath(const std::string& key, std::optional<fs::path>* out) {
    std::optional<std::string> s;
    GetOptional(key, &s);
    if (s) {
      *out = fs::path(*s);
    } else {
      out->reset();
    }
  }

  void Violation(std::string v) { violations_.push_back(std::move(v)); }
  std::vector<std::string>& violations() { return violations_; }

 private:
  const json& root_;
  std::vector<std::string> violations_;
};

void ReadStage(Reader& r, const std::string& prefix, StageConfig* c) {
  r.Get(prefix + ".total_steps", &c->total_steps);
  r.Get(prefix + ".epochs", &c->epochs);
  r.Get(prefix + ".batch_size", &c->batch_size);
  r.Get(prefix + ".grad_accum", &c->grad_accum);
  r.Get(prefix + ".d1_mix_probability", &c->d1_mix_probability);
  r.Get(prefix + ".objective_probability", &c->objective_probability);
  r.Get(prefix + ".mask_rate", &c->mask_rate);
  r.Get(prefix + ".learning_rate", &c->learning_rate);
  r.Get(prefix + ".noisy_fraction_clean_stage", &c->noisy_fraction_clean_stage);
  r.GetOptional(prefix + ".noisy_count_override", &c->noisy_count_override);
  r.Get(prefix + ".reinit_head", &c->reinit_head);
  for (auto& v : c->Validate()) r.Violation(std::move(v));
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error("config", JoinViolations(violations)),
      violations_(std::move(violations)) {}

std::optional<fs::path> RunConfig::PlanD1Path() const {
  if (plan_d1) return plan_d1;
  const fs::path derived = balance_enabled ? BalancedD1Path() : D1Path();
  if (fs::exists(derived)) return derived;
  return std::nullopt;
}

std::vector<Stage> RunConfig::PlanStages() const {
  if (plan_stages) return *plan_stages;
  if (plan_gold) return {Stage::kDistant, Stage::kNoisy, Stage::kClean};
  return {Stage::kDistant};
}

json DefaultConfigJson() {
  const FilterConfig filters;
  const SegmenterOptions seg;
  const MatcherOptions matcher;
  const NeutralConfig neutral;
  const TrainParams train;
  const NgramRange ngrams;
  const EnsembleOptions ens;
  const Seeds seeds;
  json j;
  j["output_dir"] = "out";
  j["corpus"] = json::array();
  j["patterns"] = nullptr;
  j["segment"] = {{"terminators", seg.terminators},
                  {"fragment_delimiter", seg.fragment_delimiter}};
  j["matcher"] = {{"max_head_offset_chars", matcher.max_head_offset_chars}};
  j["filters"] = {{"max_chars", filters.max_chars},
                  {"pronouns", filters.pronouns},
                  {"allowed_punctuation", filters.allowed_punctuation},
                  {"topic_indicators", filters.topic_indicators}};
  j["neutral"] = {{"per_pair", neutral.per_pair}, {"window", neutral.window}};
  j["balance"] = {{"enabled", true}, {"target_per_class", nullptr}};
  j["refine"] = {{"d1", nullptr}, {"nli", nullptr}, {"n", 30000}};
  j["plan"] = {{"stages", nullptr}, {"d1", nullptr},   {"d1_size", 2100000},
               {"dx", nullptr},     {"dx_size", 400000}, {"d2", nullptr},
               {"gold", nullptr},   {"backtrans", nullptr}};
  j["schedule"] = {
      {"distant", StageJson(StageConfig::Defaults(Stage::kDistant))},
      {"noisy", StageJson(StageConfig::Defaults(Stage::kNoisy))},
      {"clean", StageJson(StageConfig::Defaults(Stage::kClean))}};
  j["baseline"] = {{"train", nullptr},
                   {"dev", nullptr},
                   {"model", nullptr},
                   {"epochs", train.epochs},
                   {"learning_rate", train.learning_rate},
                   {"l2", train.l2},
                   {"ngram_min", ngrams.min_n},
                   {"ngram_max", ngrams.max_n},
                   {"buckets", kDefaultBuckets}};
  j["eval"] = {{"model", nullptr}, {"data", nullptr}};
  j["ensemble"] = {{"inputs", json::array()},
                   {"output", nullptr},
                   {"normalize", ens.normalize},
                   {"clamp", ens.clamp},
                   {"floor", ens.floor}};
  j["seeds"] = {{"extract", seeds.extract},
                {"balance", seeds.balance},
                {"refine", seeds.refine},
                {"plan", seeds.plan},
                {"baseline", seeds.baseline}};
  return j;
}

void ApplyOverride(json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError({"override '" + assignment + "': expected key=value"});
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty())
      throw ConfigError({"override '" + assignment + "': empty key segment"});
    if (!node->is_object()) *node = json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

RunConfig BuildRunConfig(const json& user,
                         const std::vector<std::string>& overrides) {
  const json defaults = DefaultConfigJson();
  std::vector<std::string> violations;
  if (!user.is_object()) {
    throw ConfigError({"config: top level must be a JSON object"});
  }
  json merged = user;
  for (const auto& o : overrides) ApplyOverride(merged, o);
  FindUnknownKeys(defaults, merged, "", &violations);
  json full = defaults;
  full.merge_patch(merged);
  // merge_patch drops explicit nulls; restore keys so the schema stays whole.
  for (const auto& [k, v] : defaults.items()) {
    if (!full.contains(k)) full[k] = v;
    if (v.is_object()) {
      for (const auto& [k2, v2] : v.items()) {
        if (!full[k].contains(k2)) full[k][k2] = v2;
      }
    }
  }

  RunConfig cfg;
  Reader r(full);
  r.violations() = violations;

  std::string out_dir;
  r.Get("output_dir", &out_dir);
  cfg.output_dir = out_dir;

  if (const json* corpus = r.Find("corpus")) {
    if (!corpus->is_array()) {
      r.Violation("corpus: expected a list of {path, format}");
    } else {
      for (std::size_t i = 0; i < corpus->size(); ++i) {
        const json& item = (*corpus)[i];
        const std::string where = "corpus[" + std::to_string(i) + "]";
        if (!item.is_object() || !item.contains("path") ||
            !item["path"].is_string()) {
          r.Violation(where + ": expected {\"path\": string, \"format\": plain|jsonl}");
          continue;
        }
        CorpusSource src;
        src.path = item["path"].get<std::string>();
        const std::string fmt =
            item.contains("format") && item["format"].is_string()
                ? item["format"].get<std::string>()
                : "plain";
        const auto parsed = ParseCorpusFormat(fmt);
        if (!parsed) {
          r.Violation(where + ".format: must be plain or jsonl");
          continue;
        }
        src.format = *parsed;
        cfg.corpus.push_back(std::move(src));
      }
    }
  }
  r.GetPath("patterns", &cfg.patterns_path);

  r.GetStrings("segment.terminators", &cfg.extract.segmenter.terminators);
  r.Get("segment.fragment_delimiter", &cfg.extract.segmenter.fragment_delimiter);
  cfg.extract.matcher.fragment_delimiter = cfg.extract.segmenter.fragment_delimiter;
  if (cfg.extract.segmenter.terminators.empty())
    r.Violation("segment.terminators: must be non-empty");
  r.Get("matcher.max_head_offset_chars", &cfg.extract.matcher.max_head_offset_chars);

  FilterConfig& f = cfg.extract.filters;
  r.Get("filters.max_chars", &f.max_chars);
  r.GetStrings("filters.pronouns", &f.pronouns);
  r.Get("filters.allowed_punctuation", &f.allowed_punctuation);
  r.GetStrings("filters.topic_indicators", &f.topic_indicators);
  for (auto& v : f.Validate()) r.Violation(std::move(v));

  r.Get("neutral.per_pair", &cfg.extract.neutral.per_pair);
  r.Get("neutral.window", &cfg.extract.neutral.window);
  if (cfg.extract.neutral.window < 1) r.Violation("neutral.window: must be >= 1");

  r.Get("balance.enabled", &cfg.balance_enabled);
  r.GetOptional("balance.target_per_class", &cfg.balance_target);

  r.GetPath("refine.d1", &cfg.refine_d1);
  r.GetPath("refine.nli", &cfg.refine_nli);
  r.Get("refine.n", &cfg.refine_n);
  if (cfg.refine_n < 1) r.Violation("refine.n: must be >= 1");

  if (const json* stages = r.Find("plan.stages"); stages && !stages->is_null()) {
    std::vector<std::string> names;
    r.GetStrings("plan.stages", &names);
    std::vector<Stage> parsed;
    for (const auto& n : names) {
      if (auto s = ParseStage(n)) {
        parsed.push_back(*s);
      } else {
        r.Violation("plan.stages: unknown stage '" + n + "'");
      }
    }
    cfg.plan_stages = parsed;
  }
  r.GetPath("plan.d1", &cfg.plan_d1);
  r.Get("plan.d1_size", &cfg.plan_d1_size);
  r.GetPath("plan.dx", &cfg.plan_dx);
  r.Get("plan.dx_size", &cfg.plan_dx_size);
  r.GetPath("plan.d2", &cfg.plan_d2);
  r.GetPath("plan.gold", &cfg.plan_gold);
  r.GetPath("plan.backtrans", &cfg.plan_backtrans);
  ReadStage(r, "schedule.distant", &cfg.distant);
  ReadStage(r, "schedule.noisy", &cfg.noisy);
  ReadStage(r, "schedule.clean", &cfg.clean);

  r.GetPath("baseline.train", &cfg.baseline_train);
  r.GetPath("baseline.dev", &cfg.baseline_dev);
  r.GetPath("baseline.model", &cfg.baseline_model);
  r.Get("baseline.epochs", &cfg.train.epochs);
  r.Get("baseline.learning_rate", &cfg.train.learning_rate);
  r.Get("baseline.l2", &cfg.train.l2);
  r.Get("baseline.ngram_min", &cfg.ngrams.min_n);
  r.Get("baseline.ngram_max", &cfg.ngrams.max_n);
  r.Get("baseline.buckets", &cfg.buckets);
  if (cfg.ngrams.min_n < 1 || cfg.ngrams.max_n < cfg.ngrams.min_n)
    r.Violation("baseline.ngram_min/ngram_max: need 1 <= ngram_min <= ngram_max");
  if (cfg.buckets < 1) r.Violation("baseline.buckets: must be >= 1");
  if (!(cfg.train.learning_rate > 0.0))
    r.Violation("baseline.learning_rate: must be > 0");
  if (!(cfg.train.l2 >= 0.0)) r.Violation("baseline.l2: must be >= 0");

  r.GetPath("eval.model", &cfg.eval_model);
  r.GetPath("eval.data", &cfg.eval_data);

  std::vector<std::string> inputs;
  r.GetStrings("ensemble.inputs", &inputs);
  for (const auto& i : inputs) cfg.ensemble_inputs.emplace_back(i);
  r.GetPath("ensemble.output", &cfg.ensemble_output);
  r.Get("ensemble.normalize", &cfg.ensemble.normalize);
  r.Get("ensemble.clamp", &cfg.ensemble.clamp);
  r.Get("ensemble.floor", &cfg.ensemble.floor);
  if (!(cfg.ensemble.floor >= 0.0)) r.Violation("ensemble.floor: must be >= 0");

  r.Get("seeds.extract", &cfg.seeds.extract);
  r.Get("seeds.balance", &cfg.seeds.balance);
  r.Get("seeds.refine", &cfg.seeds.refine);
  r.Get("seeds.plan", &cfg.seeds.plan);
  r.Get("seeds.baseline", &cfg.seeds.baseline);
  for (const char* s : {"extract", "balance", "refine", "plan", "baseline"}) {
    const json* v = r.Find(std::string("seeds.") + s);
    if (v == nullptr || v->is_null())
      r.Violation(std::string("seeds.") + s + ": must be set explicitly");
  }

  if (!r.violations().empty()) throw ConfigError(r.violations());
  cfg.source = full;
  // The output location does not influence any artifact's content.
  json digested = full;
  digested.erase("output_dir");
  cfg.digest = ToHex16(Fnv1a64(digested.dump()));
  return cfg;
}

RunConfig LoadRunConfig(const std::optional<fs::path>& path,
                        const std::vector<std::string>& overrides) {
  json user = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError({"config: cannot open " + path->string()});
    user = json::parse(in, nullptr, false);
    if (user.is_discarded())
      throw ConfigError({"config: " + path->string() + " is not valid JSON"});
  }
  return BuildRunConfig(user, overrides);
}

void ValidateForCommand(const RunConfig& cfg, const std::string& command) {
  std::vector<std::string> v;
  auto need = [&](const std::optional<fs::path>& p, const std::string& key) {
    if (!p) {
      v.push_back(key + ": required for '" + command + "'");
    } else if (!fs::exists(*p)) {
      v.push_back(key + ": file not found: " + p->string());
    }
  };
  auto need_path = [&](const fs::path& p, const std::string& key) {
    need(std::optional<fs::path>(p), key);
  };
  auto maybe = [&](const std::optional<fs::path>& p, const std::string& key) {
    if (p && !fs::exists(*p)) v.push_back(key + ": file not found: " + p->string());
  };

  if (command == "extract" || command == "stats") {
    if (cfg.corpus.empty()) v.push_back("corpus: at least one input is required");
    for (std::size_t i = 0; i < cfg.corpus.size(); ++i) {
      if (!fs::exists(cfg.corpus[i].path))
        v.push_back("corpus[" + std::to_string(i) +
                    "].path: file not found: " + cfg.corpus[i].path.string());
    }
    maybe(cfg.patterns_path, "patterns");
  } else if (command == "refine") {
    need_path(cfg.RefineD1Path(), "refine.d1");
    need(cfg.refine_nli, "refine.nli");
  } else if (command == "plan") {
    maybe(cfg.plan_d1, "plan.d1");
    maybe(cfg.plan_dx, "plan.dx");
    maybe(cfg.plan_backtrans, "plan.backtrans");
    bool later = false;
    for (Stage s : cfg.PlanStages()) later |= s != Stage::kDistant;
    if (later) {
      need(cfg.plan_gold, "plan.gold");
      need_path(cfg.PlanD2Path(), "plan.d2");
    }
  } else if (command == "train-baseline") {
    need_path(cfg.BaselineTrainPath(), "baseline.train");
    maybe(cfg.baseline_dev, "baseline.dev");
  } else if (command == "eval") {
    need_path(cfg.EvalModelPath(), "eval.model");
    need(cfg.EvalDataPath(), "eval.data");
  } else if (command == "ensemble") {
    if (cfg.ensemble_inputs.empty())
      v.push_back("ensemble.inputs: at least one prediction file is required");
    for (const auto& p : cfg.ensemble_inputs) {
      if (!fs::exists(p)) v.push_back("ensemble.inputs: file not found: " + p.string());
    }
  }
  if (!v.empty()) throw ConfigError(v);
}

}  // namespace stance
