#include "stance/app.h"

#include <chrono>
#include <fstream>
#include <ostream>

#include "stance/hash.h"
#include "stance/refine.h"

namespace stance {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string Dump(const ordered_json& j) {
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

void WriteJsonFile(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << Dump(j) << '\n';
}

std::ofstream OpenOutput(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  return out;
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create directory " + dir.string());
}

std::vector<ConnectivePattern> ResolvePatterns(const RunConfig& cfg) {
  auto patterns = cfg.patterns_path ? LoadPatterns(*cfg.patterns_path)
                                    : DefaultPatterns();
  const auto errors = ValidatePatterns(patterns);
  if (!errors.empty()) throw ConfigError(errors);
  return patterns;
}

// Reads every configured corpus file in order.
class CorpusStream {
 public:
  explicit CorpusStream(const std::vector<CorpusSource>& sources)
      : sources_(sources) {}

  bool Next(Document* doc) {
    while (true) {
      if (!reader_) {
        if (index_ == sources_.size()) return false;
        reader_.emplace(sources_[index_].path, sources_[index_].format);
      }
      if (reader_->Next(doc)) return true;
      Accumulate(reader_->counters());
      reader_.reset();
      ++index_;
    }
  }

  const IngestCounters& totals() const { return totals_; }

 private:
  void Accumulate(const IngestCounters& c) {
    totals_.docs_read += c.docs_read;
    totals_.malformed_lines += c.malformed_lines;
    totals_.empty_skipped += c.empty_skipped;
    totals_.bytes_read += c.bytes_read;
  }

  const std::vector<CorpusSource>& sources_;
  std::size_t index_ = 0;
  std::optional<DocumentReader> reader_;
  IngestCounters totals_;
};

ordered_json IngestJson(const IngestCounters& c) {
  ordered_json j;
  j["docs_read"] = c.docs_read;
  j["malformed_lines"] = c.malformed_lines;
  j["empty_skipped"] = c.empty_skipped;
  j["bytes_read"] = c.bytes_read;
  return j;
}

ordered_json DatasetManifest(const std::string& artifact,
                             const SilverDataset& ds, const RunConfig& cfg,
                             std::uint64_t seed) {
  ordered_json j;
  j["artifact"] = artifact;
  j["config_digest"] = cfg.digest;
  j["seed"] = seed;
  j["total"] = ds.size();
  j["counts"] = CountsToJson(ds.counts());
  j["dataset_digest"] = DatasetDigest(ds);
  return j;
}

struct ExtractResult {
  SilverDataset d1;
  ExtractStats stats;
  IngestCounters ingest;
};

ExtractResult Extract(const RunConfig& cfg, const AppOptions& opts) {
  ExtractConfig ecfg = cfg.extract;
  ecfg.patterns = ResolvePatterns(cfg);
  CorpusStream stream(cfg.corpus);
  ExtractResult r;
  r.d1 = BuildD1([&](Document* d) { return stream.Next(d); }, ecfg,
                 cfg.seeds.extract, opts.threads, cfg.digest, &r.stats);
  r.ingest = stream.totals();
  return r;
}

std::optional<SilverDataset> ReadOptional(const std::optional<fs::path>& path,
                                          DatasetTag tag) {
  if (!path) return std::nullopt;
  return ReadDatasetJsonl(*path, tag);
}

ordered_json SourceJson(const SilverDataset* ds, std::uint64_t size) {
  ordered_json j;
  j["size"] = ds ? ds->size() : size;
  j["opaque"] = ds == nullptr;
  if (ds) {
    j["digest"] = DatasetDigest(*ds);
  } else {
    j["digest"] = nullptr;
  }
  return j;
}

}  // namespace

void RunExtract(const RunConfig& cfg, const AppOptions& opts,
                std::ostream& out) {
  ExtractResult r = Extract(cfg, opts);
  EnsureDir(cfg.output_dir);
  WriteDatasetJsonl(r.d1, cfg.D1Path());

  ordered_json manifest = DatasetManifest("D1", r.d1, cfg, cfg.seeds.extract);
  manifest["ingest"] = IngestJson(r.ingest);
  manifest["extract"] = r.stats.ToJson();
  manifest["patterns"] = PatternsToJson(ResolvePatterns(cfg));
  WriteJsonFile(cfg.output_dir / "d1.manifest.json", manifest);

  ordered_json summary;
  summary["d1"] = {{"path", cfg.D1Path().string()},
                   {"total", r.d1.size()},
                   {"counts", CountsToJson(r.d1.counts())}};
  if (cfg.balance_enabled) {
    if (r.d1.empty()) {
      summary["balanced"] = nullptr;
      summary["warning"] = "no pairs extracted; balancing skipped";
    } else {
      Rng rng(cfg.seeds.balance);
      SilverDataset balanced = Balance(r.d1, rng, cfg.balance_target);
      WriteDatasetJsonl(balanced, cfg.BalancedD1Path());
      ordered_json bm =
          DatasetManifest("D1.balanced", balanced, cfg, cfg.seeds.balance);
      bm["source_digest"] = DatasetDigest(r.d1);
      if (cfg.balance_target) {
        bm["target_per_class"] = *cfg.balance_target;
      } else {
        bm["target_per_class"] = nullptr;
      }
      WriteJsonFile(cfg.output_dir / "d1.balanced.manifest.json", bm);
      summary["balanced"] = {{"path", cfg.BalancedD1Path().string()},
                             {"total", balanced.size()},
                             {"counts", CountsToJson(balanced.counts())}};
    }
  }
  summary["ingest"] = IngestJson(r.ingest);
  out << Dump(summary) << '\n';
}

void RunStats(const RunConfig& cfg, const AppOptions& opts, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ExtractResult r = Extract(cfg, opts);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  ordered_json j;
  j["config_digest"] = cfg.digest;
  j["seed"] = cfg.seeds.extract;
  j["ingest"] = IngestJson(r.ingest);
  j["extract"] = r.stats.ToJson();
  j["counts"] = CountsToJson(r.d1.counts());
  j["threads"] = opts.threads;
  j["elapsed_seconds"] = seconds;
  const double safe = seconds > 0 ? seconds : 1e-9;
  j["docs_per_second"] = static_cast<double>(r.ingest.docs_read) / safe;
  j["megabytes_per_second"] =
      static_cast<double>(r.ingest.bytes_read) / 1e6 / safe;
  out << Dump(j) << '\n';
}

void RunRefine(const RunConfig& cfg, std::ostream& out) {
  const SilverDataset d1 = ReadDatasetJsonl(cfg.RefineD1Path(), DatasetTag::kD1);
  const NliPredictions nli = LoadNliPredictions(*cfg.refine_nli);
  Rng rng(cfg.seeds.refine);
  RefineStats stats;
  const SilverDataset d2 = BuildD2(d1, nli, cfg.extract.filters, cfg.refine_n,
                                   rng, cfg.digest, &stats);
  EnsureDir(cfg.output_dir);
  WriteDatasetJsonl(d2, cfg.D2Path());

  ordered_json m = DatasetManifest("D2", d2, cfg, cfg.seeds.refine);
  m["source_digest"] = DatasetDigest(d1);
  m["n"] = cfg.refine_n;
  m["refine"] = {{"input", stats.input},
                 {"missing_prediction", stats.missing_prediction},
                 {"no_indicator", stats.no_indicator},
                 {"disagree", stats.disagree},
                 {"kept", stats.kept},
                 {"emitted", stats.emitted}};
  m["nli_duplicate_ids"] = nli.duplicate_ids;
  WriteJsonFile(cfg.output_dir / "d2.manifest.json", m);

  ordered_json summary;
  summary["d2"] = {{"path", cfg.D2Path().string()},
                   {"total", d2.size()},
                   {"counts", CountsToJson(d2.counts())}};
  summary["refine"] = m["refine"];
  out << Dump(summary) << '\n';
}

void RunPlan(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = cfg.output_dir / "plan";
  EnsureDir(dir);
  const Rng root(cfg.seeds.plan);
  ordered_json summary;

  for (Stage stage : cfg.PlanStages()) {
    const std::string name(StageName(stage));
    Rng stage_rng = root.Derive(name);
    ordered_json header;
    header["kind"] = "header";
    header["stage"] = name;
    header["config_digest"] = cfg.digest;
    header["seed"] = cfg.seeds.plan;
    header["stage_seed"] = stage_rng.seed();

    const fs::path manifest_path = dir / (name + ".manifest.jsonl");
    if (stage == Stage::kDistant) {
      const auto d1 = ReadOptional(cfg.PlanD1Path(), DatasetTag::kD1);
      const auto dx = ReadOptional(cfg.plan_dx, DatasetTag::kDx);
      const std::uint64_t d1_size = d1 ? d1->size() : cfg.plan_d1_size;
      const std::uint64_t dx_size = dx ? dx->size() : cfg.plan_dx_size;
      auto tickets = PlanDistant(cfg.distant, d1_size, dx_size, stage_rng);
      DecorateStats dstats;
      DecorateTickets(tickets, cfg.distant, d1 ? &*d1 : nullptr,
                      dx ? &*dx : nullptr, stage_rng, &dstats);

      std::uint64_t from_d1 = 0;
      std::uint64_t cmlm = 0;
      for (const auto& t : tickets) {
        from_d1 += t.source == DatasetTag::kD1 ? 1 : 0;
        cmlm += t.objective == Objective::kCondMlm ? 1 : 0;
      }
      header["config"] = cfg.distant.ToJson();
      header["datasets"] = {{"D1", SourceJson(d1 ? &*d1 : nullptr, d1_size)},
                            {"Dx", SourceJson(dx ? &*dx : nullptr, dx_size)}};
      header["tickets"] = tickets.size();
      header["source_counts"] = {{"D1", from_d1},
                                 {"Dx", tickets.size() - from_d1}};
      header["objective_counts"] = {{"classification", tickets.size() - cmlm},
                                    {"cond_mlm", cmlm}};
      header["decoration"] = {{"decorated", dstats.decorated},
                              {"deferred", dstats.deferred},
                              {"skipped_empty", dstats.skipped_empty}};
      std::ofstream mout = OpenOutput(manifest_path);
      mout << header.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)
           << '\n';
      std::string line;
      for (const auto& t : tickets) {
        line.clear();
        AppendTicketJson(t, &line);
        line.push_back('\n');
        mout << line;
      }
      summary[name] = {{"manifest", manifest_path.string()},
                       {"tickets", tickets.size()},
                       {"d1_fraction", tickets.empty()
                                           ? 0.0
                                           : static_cast<double>(from_d1) /
                                                 static_cast<double>(tickets.size())}};
      continue;
    }

    const SilverDataset d2 = ReadDatasetJsonl(cfg.PlanD2Path(), DatasetTag::kD2);
    const SilverDataset gold = ReadDatasetJsonl(*cfg.plan_gold, DatasetTag::kGold);
    const auto backtrans = ReadOptional(cfg.plan_backtrans, DatasetTag::kBacktrans);
    const StageConfig& scfg = stage == Stage::kNoisy ? cfg.noisy : cfg.clean;
    const SilverDataset* bt =
        stage == Stage::kNoisy && backtrans ? &*backtrans : nullptr;
    const StageComposition comp =
        ComposeStage(stage, scfg, d2, gold, bt, stage_rng);

    std::map<std::string, std::uint64_t> by_tag;
    for (const auto& ex : comp.members) ++by_tag[std::string(DatasetTagName(ex.tag))];
    header["config"] = scfg.ToJson();
    ordered_json datasets;
    datasets["D2"] = SourceJson(&d2, 0);
    datasets["gold"] = SourceJson(&gold, 0);
    if (bt) datasets["backtrans"] = SourceJson(bt, 0);
    header["datasets"] = datasets;
    header["members"] = comp.members.size();
    header["members_by_tag"] = by_tag;
    header["noisy_added"] = comp.noisy_added;
    header["objective"] = ObjectiveName(Objective::kClassification);

    std::ofstream mout = OpenOutput(manifest_path);
    mout << header.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)
         << '\n';
    WriteCompositionTickets(comp, mout);
    summary[name] = {{"manifest", manifest_path.string()},
                     {"members", comp.members.size()},
                     {"noisy_added", comp.noisy_added}};
  }
  out << Dump(summary) << '\n';
}

void RunTrainBaseline(const RunConfig& cfg, std::ostream& out) {
  const SilverDataset train = ReadDatasetJsonl(cfg.BaselineTrainPath(), DatasetTag::kD1);
  Rng rng(cfg.seeds.baseline);
  BaselineModel model = Train(train, cfg.train, rng, cfg.ngrams, cfg.buckets);
  model.config_digest = cfg.digest;
  model.seed = cfg.seeds.baseline;
  const fs::path model_path = cfg.BaselineModelPath();
  if (model_path.has_parent_path()) EnsureDir(model_path.parent_path());
  SaveModel(model, model_path);

  ordered_json j;
  j["model"] = model_path.string();
  j["config_digest"] = cfg.digest;
  j["seed"] = cfg.seeds.baseline;
  j["train"] = Evaluate(model, train).ToJson();
  if (cfg.baseline_dev) {
    const SilverDataset dev = ReadDatasetJsonl(*cfg.baseline_dev, DatasetTag::kD1);
    j["dev"] = Evaluate(model, dev).ToJson();
  }
  out << Dump(j) << '\n';
}

void RunEval(const RunConfig& cfg, std::ostream& out) {
  const BaselineModel model = LoadModel(cfg.EvalModelPath());
  const SilverDataset data = ReadDatasetJsonl(*cfg.EvalDataPath(), DatasetTag::kD1);
  ordered_json j;
  j["model"] = cfg.EvalModelPath().string();
  j["model_config_digest"] = model.config_digest;
  j["config_digest"] = cfg.digest;
  j["seed"] = model.seed;
  j["metrics"] = Evaluate(model, data).ToJson();
  EnsureDir(cfg.output_dir);
  WriteJsonFile(cfg.output_dir / "eval.metrics.json", j);
  out << Dump(j) << '\n';
}

void RunEnsemble(const RunConfig& cfg, std::ostream& out) {
  std::vector<ProbabilityMatrix> matrices;
  for (const auto& p : cfg.ensemble_inputs) matrices.push_back(LoadProbabilityMatrix(p));
  const auto rows = CombineAndDecide(matrices, cfg.ensemble);
  const fs::path path = cfg.EnsembleOutputPath();
  if (path.has_parent_path()) EnsureDir(path.parent_path());
  {
    std::ofstream f = OpenOutput(path);
    WriteEnsembleJsonl(rows, f);
  }
  ordered_json m;
  m["artifact"] = "ensemble";
  m["config_digest"] = cfg.digest;
  m["models"] = matrices.size();
  m["rows"] = rows.size();
  m["normalize"] = cfg.ensemble.normalize;
  m["clamp"] = cfg.ensemble.clamp;
  m["floor"] = cfg.ensemble.floor;
  fs::path manifest = path;
  manifest += ".manifest.json";
  WriteJsonFile(manifest, m);
  out << Dump({{"output", path.string()}, {"rows", rows.size()}}) << '\n';
}

std::string ErrorObject(const std::exception& e) {
  ordered_json err;
  std::string kind = "internal";
  std::vector<std::string> violations;
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
    kind = ce->kind();
    violations = ce->violations();
  } else if (const auto* se = dynamic_cast<const Error*>(&e)) {
    kind = se->kind();
  }
  err["kind"] = kind;
  err["message"] = e.what();
  err["violations"] = violations;
  ordered_json j;
  j["error"] = std::move(err);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

int RunCommand(const std::string& command, const RunConfig& cfg,
               const AppOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    ValidateForCommand(cfg, command);
    if (command == "extract") {
      RunExtract(cfg, opts, out);
    } else if (command == "stats") {
      RunStats(cfg, opts, out);
    } else if (command == "refine") {
      RunRefine(cfg, out);
    } else if (command == "plan") {
      RunPlan(cfg, out);
    } else if (command == "train-baseline") {
      RunTrainBaseline(cfg, out);
    } else if (command == "eval") {
      RunEval(cfg, out);
    } else if (command == "ensemble") {
      RunEnsemble(cfg, out);
    } else {
      throw Error("usage", "unknown command: " + command);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << ErrorObject(e) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << ErrorObject(e) << '\n';
    return 1;
  }
}

}  // namespace stance
