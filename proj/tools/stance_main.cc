// Command-line entry point: stance <command> [options].

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stance/app.h"

namespace {

using nlohmann::json;

struct Flags {
  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 1;
  std::string out_dir;

  std::vector<std::string> inputs;
  std::string format = "plain";
  std::string patterns;

  std::string d1, dx, d2, nli, gold, backtrans, train, dev, model, data, output;
  std::optional<std::uint64_t> n, d1_size, dx_size;
  std::vector<std::string> stages;
  bool no_normalize = false;
  bool no_clamp = false;
};

std::string Set(const std::string& key, const json& value) {
  return key + "=" + value.dump();
}

std::vector<std::string> CollectOverrides(const std::string& command,
                                          const Flags& f) {
  std::vector<std::string> o;
  if (!f.out_dir.empty()) o.push_back(Set("output_dir", f.out_dir));
  auto path = [&](const std::string& key, const std::string& value) {
    if (!value.empty()) o.push_back(Set(key, value));
  };
  if (command == "extract" || command == "stats") {
    if (!f.inputs.empty()) {
      json corpus = json::array();
      for (const auto& i : f.inputs) corpus.push_back({{"path", i}, {"format", f.format}});
      o.push_back(Set("corpus", corpus));
    }
    path("patterns", f.patterns);
  } else if (command == "refine") {
    path("refine.d1", f.d1);
    path("refine.nli", f.nli);
    if (f.n) o.push_back(Set("refine.n", *f.n));
  } else if (command == "plan") {
    path("plan.d1", f.d1);
    path("plan.dx", f.dx);
    path("plan.d2", f.d2);
    path("plan.gold", f.gold);
    path("plan.backtrans", f.backtrans);
    if (f.d1_size) o.push_back(Set("plan.d1_size", *f.d1_size));
    if (f.dx_size) o.push_back(Set("plan.dx_size", *f.dx_size));
    if (!f.stages.empty()) o.push_back(Set("plan.stages", f.stages));
  } else if (command == "train-baseline") {
    path("baseline.train", f.train);
    path("baseline.dev", f.dev);
    path("baseline.model", f.model);
  } else if (command == "eval") {
    path("eval.model", f.model);
    path("eval.data", f.data);
  } else if (command == "ensemble") {
    if (!f.inputs.empty()) o.push_back(Set("ensemble.inputs", f.inputs));
    path("ensemble.output", f.output);
    if (f.no_normalize) o.push_back(Set("ensemble.normalize", false));
    if (f.no_clamp) o.push_back(Set("ensemble.clamp", false));
  }
  // Explicit --set assignments win over the shorthand flags.
  o.insert(o.end(), f.overrides.begin(), f.overrides.end());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Silver-data mining for stance classification: connective extraction, "
      "NLI-agreement refinement, training-schedule manifests, a baseline "
      "classifier and a product-of-probabilities ensembler."};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("-c,--config", f.config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option("--set", f.overrides,
                 "Override a config key: dotted.key=value (repeatable)");
  app.add_option("-j,--threads", f.threads, "Worker threads (output is identical for any value)")
      ->check(CLI::PositiveNumber);
  app.add_option("-o,--out", f.out_dir, "Output directory (config: output_dir)");

  auto* extract = app.add_subcommand("extract", "Build D1 (and its balanced version) from a corpus");
  auto* stats = app.add_subcommand("stats", "Count documents, matches and rejections; report throughput");
  for (auto* sub : {extract, stats}) {
    sub->add_option("-i,--input", f.inputs, "Corpus file (repeatable)");
    sub->add_option("-f,--format", f.format, "Corpus format")
        ->check(CLI::IsMember({"plain", "jsonl"}));
    sub->add_option("--patterns", f.patterns, "Connective pattern JSON file");
  }

  auto* refine = app.add_subcommand("refine", "Build D2 by NLI agreement and topic indicators");
  refine->add_option("--d1", f.d1, "D1 JSONL (default: <out>/d1.jsonl)");
  refine->add_option("--nli", f.nli, "NLI predictions JSONL {id, nli_label}");
  refine->add_option("-n,--size", f.n, "Number of examples to draw (default 30000)");

  auto* plan = app.add_subcommand("plan", "Emit distant / noisy / clean stage manifests");
  plan->add_option("--d1", f.d1, "D1 JSONL for the distant stage");
  plan->add_option("--d1-size", f.d1_size, "Size of D1 when no file is given");
  plan->add_option("--dx", f.dx, "Dx JSONL (optional)");
  plan->add_option("--dx-size", f.dx_size, "Size of the opaque Dx source");
  plan->add_option("--d2", f.d2, "D2 JSONL (default: <out>/d2.jsonl)");
  plan->add_option("--gold", f.gold, "Gold training set JSONL");
  plan->add_option("--backtrans", f.backtrans, "Back-translated gold JSONL");
  plan->add_option("--stage", f.stages, "Stages to emit (repeatable)")
      ->check(CLI::IsMember({"distant", "noisy", "clean"}));

  auto* train = app.add_subcommand("train-baseline", "Train the character n-gram classifier");
  train->add_option("--train", f.train, "Training JSONL (default: balanced D1)");
  train->add_option("--dev", f.dev, "Development JSONL");
  train->add_option("--model", f.model, "Model output path");

  auto* eval = app.add_subcommand("eval", "Evaluate a baseline model; prints a JSON metrics object");
  eval->add_option("--model", f.model, "Model file");
  eval->add_option("--data", f.data, "Labeled JSONL");

  auto* ensemble = app.add_subcommand("ensemble", "Combine per-model probabilities by product");
  ensemble->add_option("inputs", f.inputs, "Prediction files (.csv or .jsonl)");
  ensemble->add_option("--output", f.output, "Output JSONL");
  ensemble->add_flag("--no-normalize", f.no_normalize, "Keep the raw product");
  ensemble->add_flag("--no-clamp", f.no_clamp, "Do not floor probabilities at 1e-12");

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<std::filesystem::path> config_path;
  if (!f.config_path.empty()) config_path = f.config_path;

  stance::RunConfig cfg;
  try {
    cfg = stance::LoadRunConfig(config_path, CollectOverrides(command, f));
  } catch (const std::exception& e) {
    std::cerr << stance::ErrorObject(e) << '\n';
    return 2;
  }
  stance::AppOptions opts;
  opts.threads = f.threads;
  return stance::RunCommand(command, cfg, opts, std::cout, std::cerr);
}
