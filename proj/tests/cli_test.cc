// Drives the stance binary end to end.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <tuple>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "stance_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result Invoke(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(STANCE_CLI_PATH) + " " + args + " > " +
                          (dir / "stdout").string() + " 2> " + (dir / "stderr").string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WEXITSTATUS(status);
  r.out = Slurp(dir / "stdout");
  r.err = Slurp(dir / "stderr");
  return r;
}

std::vector<json> ReadJsonl(const fs::path& p) {
  std::vector<json> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) rows.push_back(json::parse(line));
  return rows;
}

const std::string kDemo = std::string(STANCE_DEMO_DIR) + "/demo.jsonl";

TEST(Cli, ExtractDemoCorpus) {
  const auto dir = Scratch("extract");
  const auto r = Invoke("extract -i " + kDemo + " -f jsonl -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = ReadJsonl(dir / "d1.jsonl");
  std::set<std::tuple<std::string, std::string, std::string>> got;
  for (const auto& j : rows) got.emplace(j["label"], j["topic"], j["claim"]);
  const std::set<std::tuple<std::string, std::string, std::string>> want = {
      {"Support", "大数据带来了更多的好处", "生成的大数据可作为预测工具和预防策略"},
      {"Against", "大数据带来了更多的好处", "大数据的准确性难以确保"}};
  EXPECT_EQ(got, want);
  const auto manifest = json::parse(Slurp(dir / "d1.manifest.json"));
  EXPECT_EQ(manifest["seed"], 1);
  EXPECT_EQ(manifest["config_digest"].get<std::string>().size(), 16u);
  EXPECT_EQ(manifest["ingest"]["docs_read"], 2);
}

TEST(Cli, PlanHeaderRecordsDefaults) {
  const auto dir = Scratch("plan");
  const auto r = Invoke("plan -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "plan" / "distant.manifest.jsonl");
  std::string line;
  std::getline(in, line);
  const auto header = json::parse(line);
  EXPECT_EQ(header["kind"], "header");
  EXPECT_EQ(header["config"]["total_steps"], 58500);
  EXPECT_EQ(header["config"]["batch_size"], 8);
  EXPECT_EQ(header["config"]["grad_accum"], 4);
  EXPECT_EQ(header["tickets"], 58500);
  std::size_t tickets = 0;
  while (std::getline(in, line)) ++tickets;
  EXPECT_EQ(tickets, 58500u);
}

TEST(Cli, EnsembleSingleInputIsIdentity) {
  const auto dir = Scratch("ensemble");
  std::ofstream(dir / "m.csv") << "example_id,p_support,p_against,p_neutral\n"
                                   "a,0.5,0.25,0.25\nb,0.125,0.625,0.25\n";
  const auto r = Invoke("ensemble " + (dir / "m.csv").string() + " -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = ReadJsonl(dir / "ensemble.jsonl");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0]["example_id"], "a");
  EXPECT_EQ(rows[0]["p_final"], json::parse("[0.5,0.25,0.25]"));
  EXPECT_EQ(rows[0]["label"], "Support");
  EXPECT_EQ(rows[1]["p_final"], json::parse("[0.125,0.625,0.25]"));
  EXPECT_EQ(rows[1]["label"], "Against");
}

TEST(Cli, ConfigErrorsAreMachineReadable) {
  const auto dir = Scratch("errors");
  const auto r = Invoke("--set filters.max_chars=0 --set bogus=1 refine -o " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  const auto err = json::parse(r.err);
  EXPECT_EQ(err["error"]["kind"], "config");
  EXPECT_GE(err["error"]["violations"].size(), 2u);
}

TEST(Cli, MissingInputFails) {
  const auto dir = Scratch("missing");
  const auto r = Invoke("extract -i /nonexistent.txt -o " + dir.string(), dir);
  EXPECT_NE(r.code, 0);
  EXPECT_TRUE(json::parse(r.err).contains("error"));
}

TEST(Cli, PipelineRefineTrainEval) {
  const auto dir = Scratch("pipeline");
  ASSERT_EQ(Invoke("extract -i " + kDemo + " -f jsonl -o " + dir.string(), dir).code, 0);
  std::ofstream nli(dir / "nli.jsonl");
  for (const auto& j : ReadJsonl(dir / "d1.jsonl")) {
    nli << json{{"id", j["id"]},
                {"nli_label", j["label"] == "Support" ? "Entailment" : "Contradiction"}}
               .dump()
        << "\n";
  }
  nli.close();
  auto r = Invoke("refine --nli " + (dir / "nli.jsonl").string() + " -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  // Both demo topics carry 更, so both rows survive.
  EXPECT_EQ(ReadJsonl(dir / "d2.jsonl").size(), 2u);
  r = Invoke("train-baseline --train " + (dir / "d1.jsonl").string() + " -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  r = Invoke("eval --data " + (dir / "d1.jsonl").string() + " -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto metrics = json::parse(r.out);
  EXPECT_DOUBLE_EQ(metrics["metrics"]["accuracy"].get<double>(), 1.0);
  r = Invoke("stats -i " + kDemo + " -f jsonl -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out).contains("docs_per_second"));
}

}  // namespace
