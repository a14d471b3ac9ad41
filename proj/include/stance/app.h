#ifndef STANCE_APP_H_
#define STANCE_APP_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "stance/config.h"

namespace stance {

inline const std::vector<std::string> kCommands = {
    "extract", "refine", "plan", "train-baseline", "eval", "ensemble", "stats"};

struct AppOptions {
  int threads = 1;
};

// Each command writes its artifacts under cfg.output_dir and a JSON summary
// to `out`. Failures throw stance::Error.
void RunExtract(const RunConfig& cfg, const AppOptions& opts, std::ostream& out);
void RunStats(const RunConfig& cfg, const AppOptions& opts, std::ostream& out);
void RunRefine(const RunConfig& cfg, std::ostream& out);
void RunPlan(const RunConfig& cfg, std::ostream& out);
void RunTrainBaseline(const RunConfig& cfg, std::ostream& out);
void RunEval(const RunConfig& cfg, std::ostream& out);
void RunEnsemble(const RunConfig& cfg, std::ostream& out);

// Validates and dispatches. Returns the process exit code; on failure a
// single-line JSON object {"error": {kind, message, violations}} goes to
// `err`.
int RunCommand(const std::string& command, const RunConfig& cfg,
               const AppOptions& opts, std::ostream& out, std::ostream& err);

// Formats an exception as the CLI's machine-readable error object.
std::string ErrorObject(const std::exception& e);

}  // namespace stance

#endif  // STANCE_APP_H_
