#ifndef STANCE_ENSEMBLE_H_
#define STANCE_ENSEMBLE_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stance/baseline.h"
#include "stance/types.h"

namespace stance {

// Class probabilities of one model, keyed by example id. Columns follow the
// fixed label order Support, Against, Neutral.
struct ProbabilityMatrix {
  std::string model_id;
  std::map<std::string, ProbabilityVector> rows;
};

struct EnsembleOptions {
  bool normalize = true;
  // Floors each probability at `floor` before multiplying, so one model's
  // hard zero cannot veto a class on its own. Off gives the plain product.
  bool clamp = true;
  double floor = 1e-12;
  // Allowed deviation of an input row sum from 1.
  double row_tolerance = 1e-6;
};

struct EnsembleRow {
  std::string example_id;
  ProbabilityVector p_final{};
  Label label = Label::kSupport;
};

// First maximum in label order, so ties resolve Support < Against < Neutral.
Label ArgmaxLabel(const ProbabilityVector& p);

// Elementwise product of all models' rows, optionally renormalized, with the
// argmax label. Rows come out sorted by example id. Throws
// stance::Error("ensemble") when the matrices cover different ids (the
// message lists the symmetric difference) or a row is not a distribution.
std::vector<EnsembleRow> CombineAndDecide(
    std::span<const ProbabilityMatrix> matrices,
    const EnsembleOptions& options = {});

// CSV (example_id,p_support,p_against,p_neutral; optional header) when the
// extension is .csv, otherwise JSONL with the same field names.
ProbabilityMatrix LoadProbabilityMatrix(const std::filesystem::path& path);
ProbabilityMatrix ParseProbabilityCsv(std::istream& in, std::string model_id);
ProbabilityMatrix ParseProbabilityJsonl(std::istream& in, std::string model_id);

// JSONL {example_id, p_final[3], label}.
void WriteEnsembleJsonl(const std::vector<EnsembleRow>& rows, std::ostream& out);

}  // namespace stance

#endif  // STANCE_ENSEMBLE_H_
