#include "stance/ensemble.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace stance {

namespace {

void CheckRow(const ProbabilityMatrix& m, const std::string& id,
              const ProbabilityVector& p, double tolerance) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error("ensemble", "model " + m.model_id + ", example " + id +
                                  ": probabilities must be finite and >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw Error("ensemble", "model " + m.model_id + ", example " + id +
                                ": row sums to " + std::to_string(sum));
  }
}

std::string SymmetricDifference(const ProbabilityMatrix& a,
                                const ProbabilityMatrix& b) {
  std::vector<std::string> diff;
  for (const auto& [id, _] : a.rows) {
    if (!b.rows.count(id)) diff.push_back(id);
  }
  for (const auto& [id, _] : b.rows) {
    if (!a.rows.count(id)) diff.push_back(id);
  }
  std::sort(diff.begin(), diff.end());
  std::string out;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    if (i == 20) {
      out += ", ... (" + std::to_string(diff.size()) + " total)";
      break;
    }
    if (i) out += ", ";
    out += diff[i];
  }
  return out;
}

double ParseDouble(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t'))
    s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("format", where + ": bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

Label ArgmaxLabel(const ProbabilityVector& p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumLabels; ++c) {
    if (p[c] > p[best]) best = c;
  }
  return kAllLabels[best];
}

std::vector<EnsembleRow> CombineAndDecide(
    std::span<const ProbabilityMatrix> matrices,
    const EnsembleOptions& options) {
  if (matrices.empty()) throw Error("ensemble", "need at least one model");
  const ProbabilityMatrix& first = matrices.front();
  for (const auto& m : matrices) {
    if (m.rows.size() != first.rows.size() ||
        !std::equal(m.rows.begin(), m.rows.end(), first.rows.begin(),
                    [](const auto& x, const auto& y) { return x.first == y.first; })) {
      throw Error("ensemble", "models " + first.model_id + " and " +
                                  m.model_id + " cover different examples: " +
                                  SymmetricDifference(first, m));
    }
    for (const auto& [id, p] : m.rows) CheckRow(m, id, p, options.row_tolerance);
  }

  std::vector<EnsembleRow> out;
  out.reserve(first.rows.size());
  for (const auto& [id, _] : first.rows) {
    EnsembleRow row;
    row.example_id = id;
    row.p_final.fill(1.0);
    for (const auto& m : matrices) {
      const ProbabilityVector& p = m.rows.at(id);
      for (std::size_t c = 0; c < kNumLabels; ++c) {
        const double v = options.clamp ? std::max(p[c], options.floor) : p[c];
        row.p_final[c] *= v;
      }
    }
    if (options.normalize) {
      const double z = row.p_final[0] + row.p_final[1] + row.p_final[2];
      if (z > 0.0) {
        for (double& v : row.p_final) v /= z;
      }
    }
    row.label = ArgmaxLabel(row.p_final);
    out.push_back(std::move(row));
  }
  return out;
}

ProbabilityMatrix ParseProbabilityCsv(std::istream& in, std::string model_id) {
  ProbabilityMatrix m;
  m.model_id = std::move(model_id);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t comma; (comma = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    fields.push_back(rest);
    const std::string where = m.model_id + ": line " + std::to_string(lineno);
    if (lineno == 1 && fields[0] == "example_id") continue;
    if (fields.size() != 4) throw Error("format", where + ": expected 4 columns");
    ProbabilityVector p;
    for (std::size_t c = 0; c < kNumLabels; ++c) p[c] = ParseDouble(fields[c + 1], where);
    if (!m.rows.emplace(std::string(fields[0]), p).second)
      throw Error("format", where + ": duplicate example_id");
  }
  return m;
}

ProbabilityMatrix ParseProbabilityJsonl(std::istream& in, std::string model_id) {
  ProbabilityMatrix m;
  m.model_id = std::move(model_id);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = m.model_id + ": line " + std::to_string(lineno);
    auto j = nlohmann::json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw Error("format", where + ": invalid JSON");
      ProbabilityVector p = {j.at("p_support").get<double>(),
                             j.at("p_against").get<double>(),
                             j.at("p_neutral").get<double>()};
      if (!m.rows.emplace(j.at("example_id").get<std::string>(), p).second)
        throw Error("format", where + ": duplicate example_id");
    } catch (const nlohmann::json::exception& e) {
      throw Error("format", where + ": " + e.what());
    }
  }
  return m;
}

ProbabilityMatrix LoadProbabilityMatrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open predictions: " + path.string());
  if (path.extension() == ".csv") return ParseProbabilityCsv(in, path.string());
  return ParseProbabilityJsonl(in, path.string());
}

void WriteEnsembleJsonl(const std::vector<EnsembleRow>& rows, std::ostream& out) {
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["example_id"] = r.example_id;
    j["p_final"] = r.p_final;
    j["label"] = LabelName(r.label);
    out << j.dump() << '\n';
  }
}

}  // namespace stance
