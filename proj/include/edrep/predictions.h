#pragma once

// predictions.jsonl: one object per instance,
//   {"id", "predicted", "scores": [[title, score], ...], "gold"[, "error"]}
// "predicted" and "gold" may be null; scores that are not finite are null.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "edrep/evaluation.h"
#include "edrep/types.h"

namespace edrep {

struct PredictionLine {
  std::string id;
  std::optional<EntityTitle> predicted;
  std::vector<std::pair<std::string, double>> scores;
  std::optional<EntityTitle> gold;
  std::optional<std::string> error;
};

void WritePredictionLine(std::ostream &out, const PredictionLine &line);
std::vector<PredictionLine> ReadPredictions(std::istream &in);
std::vector<PredictionLine> ReadPredictionsFile(const std::string &path);

// Records for inKB scoring: lines with a gold title, in file order.
std::vector<PredictionRecord> RecordsFromPredictions(const std::vector<PredictionLine> &lines);

}  // namespace edrep
