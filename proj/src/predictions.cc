#include "edrep/predictions.h"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

namespace edrep {

using nlohmann::json;

void WritePredictionLine(std::ostream &out, const PredictionLine &line) {
  json j;
  j["id"] = line.id;
  j["predicted"] = line.predicted ? json(line.predicted->str()) : json(nullptr);
  json scores = json::array();
  for (const auto &[title, score] : line.scores) {
    scores.push_back({title, std::isfinite(score) ? json(score) : json(nullptr)});
  }
  j["scores"] = std::move(scores);
  j["gold"] = line.gold ? json(line.gold->str()) : json(nullptr);
  if (line.error) j["error"] = *line.error;
  out << j.dump() << '\n';
}

namespace {

std::optional<EntityTitle> OptionalTitle(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return NormalizeTitle(it->get<std::string>());
}

}  // namespace

std::vector<PredictionLine> ReadPredictions(std::istream &in) {
  std::vector<PredictionLine> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      PredictionLine p;
      p.id = j.at("id").get<std::string>();
      p.predicted = OptionalTitle(j, "predicted");
      p.gold = OptionalTitle(j, "gold");
      if (auto it = j.find("scores"); it != j.end()) {
        for (const auto &pair : *it) {
          const auto &score = pair.at(1);
          p.scores.emplace_back(pair.at(0).get<std::string>(),
                                score.is_number() ? score.get<double>()
                                                  : -std::numeric_limits<double>::infinity());
        }
      }
      if (auto it = j.find("error"); it != j.end() && it->is_string()) p.error = it->get<std::string>();
      if (!ids.insert(p.id).second) {
        throw Error(ErrorCode::kMisalignedRecords, "duplicate prediction id '" + p.id + "'");
      }
      out.push_back(std::move(p));
    } catch (const Error &) {
      throw;
    } catch (const std::exception &e) {
      throw Error(ErrorCode::kParseError,
                  "predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PredictionLine> ReadPredictionsFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return ReadPredictions(in);
}

std::vector<PredictionRecord> RecordsFromPredictions(const std::vector<PredictionLine> &lines) {
  std::vector<PredictionRecord> out;
  for (const auto &l : lines) {
    if (l.gold) out.push_back({l.id, l.predicted, *l.gold});
  }
  return out;
}

}  // namespace edrep
