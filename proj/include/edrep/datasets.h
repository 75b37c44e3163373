#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "edrep/description_map.h"
#include "edrep/types.h"

namespace edrep {

enum class DatasetFormat { kCanonicalJsonl, kAidaConll };

DatasetFormat ParseDatasetFormat(std::string_view name);

struct ReaderCounters {
  std::uint64_t instances = 0;
  std::uint64_t duplicate_candidates = 0;
  std::uint64_t gold_not_in_candidates = 0;
  std::uint64_t missing_candidate_sets = 0;
};

// mention id -> candidate titles, from a JSONL sidecar of
// {"mention_id": ..., "candidates": [...]} records.
using CandidateSidecar = std::unordered_map<std::string, std::vector<std::string>>;

CandidateSidecar ReadCandidateSidecar(std::istream &in);
CandidateSidecar ReadCandidateSidecarFile(const std::string &path);

// Single-pass reader yielding instances in file order.
//
// canonical-jsonl: one object per line,
//   {"id", "text", "mention": {"start", "end"}, "candidates": [...], "gold"}
// with offsets in code points. "gold" may be absent or null.
//
// aida-conll: the AIDA-YAGO2 token-per-line TSV. "-DOCSTART- (<doc>)" opens a
// document, blank lines end sentences, and annotated tokens carry
// token, B|I, mention, entity[, url, ...]. "--NME--" mentions are skipped.
// Instance ids are "<doc>#<k>" with k counting every mention of the document
// from 0. Candidates come from the sidecar.
//
// When a sidecar is given it replaces the candidates of matching ids.
class DatasetReader {
 public:
  DatasetReader(std::istream &in, DatasetFormat format, const CandidateSidecar *sidecar = nullptr);
  ~DatasetReader();

  std::optional<EDInstance> Next();
  const ReaderCounters &counters() const { return counters_; }

 private:
  std::optional<EDInstance> NextJsonl();
  std::optional<EDInstance> NextAida();
  EDInstance Finalize(EDInstance instance, std::vector<std::string> raw_candidates);

  struct AidaState;

  std::istream &in_;
  DatasetFormat format_;
  const CandidateSidecar *sidecar_;
  ReaderCounters counters_;
  std::uint64_t line_no_ = 0;
  std::unique_ptr<AidaState> aida_;
};

std::vector<EDInstance> ReadDataset(std::istream &in, DatasetFormat format,
                                    const CandidateSidecar *sidecar = nullptr,
                                    ReaderCounters *counters = nullptr);
std::vector<EDInstance> ReadDatasetFile(const std::string &path, DatasetFormat format,
                                        const CandidateSidecar *sidecar = nullptr,
                                        ReaderCounters *counters = nullptr);

// Writes one canonical-jsonl line (with trailing newline).
void WriteCanonicalJsonl(std::ostream &out, const EDInstance &instance);

struct DatasetStats {
  std::uint64_t instances = 0;
  std::uint64_t candidates_total = 0;
  std::uint64_t candidates_unique = 0;
  std::uint64_t failures_total = 0;
  std::uint64_t failures_unique = 0;

  friend bool operator==(const DatasetStats &, const DatasetStats &) = default;
};

// Streaming accumulator behind ComputeStats. Failures are candidate
// occurrences without a description.
class StatsAccumulator {
 public:
  explicit StatsAccumulator(const DescriptionMap &map) : map_(map) {}
  void Add(const EDInstance &instance);
  DatasetStats Finish() const;

 private:
  const DescriptionMap &map_;
  DatasetStats stats_;
  std::unordered_map<std::string, bool> seen_;  // title -> has description
};

DatasetStats ComputeStats(std::span<const EDInstance> instances, const DescriptionMap &map);
DatasetStats ComputeStats(DatasetReader &reader, const DescriptionMap &map);

// Collapses runs of whitespace into single spaces and trims.
std::string CollapseWhitespace(std::string_view s);

// Mention surface used to key the training index.
inline std::string MentionKey(const EDInstance &instance) {
  return CollapseWhitespace(instance.mention_text());
}

// Mention -> gold frequencies from a training split.
class TrainIndex {
 public:
  static TrainIndex Build(std::span<const EDInstance> train);

  void Add(const EDInstance &instance);

  bool HasMention(std::string_view mention) const;
  bool HasEntity(const EntityTitle &entity) const;
  bool HasPair(std::string_view mention, const EntityTitle &entity) const;
  std::uint64_t PairCount(std::string_view mention, const EntityTitle &entity) const;
  // Most frequent gold for the mention; ties go to the lexicographically
  // smallest title.
  std::optional<EntityTitle> MostFrequent(std::string_view mention) const;

  std::size_t mentions() const { return table_.size(); }
  std::size_t entities() const { return entities_.size(); }

 private:
  std::map<std::string, std::map<EntityTitle, std::uint64_t>, std::less<>> table_;
  std::set<EntityTitle> entities_;
};

}  // namespace edrep
