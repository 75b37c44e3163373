#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "edrep/datasets.h"
#include "edrep/types.h"

namespace edrep {

struct PredictionRecord {
  std::string id;
  std::optional<EntityTitle> predicted;
  EntityTitle gold;

  bool correct() const { return predicted && *predicted == gold; }
};

struct F1Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t records = 0;
  std::uint64_t predicted = 0;
  std::uint64_t correct = 0;
};

// inKB micro scores. Abstentions lower recall only; precision with no
// predictions is 0. Throws kEmptyRecordSet.
F1Scores MicroF1(std::span<const PredictionRecord> records);

struct Averages {
  double avg = 0.0;
  std::optional<double> avg_ood;
};

// Unweighted means over all datasets and over the out-of-domain subset.
// Throws kUnknownDatasetName if an OOD name has no score, kEmptyRecordSet if
// there are no datasets.
Averages Aggregate(const std::map<std::string, double> &f1_by_dataset,
                   const std::set<std::string> &ood_names);

enum class FrequencyClass { kMFC, kLFC, kUE, kUEM, kUM };
inline constexpr FrequencyClass kAllFrequencyClasses[] = {
    FrequencyClass::kMFC, FrequencyClass::kLFC, FrequencyClass::kUE, FrequencyClass::kUEM,
    FrequencyClass::kUM};

const char *FrequencyClassName(FrequencyClass c);

enum class LfcPolicy {
  // Gold was seen with this mention but is not its most frequent entity.
  kSeenWithMention,
  // Gold was seen anywhere in training, the mention was seen, and gold is not
  // the mention's most frequent entity.
  kSeenAnywhere,
};

// Memberships are computed independently and may overlap.
// Throws kMissingGold.
std::set<FrequencyClass> Classify(const EDInstance &instance, const TrainIndex &index,
                                  LfcPolicy policy = LfcPolicy::kSeenWithMention);

struct ClassStats {
  std::uint64_t count = 0;
  std::uint64_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / count : 0.0; }
};

using FrequencyClassReport = std::map<FrequencyClass, ClassStats>;

// `records` aligned with `instances` by position.
FrequencyClassReport FrequencyBreakdown(std::span<const EDInstance> instances,
                                        std::span<const PredictionRecord> records,
                                        const TrainIndex &index,
                                        LfcPolicy policy = LfcPolicy::kSeenWithMention);

enum class McNemarMethod { kChi2CC, kExactBinomial };

McNemarMethod ParseMcNemarMethod(std::string_view name);

struct McNemarResult {
  std::uint64_t b = 0;  // A correct, B wrong
  std::uint64_t c = 0;  // A wrong, B correct
  double statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

// Upper tail of the chi-square distribution with one degree of freedom.
double ChiSquare1Survival(double x);

McNemarResult McNemarFromCounts(std::uint64_t b, std::uint64_t c, McNemarMethod method,
                                double alpha = 0.01);

// Records are matched by id; throws kMisalignedRecords unless both sides
// cover the same ids exactly once.
McNemarResult McNemar(std::span<const PredictionRecord> a, std::span<const PredictionRecord> b,
                      McNemarMethod method = McNemarMethod::kChi2CC, double alpha = 0.01);

struct EvaluationReport {
  std::map<std::string, F1Scores> datasets;
  std::optional<Averages> averages;
  std::map<std::string, FrequencyClassReport> frequency_classes;
};

std::string ReportJson(const EvaluationReport &report);
std::string RenderReportText(const EvaluationReport &report);
std::string McNemarJson(const McNemarResult &result, McNemarMethod method, double alpha);

}  // namespace edrep
