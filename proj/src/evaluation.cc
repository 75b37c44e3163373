#include "edrep/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "json.hpp"

namespace edrep {

F1Scores MicroF1(std::span<const PredictionRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyRecordSet, "no prediction records");
  F1Scores s;
  s.records = records.size();
  for (const auto &r : records) {
    if (r.predicted) ++s.predicted;
    if (r.correct()) ++s.correct;
  }
  s.precision = s.predicted ? static_cast<double>(s.correct) / s.predicted : 0.0;
  s.recall = static_cast<double>(s.correct) / s.records;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

Averages Aggregate(const std::map<std::string, double> &f1_by_dataset,
                   const std::set<std::string> &ood_names) {
  if (f1_by_dataset.empty()) throw Error(ErrorCode::kEmptyRecordSet, "no datasets to average");
  Averages out;
  double sum = 0.0;
  for (const auto &[name, f1] : f1_by_dataset) sum += f1;
  out.avg = sum / static_cast<double>(f1_by_dataset.size());
  if (!ood_names.empty()) {
    double ood = 0.0;
    for (const auto &name : ood_names) {
      auto it = f1_by_dataset.find(name);
      if (it == f1_by_dataset.end()) {
        throw Error(ErrorCode::kUnknownDatasetName, "no scores for dataset '" + name + "'");
      }
      ood += it->second;
    }
    out.avg_ood = ood / static_cast<double>(ood_names.size());
  }
  return out;
}

const char *FrequencyClassName(FrequencyClass c) {
  switch (c) {
    case FrequencyClass::kMFC: return "MFC";
    case FrequencyClass::kLFC: return "LFC";
    case FrequencyClass::kUE: return "UE";
    case FrequencyClass::kUEM: return "UEM";
    case FrequencyClass::kUM: return "UM";
  }
  return "?";
}

std::set<FrequencyClass> Classify(const EDInstance &instance, const TrainIndex &index,
                                  LfcPolicy policy) {
  if (!instance.gold) {
    throw Error(ErrorCode::kMissingGold, "instance '" + instance.id + "' has no gold");
  }
  const auto &gold = *instance.gold;
  const auto mention = MentionKey(instance);
  std::set<FrequencyClass> out;
  const bool mention_seen = index.HasMention(mention);
  const bool pair_seen = index.HasPair(mention, gold);
  const bool entity_seen = index.HasEntity(gold);
  const auto mfc = index.MostFrequent(mention);

  if (mention_seen && mfc && *mfc == gold) out.insert(FrequencyClass::kMFC);
  const bool lfc_base = policy == LfcPolicy::kSeenWithMention ? pair_seen : entity_seen;
  if (mention_seen && lfc_base && mfc && *mfc != gold) out.insert(FrequencyClass::kLFC);
  if (!entity_seen) out.insert(FrequencyClass::kUE);
  if (!pair_seen) out.insert(FrequencyClass::kUEM);
  if (!mention_seen) out.insert(FrequencyClass::kUM);
  return out;
}

FrequencyClassReport FrequencyBreakdown(std::span<const EDInstance> instances,
                                        std::span<const PredictionRecord> records,
                                        const TrainIndex &index, LfcPolicy policy) {
  if (instances.size() != records.size()) {
    throw Error(ErrorCode::kMisalignedRecords, "instances and records differ in length");
  }
  FrequencyClassReport report;
  for (auto c : kAllFrequencyClasses) report[c];
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].id != records[i].id) {
      throw Error(ErrorCode::kMisalignedRecords, "record '" + records[i].id +
                                                     "' does not match instance '" +
                                                     instances[i].id + "'");
    }
    for (auto c : Classify(instances[i], index, policy)) {
      ++report[c].count;
      if (records[i].correct()) ++report[c].correct;
    }
  }
  return report;
}

McNemarMethod ParseMcNemarMethod(std::string_view name) {
  if (name == "chi2-cc") return McNemarMethod::kChi2CC;
  if (name == "exact" || name == "exact-binomial") return McNemarMethod::kExactBinomial;
  throw Error(ErrorCode::kInvalidArgument, "unknown McNemar method '" + std::string(name) + "'");
}

double ChiSquare1Survival(double x) {
  if (x <= 0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

namespace {

// 2 * P(X <= k) for X ~ Binomial(n, 1/2), capped at 1.
double ExactTwoSided(std::uint64_t k, std::uint64_t n) {
  if (n == 0) return 1.0;
  // Sum in log space; terms grow with i up to n/2, so accumulate relative to
  // the largest term.
  std::vector<double> logs;
  logs.reserve(k + 1);
  const double ln2n = static_cast<double>(n) * std::log(2.0);
  for (std::uint64_t i = 0; i <= k; ++i) {
    logs.push_back(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - ln2n);
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - peak);
  return std::min(1.0, 2.0 * std::exp(peak) * sum);
}

}  // namespace

McNemarResult McNemarFromCounts(std::uint64_t b, std::uint64_t c, McNemarMethod method,
                                double alpha) {
  McNemarResult r;
  r.b = b;
  r.c = c;
  const std::uint64_t n = b + c;
  if (n == 0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
  } else if (method == McNemarMethod::kChi2CC) {
    const double diff = std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
    r.statistic = diff * diff / static_cast<double>(n);
    r.p_value = ChiSquare1Survival(r.statistic);
  } else {
    r.statistic = static_cast<double>(std::min(b, c));
    r.p_value = ExactTwoSided(std::min(b, c), n);
  }
  r.significant = r.p_value < alpha;
  return r;
}

McNemarResult McNemar(std::span<const PredictionRecord> a, std::span<const PredictionRecord> b,
                      McNemarMethod method, double alpha) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kMisalignedRecords, "systems cover different numbers of instances");
  }
  std::unordered_map<std::string_view, const PredictionRecord *> by_id;
  by_id.reserve(b.size());
  for (const auto &r : b) {
    if (!by_id.emplace(r.id, &r).second) {
      throw Error(ErrorCode::kMisalignedRecords, "duplicate id '" + r.id + "'");
    }
  }
  std::uint64_t only_a = 0, only_b = 0;
  std::unordered_map<std::string_view, bool> seen;
  for (const auto &ra : a) {
    auto it = by_id.find(ra.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMisalignedRecords, "id '" + ra.id + "' missing from system B");
    }
    if (!seen.emplace(ra.id, true).second) {
      throw Error(ErrorCode::kMisalignedRecords, "duplicate id '" + ra.id + "'");
    }
    const bool ca = ra.correct();
    const bool cb = it->second->correct();
    if (ca && !cb) ++only_a;
    if (!ca && cb) ++only_b;
  }
  return McNemarFromCounts(only_a, only_b, method, alpha);
}

namespace {

nlohmann::json ScoresJson(const F1Scores &s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"records", s.records},     {"predicted", s.predicted}, {"correct", s.correct}};
}

}  // namespace

std::string ReportJson(const EvaluationReport &report) {
  nlohmann::json j;
  j["datasets"] = nlohmann::json::object();
  for (const auto &[name, s] : report.datasets) j["datasets"][name] = ScoresJson(s);
  if (report.averages) {
    j["avg"] = report.averages->avg;
    j["avg_ood"] = report.averages->avg_ood ? nlohmann::json(*report.averages->avg_ood)
                                            : nlohmann::json(nullptr);
  }
  if (!report.frequency_classes.empty()) {
    auto &fc = j["frequency_classes"];
    for (const auto &[name, classes] : report.frequency_classes) {
      for (const auto &[c, stats] : classes) {
        fc[name][FrequencyClassName(c)] = {
            {"count", stats.count}, {"correct", stats.correct}, {"accuracy", stats.accuracy()}};
      }
    }
  }
  return j.dump(2);
}

std::string RenderReportText(const EvaluationReport &report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %8s %8s %8s %8s\n", "dataset", "P", "R", "F1", "n");
  out += buf;
  for (const auto &[name, s] : report.datasets) {
    std::snprintf(buf, sizeof buf, "%-24s %8.1f %8.1f %8.1f %8llu\n", name.c_str(),
                  100 * s.precision, 100 * s.recall, 100 * s.f1,
                  static_cast<unsigned long long>(s.records));
    out += buf;
  }
  if (report.averages) {
    std::snprintf(buf, sizeof buf, "%-24s %26.1f\n", "Avg", 100 * report.averages->avg);
    out += buf;
    if (report.averages->avg_ood) {
      std::snprintf(buf, sizeof buf, "%-24s %26.1f\n", "Avg_OOD", 100 * *report.averages->avg_ood);
      out += buf;
    }
  }
  for (const auto &[name, classes] : report.frequency_classes) {
    out += "\n" + name + "\n";
    for (const auto &[c, stats] : classes) {
      std::snprintf(buf, sizeof buf, "  %-4s %8.1f %8llu\n", FrequencyClassName(c),
                    100 * stats.accuracy(), static_cast<unsigned long long>(stats.count));
      out += buf;
    }
  }
  return out;
}

std::string McNemarJson(const McNemarResult &r, McNemarMethod method, double alpha) {
  nlohmann::json j = {{"method", method == McNemarMethod::kChi2CC ? "chi2-cc" : "exact"},
                      {"b", r.b},
                      {"c", r.c},
                      {"statistic", r.statistic},
                      {"p_value", r.p_value},
                      {"alpha", alpha},
                      {"significant", r.significant}};
  return j.dump(2);
}

}  // namespace edrep
