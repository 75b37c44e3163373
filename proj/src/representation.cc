#include "edrep/representation.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace edrep {

CandidateRepresentation MakeRepresentation(const EntityTitle &title, const DescriptionMap &map) {
  return CandidateRepresentation(title, map.Lookup(title));
}

std::vector<CandidateRepresentation> MakeRepresentations(const EDInstance &instance,
                                                         const DescriptionMap &map) {
  std::vector<CandidateRepresentation> reps;
  reps.reserve(instance.candidates.size());
  std::unordered_set<std::string_view> surfaces;
  for (const auto &title : instance.candidates) {
    reps.push_back(MakeRepresentation(title, map));
  }
  for (const auto &rep : reps) {
    if (!surfaces.insert(rep.surface()).second) {
      throw Error(ErrorCode::kInvalidArgument, "surface '" + rep.surface() +
                                                   "' rendered twice in instance '" +
                                                   instance.id + "'");
    }
  }
  return reps;
}

std::uint64_t NearestRankPercentile(std::vector<std::uint64_t> &values, double percentile) {
  if (values.empty()) return 0;
  auto rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

LengthStats RepresentationLengthStats(std::span<const EDInstance> instances,
                                      const DescriptionMap &map, const Tokenizer &tokenizer,
                                      RepresentationMode mode) {
  std::vector<std::uint64_t> lengths;
  double total = 0.0;
  for (const auto &instance : instances) {
    for (const auto &title : instance.candidates) {
      auto rep = mode == RepresentationMode::kWithDescription ? MakeRepresentation(title, map)
                                                              : CandidateRepresentation(title);
      auto n = tokenizer.Encode(rep.surface()).size();
      lengths.push_back(n);
      total += static_cast<double>(n);
    }
  }
  LengthStats stats;
  stats.occurrences = lengths.size();
  if (!lengths.empty()) stats.mean = total / static_cast<double>(lengths.size());
  stats.p99 = NearestRankPercentile(lengths, 99.0);
  return stats;
}

}  // namespace edrep
