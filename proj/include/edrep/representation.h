#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edrep/description_map.h"
#include "edrep/types.h"

namespace edrep {

// "title: description" when the map has a description, the bare title
// otherwise.
CandidateRepresentation MakeRepresentation(const EntityTitle &title, const DescriptionMap &map);

// Representations for every candidate of `instance`, in candidate order.
// Throws kInvalidArgument if two rendered surfaces collide.
std::vector<CandidateRepresentation> MakeRepresentations(const EDInstance &instance,
                                                         const DescriptionMap &map);

enum class RepresentationMode { kTitleOnly, kWithDescription };

struct LengthStats {
  double mean = 0.0;
  std::uint64_t p99 = 0;
  std::uint64_t occurrences = 0;
};

// Token-length statistics over every candidate occurrence (not unique
// titles). p99 is the nearest-rank 99th percentile.
LengthStats RepresentationLengthStats(std::span<const EDInstance> instances,
                                      const DescriptionMap &map, const Tokenizer &tokenizer,
                                      RepresentationMode mode);

// Nearest-rank percentile of an unsorted sample; `values` is reordered.
std::uint64_t NearestRankPercentile(std::vector<std::uint64_t> &values, double percentile);

}  // namespace edrep
