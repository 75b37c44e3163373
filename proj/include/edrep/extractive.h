#pragma once

// Extractive disambiguation: the marked context is the query, the candidate
// surfaces joined by a separator are the context, and the answer is the
// candidate span with the best start + end score.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edrep/generative.h"
#include "edrep/types.h"

namespace edrep {

inline constexpr std::string_view kCandidateSeparator = " <sep> ";

// Half-open byte range into some text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const CharSpan &, const CharSpan &) = default;
};

struct AssembledInput {
  std::string query;
  std::string context;
  // spans[i] locates the surface of candidate i inside `context`.
  std::vector<CharSpan> spans;
  bool truncated_query = false;
};

// Per-token start/end scores over the context, as produced by a span model.
struct SpanScores {
  std::vector<CharSpan> token_spans;
  std::vector<double> start;
  std::vector<double> end;
};

class SpanScorer {
 public:
  virtual ~SpanScorer() = default;
  virtual SpanScores Score(std::string_view query, std::string_view context) const = 0;
};

struct AssembleOptions {
  // Token budget for query + context; needs a tokenizer.
  std::optional<std::size_t> budget;
  const Tokenizer *tokenizer = nullptr;
};

// Throws kBudgetTooSmall when the candidate context (plus the marked mention)
// cannot fit the budget, kInvalidArgument for misaligned reps.
AssembledInput Assemble(const EDInstance &instance, std::span<const CandidateRepresentation> reps,
                        const AssembleOptions &options = {});

struct ExtractResult {
  EntityTitle winner;
  // Candidate order; uncovered candidates score -infinity.
  std::vector<ScoredTitle> scores;
};

// Throws kEmptyCandidateSet, kNoTokens, kScorerFailure.
ExtractResult Extract(const EDInstance &instance, std::span<const CandidateRepresentation> reps,
                      const SpanScorer &scorer, const AssembleOptions &options = {});

// Candidate whose span overlaps `predicted` the most; ties to the smaller
// index. Throws kNoOverlap, or kInvalidArgument when out of bounds.
std::size_t ResolveSpan(const AssembledInput &assembled, CharSpan predicted);

// Checks the scorer output shape; throws kScorerFailure or kNoTokens.
void ValidateSpanScores(const SpanScores &scores, std::size_t context_size);

struct ExtractOutcome {
  std::optional<ExtractResult> result;
  std::optional<Error> error;
};

using SpanScorerProvider = std::function<std::shared_ptr<const SpanScorer>(std::size_t)>;

std::vector<ExtractOutcome> ExtractBatch(std::span<const EDInstance> instances,
                                         std::span<const std::vector<CandidateRepresentation>> reps,
                                         const SpanScorerProvider &scorers,
                                         const AssembleOptions &options, int jobs = 0);

// Serial reference for ExtractBatch.
std::vector<ExtractOutcome> ExtractBatchSerial(
    std::span<const EDInstance> instances,
    std::span<const std::vector<CandidateRepresentation>> reps, const SpanScorerProvider &scorers,
    const AssembleOptions &options);

}  // namespace edrep
