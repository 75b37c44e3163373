#pragma once

// Generative disambiguation: trie-constrained beam search over the candidate
// surfaces, scored by a pluggable autoregressive token scorer.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "edrep/trie.h"
#include "edrep/types.h"

namespace edrep {

struct TokenLogprob {
  TokenId token;
  double logprob;
};

// log p(token | prefix, marked context). `prefix` excludes the start symbol.
// Must return a finite value for every id in `allowed`; extra ids are
// ignored. Must be deterministic and safe to call concurrently.
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  virtual std::vector<TokenLogprob> NextLogprobs(std::string_view marked_context,
                                                 std::span<const TokenId> prefix,
                                                 std::span<const TokenId> allowed) const = 0;
};

struct DecodeOptions {
  std::size_t beam = 5;
  // Hypotheses are compared by score / length^length_penalty; 0 compares raw
  // summed log-probabilities.
  double length_penalty = 0.0;
};

struct ScoredTitle {
  EntityTitle title;
  double score;
};

struct DecodeResult {
  EntityTitle winner;
  // Every completed hypothesis, best first; ties by surface ascending.
  std::vector<ScoredTitle> ranked;
};

struct Hypothesis {
  std::vector<TokenId> prefix;
  double score = 0.0;
  CandidateTrie::NodeId node = CandidateTrie::kRoot;
  bool complete = false;
};

// Throws kEmptyCandidateSet, kInvalidArgument (reps not aligned with the
// candidates), kScorerFailure, or trie build errors.
DecodeResult Decode(const EDInstance &instance, std::span<const CandidateRepresentation> reps,
                    const TokenScorer &scorer, const Tokenizer &tokenizer,
                    const DecodeOptions &options = {});

// Beam search over an already built trie; returns (candidate index, score)
// pairs for every completed hypothesis, best first.
std::vector<std::pair<std::size_t, double>> BeamSearch(const CandidateTrie &trie,
                                                       std::span<const std::string> surfaces,
                                                       std::string_view marked_context,
                                                       const TokenScorer &scorer,
                                                       const DecodeOptions &options);

struct DecodeOutcome {
  std::optional<DecodeResult> result;
  std::optional<Error> error;
};

using TokenScorerProvider = std::function<std::shared_ptr<const TokenScorer>(std::size_t)>;

// Decodes every instance; per-instance failures land in the outcome instead
// of aborting the batch. Output order equals input order. The parallel
// version runs instances concurrently on `jobs` threads (0: OpenMP default).
std::vector<DecodeOutcome> DecodeBatch(std::span<const EDInstance> instances,
                                       std::span<const std::vector<CandidateRepresentation>> reps,
                                       const TokenScorerProvider &scorers,
                                       const Tokenizer &tokenizer, const DecodeOptions &options,
                                       int jobs = 0);

// Serial reference for DecodeBatch.
std::vector<DecodeOutcome> DecodeBatchSerial(
    std::span<const EDInstance> instances,
    std::span<const std::vector<CandidateRepresentation>> reps, const TokenScorerProvider &scorers,
    const Tokenizer &tokenizer, const DecodeOptions &options);

}  // namespace edrep
