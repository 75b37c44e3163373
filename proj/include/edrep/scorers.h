#pragma once

// Deterministic reference scorers. They need no trained model and exercise
// every decoding path.

#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "edrep/extractive.h"
#include "edrep/generative.h"

namespace edrep {

// Add-one smoothed token n-gram model estimated on the tokenized candidate
// surfaces, each padded with order-1 start symbols and closed by eos:
//
//   p(w | ctx) = (count(ctx, w) + 1) / (count(ctx) + |V|)
//
// V is the set of surface tokens plus eos. Returns log-probabilities for the
// whole of V at every step.
class NgramScorer : public TokenScorer {
 public:
  NgramScorer(std::span<const std::string> surfaces, const Tokenizer &tokenizer, int order);
  NgramScorer(std::span<const CandidateRepresentation> reps, const Tokenizer &tokenizer,
              int order);

  std::vector<TokenLogprob> NextLogprobs(std::string_view marked_context,
                                         std::span<const TokenId> prefix,
                                         std::span<const TokenId> allowed) const override;

  double LogProb(std::span<const TokenId> prefix, TokenId token) const;
  const std::vector<TokenId> &vocabulary() const { return vocab_; }

 private:
  std::vector<TokenId> Context(std::span<const TokenId> prefix) const;

  int order_;
  TokenId bos_;
  std::vector<TokenId> vocab_;
  std::map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>> counts_;
  std::map<std::vector<TokenId>, std::uint64_t> totals_;
};

// Splits a context on the candidate separator; one span per candidate
// segment.
std::vector<CharSpan> CandidateSegments(std::string_view context);

// Whitespace tokens of `text` as byte spans.
std::vector<CharSpan> WhitespaceTokenSpans(std::string_view text);

// Whitespace words with leading/trailing ASCII punctuation removed.
std::vector<std::string> OverlapWords(std::string_view text);

// Scores each context token by how many distinct words its candidate surface
// shares with the query (markers excluded). Separator tokens score 0.
class OverlapSpanScorer : public SpanScorer {
 public:
  SpanScores Score(std::string_view query, std::string_view context) const override;
};

// Knows the gold surface. Generative form: 0 along the gold token path and
// -1000 elsewhere. Extractive form: 0 at the gold span's first/last tokens and
// -1000 elsewhere.
class OracleScorer : public TokenScorer, public SpanScorer {
 public:
  static constexpr double kPenalty = -1000.0;

  OracleScorer(std::string gold_surface, const Tokenizer &tokenizer);

  std::vector<TokenLogprob> NextLogprobs(std::string_view marked_context,
                                         std::span<const TokenId> prefix,
                                         std::span<const TokenId> allowed) const override;
  SpanScores Score(std::string_view query, std::string_view context) const override;

 private:
  std::string gold_;
  std::vector<TokenId> gold_path_;
};

}  // namespace edrep
