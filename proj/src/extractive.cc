#include "edrep/extractive.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace edrep {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

void CheckAligned(const EDInstance &instance, std::span<const CandidateRepresentation> reps) {
  if (reps.size() != instance.candidates.size()) {
    throw Error(ErrorCode::kInvalidArgument, "representations not aligned with candidates");
  }
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i].title() != instance.candidates[i]) {
      throw Error(ErrorCode::kInvalidArgument, "representation " + std::to_string(i) +
                                                   " does not match its candidate");
    }
  }
}

// Shrinks the query around the mention one whitespace word at a time, always
// from the side that currently keeps more words.
class QueryTrimmer {
 public:
  explicit QueryTrimmer(const EDInstance &instance) : instance_(instance) {
    const std::string &text = instance.text;
    for (std::size_t i = 0; i < instance.mention.start; ++i) {
      if (!IsSpace(text[i]) && (i == 0 || IsSpace(text[i - 1]))) left_starts_.push_back(i);
    }
    for (std::size_t i = instance.mention.end; i < text.size(); ++i) {
      if (!IsSpace(text[i]) && (i + 1 == text.size() || IsSpace(text[i + 1]))) {
        right_ends_.push_back(i + 1);
      }
    }
  }

  std::size_t max_drops() const { return left_starts_.size() + right_ends_.size(); }

  std::string Query(std::size_t drops) const {
    std::size_t left = left_starts_.size();
    std::size_t right = right_ends_.size();
    for (std::size_t i = 0; i < drops; ++i) {
      if (left >= right && left > 0) {
        --left;
      } else if (right > 0) {
        --right;
      }
    }
    const std::string &text = instance_.text;
    const std::size_t cut_left =
        left == 0 ? instance_.mention.start : left_starts_[left_starts_.size() - left];
    const std::size_t cut_right = right == 0 ? instance_.mention.end : right_ends_[right - 1];
    EDInstance trimmed;
    trimmed.text = text.substr(cut_left, cut_right - cut_left);
    trimmed.mention = {instance_.mention.start - cut_left, instance_.mention.end - cut_left};
    return MarkMention(trimmed).value;
  }

 private:
  const EDInstance &instance_;
  std::vector<std::size_t> left_starts_;
  std::vector<std::size_t> right_ends_;
};

}  // namespace

AssembledInput Assemble(const EDInstance &instance, std::span<const CandidateRepresentation> reps,
                        const AssembleOptions &options) {
  CheckAligned(instance, reps);
  AssembledInput out;
  out.spans.reserve(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (i) out.context += kCandidateSeparator;
    const std::size_t start = out.context.size();
    out.context += reps[i].surface();
    out.spans.push_back({start, out.context.size()});
  }
  out.query = MarkMention(instance).value;
  if (!options.budget) return out;
  if (!options.tokenizer) {
    throw Error(ErrorCode::kInvalidArgument, "a token budget needs a tokenizer");
  }

  const std::size_t budget = *options.budget;
  const Tokenizer &tok = *options.tokenizer;
  const std::size_t context_tokens = tok.Encode(out.context).size();
  auto fits = [&](const std::string &query) {
    return tok.Encode(query).size() + context_tokens <= budget;
  };
  if (fits(out.query)) return out;

  QueryTrimmer trimmer(instance);
  const std::size_t all = trimmer.max_drops();
  if (context_tokens > budget || !fits(trimmer.Query(all))) {
    throw Error(ErrorCode::kBudgetTooSmall,
                "candidates need " + std::to_string(context_tokens) + " tokens plus the marked "
                "mention; budget is " + std::to_string(budget));
  }
  // Smallest number of dropped words that fits; `hi` always fits.
  std::size_t lo = 0, hi = all;
  while (lo + 1 < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (fits(trimmer.Query(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.query = trimmer.Query(hi);
  out.truncated_query = true;
  return out;
}

void ValidateSpanScores(const SpanScores &scores, std::size_t context_size) {
  const auto n = scores.token_spans.size();
  if (scores.start.size() != n || scores.end.size() != n) {
    throw Error(ErrorCode::kScorerFailure, "token spans and score vectors differ in length");
  }
  if (n == 0) throw Error(ErrorCode::kNoTokens, "scorer returned no tokens");
  for (std::size_t i = 0; i < n; ++i) {
    const auto &s = scores.token_spans[i];
    if (s.start >= s.end || s.end > context_size ||
        (i > 0 && s.start < scores.token_spans[i - 1].end)) {
      throw Error(ErrorCode::kScorerFailure,
                  "token span " + std::to_string(i) + " is empty, out of bounds or out of order");
    }
    if (!std::isfinite(scores.start[i]) || !std::isfinite(scores.end[i])) {
      throw Error(ErrorCode::kScorerFailure, "non-finite score at token " + std::to_string(i));
    }
  }
}

ExtractResult Extract(const EDInstance &instance, std::span<const CandidateRepresentation> reps,
                      const SpanScorer &scorer, const AssembleOptions &options) {
  if (instance.candidates.empty()) {
    throw Error(ErrorCode::kEmptyCandidateSet, "instance '" + instance.id + "' has no candidates");
  }
  auto assembled = Assemble(instance, reps, options);
  SpanScores scores;
  try {
    scores = scorer.Score(assembled.query, assembled.context);
  } catch (const Error &) {
    throw;
  } catch (const std::exception &e) {
    throw Error(ErrorCode::kScorerFailure, e.what());
  }
  ValidateSpanScores(scores, assembled.context.size());

  const auto &tokens = scores.token_spans;
  ExtractResult result{instance.candidates.front(), {}};
  result.scores.reserve(reps.size());
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < reps.size(); ++c) {
    const auto span = assembled.spans[c];
    // First token ending after the span starts.
    auto first = std::upper_bound(tokens.begin(), tokens.end(), span.start,
                                  [](std::size_t pos, const CharSpan &t) { return pos < t.end; });
    double score = -std::numeric_limits<double>::infinity();
    if (first != tokens.end() && first->start < span.end) {
      // Last token starting before the span ends.
      auto last = std::lower_bound(tokens.begin(), tokens.end(), span.end,
                                   [](const CharSpan &t, std::size_t pos) { return t.start < pos; });
      --last;
      score = scores.start[first - tokens.begin()] + scores.end[last - tokens.begin()];
    }
    result.scores.push_back({instance.candidates[c], score});
    if (c == 0 || score > best_score ||
        (score == best_score && reps[c].surface() < reps[best].surface())) {
      best = c;
      best_score = score;
    }
  }
  result.winner = instance.candidates[best];
  return result;
}

std::size_t ResolveSpan(const AssembledInput &assembled, CharSpan predicted) {
  if (predicted.start >= predicted.end || predicted.end > assembled.context.size()) {
    throw Error(ErrorCode::kInvalidArgument, "predicted span outside the context");
  }
  std::size_t best = 0;
  std::size_t best_overlap = 0;
  for (std::size_t i = 0; i < assembled.spans.size(); ++i) {
    const auto &s = assembled.spans[i];
    const std::size_t lo = std::max(s.start, predicted.start);
    const std::size_t hi = std::min(s.end, predicted.end);
    const std::size_t overlap = hi > lo ? hi - lo : 0;
    if (overlap > best_overlap) {
      best = i;
      best_overlap = overlap;
    }
  }
  if (best_overlap == 0) {
    throw Error(ErrorCode::kNoOverlap, "predicted span overlaps no candidate");
  }
  return best;
}

namespace {

ExtractOutcome ExtractOne(const EDInstance &instance,
                          const std::vector<CandidateRepresentation> &reps,
                          const SpanScorerProvider &scorers, std::size_t index,
                          const AssembleOptions &options) {
  ExtractOutcome outcome;
  try {
    auto scorer = scorers(index);
    outcome.result = Extract(instance, reps, *scorer, options);
  } catch (const Error &e) {
    outcome.error = e;
  } catch (const std::exception &e) {
    outcome.error = Error(ErrorCode::kScorerFailure, e.what());
  }
  return outcome;
}

}  // namespace

std::vector<ExtractOutcome> ExtractBatch(std::span<const EDInstance> instances,
                                         std::span<const std::vector<CandidateRepresentation>> reps,
                                         const SpanScorerProvider &scorers,
                                         const AssembleOptions &options, int jobs) {
  if (instances.size() != reps.size()) {
    throw Error(ErrorCode::kInvalidArgument, "representation lists not aligned with instances");
  }
  std::vector<ExtractOutcome> out(instances.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(instances.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = ExtractOne(instances[i], reps[i], scorers, static_cast<std::size_t>(i), options);
  }
  return out;
}

std::vector<ExtractOutcome> ExtractBatchSerial(
    std::span<const EDInstance> instances,
    std::span<const std::vector<CandidateRepresentation>> reps, const SpanScorerProvider &scorers,
    const AssembleOptions &options) {
  if (instances.size() != reps.size()) {
    throw Error(ErrorCode::kInvalidArgument, "representation lists not aligned with instances");
  }
  std::vector<ExtractOutcome> out;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    out.push_back(ExtractOne(instances[i], reps[i], scorers, i, options));
  }
  return out;
}

}  // namespace edrep
