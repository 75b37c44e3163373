#include "edrep/generative.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace edrep {

namespace {

struct Expansion {
  std::size_t parent;
  TokenId token;
  CandidateTrie::NodeId node;
  double score;
  double key;
};

struct Completed {
  std::size_t candidate;
  double score;
  double key;
};

double CompareKey(double score, std::size_t length, double length_penalty) {
  if (length_penalty == 0.0) return score;
  return score / std::pow(static_cast<double>(length), length_penalty);
}

// Pulls the log-probabilities of `allowed` out of the scorer response.
std::vector<double> Masked(const std::vector<TokenLogprob> &response,
                           std::span<const TokenId> allowed, std::size_t step) {
  std::vector<double> out(allowed.size());
  bool aligned = response.size() == allowed.size();
  for (std::size_t i = 0; aligned && i < allowed.size(); ++i) {
    aligned = response[i].token == allowed[i];
  }
  if (aligned) {
    for (std::size_t i = 0; i < allowed.size(); ++i) out[i] = response[i].logprob;
  } else {
    std::unordered_map<TokenId, double> lookup;
    lookup.reserve(response.size());
    for (const auto &r : response) lookup.emplace(r.token, r.logprob);
    for (std::size_t i = 0; i < allowed.size(); ++i) {
      auto it = lookup.find(allowed[i]);
      if (it == lookup.end()) {
        throw Error(ErrorCode::kScorerFailure, "step " + std::to_string(step) +
                                                   ": no log-probability for allowed token " +
                                                   std::to_string(allowed[i]));
      }
      out[i] = it->second;
    }
  }
  for (double v : out) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kScorerFailure,
                  "step " + std::to_string(step) + ": non-finite log-probability");
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::size_t, double>> BeamSearch(const CandidateTrie &trie,
                                                       std::span<const std::string> surfaces,
                                                       std::string_view marked_context,
                                                       const TokenScorer &scorer,
                                                       const DecodeOptions &options) {
  if (options.beam == 0) throw Error(ErrorCode::kInvalidArgument, "beam width must be >= 1");

  std::vector<Hypothesis> beam(1);
  std::vector<Completed> pool;
  std::vector<Expansion> expansions;
  std::vector<TokenId> allowed;
  for (std::size_t step = 0; !beam.empty(); ++step) {
    expansions.clear();
    for (std::size_t h = 0; h < beam.size(); ++h) {
      const auto &hyp = beam[h];
      auto edges = trie.Children(hyp.node);
      allowed.clear();
      for (const auto &edge : edges) allowed.push_back(edge.first);

      std::vector<TokenLogprob> response;
      try {
        response = scorer.NextLogprobs(marked_context, hyp.prefix, allowed);
      } catch (const Error &e) {
        if (e.code() == ErrorCode::kScorerFailure) throw;
        throw Error(ErrorCode::kScorerFailure, "step " + std::to_string(step) + ": " + e.what());
      } catch (const std::exception &e) {
        throw Error(ErrorCode::kScorerFailure, "step " + std::to_string(step) + ": " + e.what());
      }
      auto logprobs = Masked(response, allowed, step);
      for (std::size_t i = 0; i < edges.size(); ++i) {
        double score = hyp.score + logprobs[i];
        expansions.push_back({h, edges[i].first, edges[i].second, score,
                              CompareKey(score, step + 1, options.length_penalty)});
      }
    }
    // All live hypotheses have equal depth, so their nodes have disjoint
    // candidate sets and MinRank makes the order total.
    std::sort(expansions.begin(), expansions.end(), [&](const Expansion &a, const Expansion &b) {
      if (a.key != b.key) return a.key > b.key;
      return trie.MinRank(a.node) < trie.MinRank(b.node);
    });

    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < expansions.size() && next.size() < options.beam; ++i) {
      const auto &e = expansions[i];
      if (trie.IsTerminal(e.node)) {
        // Completions only count when they rank inside the beam.
        if (i < options.beam) {
          pool.push_back({static_cast<std::size_t>(trie.Candidate(e.node)), e.score, e.key});
        }
        continue;
      }
      Hypothesis hyp;
      hyp.prefix.reserve(beam[e.parent].prefix.size() + 1);
      hyp.prefix = beam[e.parent].prefix;
      hyp.prefix.push_back(e.token);
      hyp.score = e.score;
      hyp.node = e.node;
      next.push_back(std::move(hyp));
    }
    beam = std::move(next);
  }

  std::sort(pool.begin(), pool.end(), [&](const Completed &a, const Completed &b) {
    if (a.key != b.key) return a.key > b.key;
    return surfaces[a.candidate] < surfaces[b.candidate];
  });
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(pool.size());
  for (const auto &c : pool) out.emplace_back(c.candidate, c.score);
  return out;
}

DecodeResult Decode(const EDInstance &instance, std::span<const CandidateRepresentation> reps,
                    const TokenScorer &scorer, const Tokenizer &tokenizer,
                    const DecodeOptions &options) {
  if (instance.candidates.empty()) {
    throw Error(ErrorCode::kEmptyCandidateSet, "instance '" + instance.id + "' has no candidates");
  }
  if (reps.size() != instance.candidates.size()) {
    throw Error(ErrorCode::kInvalidArgument, "representations not aligned with candidates");
  }
  std::vector<std::string> surfaces;
  surfaces.reserve(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i].title() != instance.candidates[i]) {
      throw Error(ErrorCode::kInvalidArgument, "representation " + std::to_string(i) +
                                                   " does not match candidate '" +
                                                   instance.candidates[i].str() + "'");
    }
    surfaces.push_back(reps[i].surface());
  }
  auto trie = CandidateTrie::Build(surfaces, tokenizer);
  auto marked = MarkMention(instance);
  auto ranked = BeamSearch(trie, surfaces, marked.value, scorer, options);

  DecodeResult result{instance.candidates[ranked.front().first], {}};
  result.ranked.reserve(ranked.size());
  for (const auto &[candidate, score] : ranked) {
    result.ranked.push_back({instance.candidates[candidate], score});
  }
  return result;
}

namespace {

DecodeOutcome DecodeOne(const EDInstance &instance,
                        const std::vector<CandidateRepresentation> &reps,
                        const TokenScorerProvider &scorers, std::size_t index,
                        const Tokenizer &tokenizer, const DecodeOptions &options) {
  DecodeOutcome outcome;
  try {
    auto scorer = scorers(index);
    outcome.result = Decode(instance, reps, *scorer, tokenizer, options);
  } catch (const Error &e) {
    outcome.error = e;
  } catch (const std::exception &e) {
    outcome.error = Error(ErrorCode::kScorerFailure, e.what());
  }
  return outcome;
}

void CheckBatchShape(std::size_t instances, std::size_t reps) {
  if (instances != reps) {
    throw Error(ErrorCode::kInvalidArgument, "representation lists not aligned with instances");
  }
}

}  // namespace

std::vector<DecodeOutcome> DecodeBatch(std::span<const EDInstance> instances,
                                       std::span<const std::vector<CandidateRepresentation>> reps,
                                       const TokenScorerProvider &scorers,
                                       const Tokenizer &tokenizer, const DecodeOptions &options,
                                       int jobs) {
  CheckBatchShape(instances.size(), reps.size());
  std::vector<DecodeOutcome> out(instances.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(instances.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = DecodeOne(instances[i], reps[i], scorers, static_cast<std::size_t>(i), tokenizer,
                       options);
  }
  return out;
}

std::vector<DecodeOutcome> DecodeBatchSerial(
    std::span<const EDInstance> instances,
    std::span<const std::vector<CandidateRepresentation>> reps, const TokenScorerProvider &scorers,
    const Tokenizer &tokenizer, const DecodeOptions &options) {
  CheckBatchShape(instances.size(), reps.size());
  std::vector<DecodeOutcome> out;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    out.push_back(DecodeOne(instances[i], reps[i], scorers, i, tokenizer, options));
  }
  return out;
}

}  // namespace edrep
