#include "edrep/scorers.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace edrep {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::vector<std::string> Surfaces(std::span<const CandidateRepresentation> reps) {
  std::vector<std::string> out;
  out.reserve(reps.size());
  for (const auto &r : reps) out.push_back(r.surface());
  return out;
}

}  // namespace

NgramScorer::NgramScorer(std::span<const CandidateRepresentation> reps, const Tokenizer &tokenizer,
                         int order)
    : NgramScorer(Surfaces(reps), tokenizer, order) {}

NgramScorer::NgramScorer(std::span<const std::string> surfaces, const Tokenizer &tokenizer,
                         int order)
    : order_(order), bos_(tokenizer.bos_id()) {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  std::set<TokenId> vocab{tokenizer.eos_id()};
  for (const auto &surface : surfaces) {
    auto tokens = tokenizer.Encode(surface);
    tokens.push_back(tokenizer.eos_id());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      vocab.insert(tokens[i]);
      auto ctx = Context(std::span<const TokenId>(tokens.data(), i));
      ++counts_[ctx][tokens[i]];
      ++totals_[ctx];
    }
  }
  vocab_.assign(vocab.begin(), vocab.end());
}

std::vector<TokenId> NgramScorer::Context(std::span<const TokenId> prefix) const {
  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> ctx;
  ctx.reserve(width);
  for (std::size_t k = 0; k < width; ++k) {
    // Position of the k-th context token counted from the left of the window.
    const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(prefix.size()) -
                               static_cast<std::ptrdiff_t>(width) + static_cast<std::ptrdiff_t>(k);
    ctx.push_back(pos < 0 ? bos_ : prefix[pos]);
  }
  return ctx;
}

double NgramScorer::LogProb(std::span<const TokenId> prefix, TokenId token) const {
  const auto ctx = Context(prefix);
  std::uint64_t count = 0;
  std::uint64_t total = 0;
  if (auto it = counts_.find(ctx); it != counts_.end()) {
    if (auto jt = it->second.find(token); jt != it->second.end()) count = jt->second;
    total = totals_.at(ctx);
  }
  return std::log(static_cast<double>(count + 1) /
                  static_cast<double>(total + vocab_.size()));
}

std::vector<TokenLogprob> NgramScorer::NextLogprobs(std::string_view,
                                                    std::span<const TokenId> prefix,
                                                    std::span<const TokenId>) const {
  std::vector<TokenLogprob> out;
  out.reserve(vocab_.size());
  for (TokenId t : vocab_) out.push_back({t, LogProb(prefix, t)});
  return out;
}

std::vector<CharSpan> CandidateSegments(std::string_view context) {
  std::vector<CharSpan> out;
  std::size_t pos = 0;
  while (true) {
    auto next = context.find(kCandidateSeparator, pos);
    if (next == std::string_view::npos) {
      out.push_back({pos, context.size()});
      return out;
    }
    out.push_back({pos, next});
    pos = next + kCandidateSeparator.size();
  }
}

std::vector<CharSpan> WhitespaceTokenSpans(std::string_view text) {
  std::vector<CharSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    if (i == text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    out.push_back({start, i});
  }
  return out;
}

std::vector<std::string> OverlapWords(std::string_view text) {
  std::vector<std::string> out;
  for (const auto &span : WhitespaceTokenSpans(text)) {
    auto word = text.substr(span.start, span.end - span.start);
    if (word == kOpenMarker || word == kCloseMarker) continue;
    auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
    while (!word.empty() && punct(word.front())) word.remove_prefix(1);
    while (!word.empty() && punct(word.back())) word.remove_suffix(1);
    if (!word.empty()) out.emplace_back(word);
  }
  return out;
}

SpanScores OverlapSpanScorer::Score(std::string_view query, std::string_view context) const {
  const auto query_list = OverlapWords(query);
  const std::unordered_set<std::string> query_words(query_list.begin(), query_list.end());

  SpanScores out;
  out.token_spans = WhitespaceTokenSpans(context);
  out.start.assign(out.token_spans.size(), 0.0);
  out.end.assign(out.token_spans.size(), 0.0);

  std::size_t t = 0;
  for (const auto &segment : CandidateSegments(context)) {
    auto words = OverlapWords(context.substr(segment.start, segment.end - segment.start));
    std::unordered_set<std::string> distinct(words.begin(), words.end());
    double shared = 0;
    for (const auto &w : distinct) shared += query_words.contains(w) ? 1 : 0;
    // Tokens before this segment belong to a separator.
    while (t < out.token_spans.size() && out.token_spans[t].end <= segment.start) ++t;
    for (; t < out.token_spans.size() && out.token_spans[t].start < segment.end; ++t) {
      out.start[t] = shared;
      out.end[t] = shared;
    }
  }
  return out;
}

OracleScorer::OracleScorer(std::string gold_surface, const Tokenizer &tokenizer)
    : gold_(std::move(gold_surface)), gold_path_(tokenizer.Encode(gold_)) {
  gold_path_.push_back(tokenizer.eos_id());
}

std::vector<TokenLogprob> OracleScorer::NextLogprobs(std::string_view,
                                                     std::span<const TokenId> prefix,
                                                     std::span<const TokenId> allowed) const {
  const bool on_path = prefix.size() < gold_path_.size() &&
                       std::equal(prefix.begin(), prefix.end(), gold_path_.begin());
  std::vector<TokenLogprob> out;
  out.reserve(allowed.size());
  for (TokenId t : allowed) {
    const bool gold_next = on_path && gold_path_[prefix.size()] == t;
    out.push_back({t, gold_next ? 0.0 : kPenalty});
  }
  return out;
}

SpanScores OracleScorer::Score(std::string_view, std::string_view context) const {
  SpanScores out;
  out.token_spans = WhitespaceTokenSpans(context);
  out.start.assign(out.token_spans.size(), kPenalty);
  out.end.assign(out.token_spans.size(), kPenalty);
  for (const auto &segment : CandidateSegments(context)) {
    if (context.substr(segment.start, segment.end - segment.start) != gold_) continue;
    for (std::size_t t = 0; t < out.token_spans.size(); ++t) {
      if (out.token_spans[t].start == segment.start) out.start[t] = 0.0;
      if (out.token_spans[t].end == segment.end) out.end[t] = 0.0;
    }
  }
  return out;
}

}  // namespace edrep
