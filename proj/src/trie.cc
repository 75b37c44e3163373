#include "edrep/trie.h"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace edrep {

CandidateTrie CandidateTrie::Build(std::span<const CandidateRepresentation> reps,
                                   const Tokenizer &tokenizer) {
  std::vector<std::string> surfaces;
  surfaces.reserve(reps.size());
  for (const auto &rep : reps) surfaces.push_back(rep.surface());
  return Build(surfaces, tokenizer);
}

CandidateTrie CandidateTrie::Build(std::span<const std::string> surfaces,
                                   const Tokenizer &tokenizer) {
  if (surfaces.empty()) throw Error(ErrorCode::kEmptyCandidateSet, "no candidates to index");
  std::unordered_set<std::string_view> distinct;
  for (const auto &s : surfaces) {
    if (!distinct.insert(s).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate surface '" + s + "'");
    }
  }

  CandidateTrie trie;
  trie.eos_ = tokenizer.eos_id();
  trie.nodes_.emplace_back();

  std::vector<std::uint32_t> order(surfaces.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return surfaces[a] < surfaces[b]; });
  trie.ranks_.resize(surfaces.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) trie.ranks_[order[r]] = r;

  trie.sequences_.reserve(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    auto tokens = tokenizer.Encode(surfaces[i]);
    if (tokenizer.Decode(tokens) != surfaces[i]) {
      throw Error(ErrorCode::kTokenizerNotRoundTrip,
                  "decode(encode(s)) != s for surface '" + surfaces[i] + "'");
    }
    if (std::find(tokens.begin(), tokens.end(), trie.eos_) != tokens.end()) {
      throw Error(ErrorCode::kTokenizerNotRoundTrip,
                  "surface '" + surfaces[i] + "' encodes to the eos token");
    }
    tokens.push_back(trie.eos_);

    const std::uint32_t rank = trie.ranks_[i];
    NodeId node = kRoot;
    trie.nodes_[node].min_rank = std::min(trie.nodes_[node].min_rank, rank);
    for (TokenId t : tokens) {
      auto child = trie.Child(node, t);
      node = child ? *child : trie.AddChild(node, t);
      trie.nodes_[node].min_rank = std::min(trie.nodes_[node].min_rank, rank);
    }
    trie.nodes_[node].candidate = static_cast<std::int32_t>(i);
    ++trie.terminals_;
    trie.sequences_.push_back(std::move(tokens));
  }
  return trie;
}

CandidateTrie::NodeId CandidateTrie::AddChild(NodeId parent, TokenId token) {
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.emplace_back();
  auto &node = nodes_[parent];
  auto pos = std::lower_bound(node.children.begin(), node.children.end(), token,
                              [](const auto &edge, TokenId t) { return edge.first < t; });
  node.children.insert(pos, {token, id});
  if (node.index) {
    node.index->emplace(token, id);
  } else if (node.children.size() > kHashFanout) {
    node.index = std::make_unique<std::unordered_map<TokenId, NodeId>>(node.children.begin(),
                                                                      node.children.end());
  }
  return id;
}

std::optional<CandidateTrie::NodeId> CandidateTrie::Child(NodeId node, TokenId token) const {
  const auto &n = nodes_[node];
  if (n.index) {
    auto it = n.index->find(token);
    if (it == n.index->end()) return std::nullopt;
    return it->second;
  }
  auto pos = std::lower_bound(n.children.begin(), n.children.end(), token,
                              [](const auto &edge, TokenId t) { return edge.first < t; });
  if (pos == n.children.end() || pos->first != token) return std::nullopt;
  return pos->second;
}

CandidateTrie::NodeId CandidateTrie::Walk(std::span<const TokenId> prefix) const {
  NodeId node = kRoot;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    auto child = Child(node, prefix[i]);
    if (!child) {
      throw Error(ErrorCode::kInvalidPrefix, "prefix leaves the trie at position " +
                                                 std::to_string(i) + " (token " +
                                                 std::to_string(prefix[i]) + ")");
    }
    node = *child;
  }
  return node;
}

std::vector<TokenId> CandidateTrie::AllowedNext(std::span<const TokenId> prefix) const {
  const auto &children = nodes_[Walk(prefix)].children;
  std::vector<TokenId> out;
  out.reserve(children.size());
  for (const auto &[token, child] : children) out.push_back(token);
  return out;
}

}  // namespace edrep
