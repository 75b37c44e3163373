#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "edrep/types.h"

namespace edrep {

// Token-level prefix tree over tokenized candidate surfaces.
//
// Each surface is inserted as encode(surface) followed by the tokenizer's eos
// id; eos is an ordinary edge and the node it reaches is the terminal for
// that candidate. Terminal nodes have no children.
class CandidateTrie {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;
  // Nodes with more children than this also get a hash index.
  static constexpr std::size_t kHashFanout = 16;

  // Throws kEmptyCandidateSet, kTokenizerNotRoundTrip, or kInvalidArgument
  // for duplicate surfaces.
  static CandidateTrie Build(std::span<const std::string> surfaces, const Tokenizer &tokenizer);
  static CandidateTrie Build(std::span<const CandidateRepresentation> reps,
                             const Tokenizer &tokenizer);

  // Tokens t such that prefix ++ [t] is a prefix of some inserted sequence,
  // sorted ascending. Empty once a terminal has been reached. Throws
  // kInvalidPrefix if the prefix leaves the trie.
  std::vector<TokenId> AllowedNext(std::span<const TokenId> prefix) const;

  // Node reached by `prefix`, or throws kInvalidPrefix.
  NodeId Walk(std::span<const TokenId> prefix) const;
  // Child along `token`, or nullopt.
  std::optional<NodeId> Child(NodeId node, TokenId token) const;
  // Sorted (token, child) edges.
  std::span<const std::pair<TokenId, NodeId>> Children(NodeId node) const {
    return nodes_[node].children;
  }
  bool IsTerminal(NodeId node) const { return nodes_[node].candidate >= 0; }
  // Candidate index of a terminal node, -1 otherwise.
  std::int32_t Candidate(NodeId node) const { return nodes_[node].candidate; }
  // Smallest rank, in lexicographic surface order, of any candidate below
  // `node`. Used to break score ties consistently with the final ranking.
  std::uint32_t MinRank(NodeId node) const { return nodes_[node].min_rank; }
  std::uint32_t Rank(std::size_t candidate) const { return ranks_[candidate]; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t terminal_count() const { return terminals_; }
  std::size_t candidate_count() const { return sequences_.size(); }
  TokenId eos_id() const { return eos_; }
  // encode(surface) ++ [eos] of candidate i.
  const std::vector<TokenId> &Sequence(std::size_t candidate) const { return sequences_[candidate]; }

 private:
  struct Node {
    std::vector<std::pair<TokenId, NodeId>> children;
    std::unique_ptr<std::unordered_map<TokenId, NodeId>> index;
    std::int32_t candidate = -1;
    std::uint32_t min_rank = UINT32_MAX;
  };

  NodeId AddChild(NodeId parent, TokenId token);

  std::vector<Node> nodes_;
  std::vector<std::vector<TokenId>> sequences_;
  std::vector<std::uint32_t> ranks_;
  std::size_t terminals_ = 0;
  TokenId eos_ = 0;
};

}  // namespace edrep
