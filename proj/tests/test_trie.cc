#include <algorithm>
#include <set>

#include "doctest.h"
#include "edrep/tokenizers.h"
#include "edrep/trie.h"
#include "oracles.h"
#include "test_util.h"

using namespace edrep;

TEST_CASE("trie allowed_next matches the brute-force prefix filter") {
  std::mt19937 rng(11);
  WhitespaceTokenizer ws;
  ByteTokenizer bt;
  for (int trial = 0; trial < 200; ++trial) {
    const Tokenizer &tok = trial % 2 ? static_cast<const Tokenizer &>(bt) : ws;
    std::uniform_int_distribution<std::size_t> n(1, 40);
    auto surfaces = testing::RandomSurfaces(rng, n(rng));
    auto trie = CandidateTrie::Build(surfaces, tok);
    std::vector<std::vector<TokenId>> seqs;
    for (const auto &s : surfaces) {
      auto t = tok.Encode(s);
      t.push_back(tok.eos_id());
      seqs.push_back(t);
    }
    CHECK(trie.terminal_count() == surfaces.size());
    std::set<std::vector<TokenId>> prefixes;
    for (const auto &s : seqs) {
      for (std::size_t k = 0; k <= s.size(); ++k) prefixes.insert({s.begin(), s.begin() + k});
    }
    for (const auto &p : prefixes) {
      REQUIRE(trie.AllowedNext(p) == oracle::AllowedNext(seqs, p));
    }
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
      auto node = trie.Walk(seqs[i]);
      CHECK(trie.IsTerminal(node));
      CHECK(trie.Candidate(node) == static_cast<int>(i));
      CHECK(trie.Sequence(i) == seqs[i]);
    }
  }
}

TEST_CASE("trie rejects bad input") {
  WhitespaceTokenizer ws;
  std::vector<std::string> none;
  CHECK_THROWS_AS(CandidateTrie::Build(none, ws), Error);
  std::vector<std::string> dup{"a b", "a b"};
  CHECK_THROWS_AS(CandidateTrie::Build(dup, ws), Error);
  std::vector<std::string> spaced{"a  b"};
  try {
    CandidateTrie::Build(spaced, ws);
    FAIL("expected a round-trip failure");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kTokenizerNotRoundTrip);
  }
  std::vector<std::string> ok{"a b", "a c"};
  auto trie = CandidateTrie::Build(ok, ws);
  std::vector<TokenId> bogus{ws.Encode("zzz")[0]};
  try {
    trie.AllowedNext(bogus);
    FAIL("expected an invalid prefix");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kInvalidPrefix);
  }
}

TEST_CASE("high fan-out nodes use the hash index") {
  ByteTokenizer bt;
  std::vector<std::string> surfaces;
  for (char c = 'A'; c <= 'Z'; ++c) surfaces.push_back(std::string("x") + c);
  auto trie = CandidateTrie::Build(surfaces, bt);
  auto allowed = trie.AllowedNext(bt.Encode("x"));
  CHECK(allowed.size() == 26);
  CHECK(std::is_sorted(allowed.begin(), allowed.end()));
  for (char c = 'A'; c <= 'Z'; ++c) CHECK(trie.Child(trie.Walk(bt.Encode("x")), c).has_value());
}
