#pragma once

#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "edrep/types.h"

namespace edrep {

// Splits on single spaces and interns every word into a growing vocabulary.
// Decode joins with single spaces, so only strings without leading, trailing
// or repeated spaces round-trip.
class WhitespaceTokenizer : public Tokenizer {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;

  std::vector<TokenId> Encode(std::string_view text) const override;
  std::string Decode(const std::vector<TokenId> &tokens) const override;
  TokenId bos_id() const override { return kBos; }
  TokenId eos_id() const override { return kEos; }

  std::size_t vocab_size() const;

 private:
  TokenId Intern(std::string_view word) const;

  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, TokenId> ids_;
  mutable std::vector<std::string> words_{"<bos>", "<eos>"};
};

// One token per UTF-8 byte. Round-trips every string.
class ByteTokenizer : public Tokenizer {
 public:
  static constexpr TokenId kBos = 256;
  static constexpr TokenId kEos = 257;

  std::vector<TokenId> Encode(std::string_view text) const override;
  std::string Decode(const std::vector<TokenId> &tokens) const override;
  TokenId bos_id() const override { return kBos; }
  TokenId eos_id() const override { return kEos; }
};

}  // namespace edrep
