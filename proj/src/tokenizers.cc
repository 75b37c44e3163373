#include "edrep/tokenizers.h"

#include <mutex>

namespace edrep {

TokenId WhitespaceTokenizer::Intern(std::string_view word) const {
  std::string key(word);
  {
    std::shared_lock lock(mu_);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
  }
  std::unique_lock lock(mu_);
  auto [it, inserted] = ids_.try_emplace(key, static_cast<TokenId>(words_.size()));
  if (inserted) words_.push_back(std::move(key));
  return it->second;
}

std::vector<TokenId> WhitespaceTokenizer::Encode(std::string_view text) const {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto next = text.find(' ', pos);
    if (next == std::string_view::npos) next = text.size();
    if (next > pos) out.push_back(Intern(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

std::string WhitespaceTokenizer::Decode(const std::vector<TokenId> &tokens) const {
  std::shared_lock lock(mu_);
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    TokenId t = tokens[i];
    if (t < 2 || static_cast<std::size_t>(t) >= words_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown token id " + std::to_string(t));
    }
    if (i) out += ' ';
    out += words_[t];
  }
  return out;
}

std::size_t WhitespaceTokenizer::vocab_size() const {
  std::shared_lock lock(mu_);
  return words_.size();
}

std::vector<TokenId> ByteTokenizer::Encode(std::string_view text) const {
  std::vector<TokenId> out;
  out.reserve(text.size());
  for (char c : text) out.push_back(static_cast<unsigned char>(c));
  return out;
}

std::string ByteTokenizer::Decode(const std::vector<TokenId> &tokens) const {
  std::string out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) {
    if (t < 0 || t > 255) {
      throw Error(ErrorCode::kInvalidArgument, "not a byte token: " + std::to_string(t));
    }
    out += static_cast<char>(t);
  }
  return out;
}

}  // namespace edrep
