#pragma once

// Client side of the model bridge: a child process speaking newline-delimited
// JSON on its standard input/output (protocol version 1).

#include <sys/types.h>

#include <cstdio>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "edrep/extractive.h"
#include "edrep/generative.h"
#include "json.hpp"

namespace edrep {

inline constexpr int kBridgeProtocolVersion = 1;

// One bridge child process. Requests are serialized; each call writes one
// line and reads one line back.
class BridgeProcess {
 public:
  // Runs `command` through /bin/sh -c.
  explicit BridgeProcess(const std::string &command);
  ~BridgeProcess();
  BridgeProcess(const BridgeProcess &) = delete;
  BridgeProcess &operator=(const BridgeProcess &) = delete;

  // Returns the response object. A response carrying "error" is thrown as
  // Error(error_code).
  nlohmann::json Call(const nlohmann::json &request, ErrorCode error_code = ErrorCode::kBridgeProtocol);

 private:
  std::mutex mu_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  std::FILE *from_child_ = nullptr;
};

enum class BridgeMode { kGenerative, kExtractive };

// Tokenizer and scorer backed by a bridge process. The handshake is checked
// on construction: version 1 and the required mode must be offered.
class BridgeClient : public Tokenizer, public TokenScorer, public SpanScorer {
 public:
  BridgeClient(std::shared_ptr<BridgeProcess> process, BridgeMode required);
  static std::shared_ptr<BridgeClient> Spawn(const std::string &command, BridgeMode required);

  std::vector<TokenId> Encode(std::string_view text) const override;
  std::string Decode(const std::vector<TokenId> &tokens) const override;
  TokenId bos_id() const override { return bos_; }
  TokenId eos_id() const override { return eos_; }

  std::vector<TokenLogprob> NextLogprobs(std::string_view marked_context,
                                         std::span<const TokenId> prefix,
                                         std::span<const TokenId> allowed) const override;
  // Spans on the wire are code point offsets into the context; returned spans
  // are byte offsets.
  SpanScores Score(std::string_view query, std::string_view context) const override;

  const std::vector<std::string> &modes() const { return modes_; }

 private:
  std::shared_ptr<BridgeProcess> process_;
  std::vector<std::string> modes_;
  TokenId bos_ = 0;
  TokenId eos_ = 0;
};

}  // namespace edrep
