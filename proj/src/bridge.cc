#include "edrep/bridge.h"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <limits>

namespace edrep {

namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string &msg) { throw Error(ErrorCode::kBridgeProtocol, msg); }

void WriteAll(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      Fail(std::string("write to bridge failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

const json &Field(const json &response, const char *name) {
  auto it = response.find(name);
  if (it == response.end()) Fail(std::string("response lacks \"") + name + "\"");
  return *it;
}

TokenId AsToken(const json &v) {
  if (!v.is_number_integer()) Fail("token id is not an integer");
  return v.get<TokenId>();
}

// Non-numbers (null stands in for inf/nan) become NaN so the decoders report
// them as scorer failures.
double AsReal(const json &v) {
  return v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

BridgeProcess::BridgeProcess(const std::string &command) {
  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) Fail("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    Fail("pipe failed");
  }
  // A bridge dying mid-write must not kill us.
  ::signal(SIGPIPE, SIG_IGN);
  pid_ = ::fork();
  if (pid_ < 0) Fail("fork failed");
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char *>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = ::fdopen(out_pipe[0], "r");
  if (!from_child_) Fail("fdopen failed");
}

BridgeProcess::~BridgeProcess() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_) std::fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }
}

json BridgeProcess::Call(const json &request, ErrorCode error_code) {
  std::string line;
  {
    std::lock_guard lock(mu_);
    WriteAll(to_child_, request.dump() + "\n");
    char buf[1 << 16];
    while (true) {
      if (!std::fgets(buf, sizeof buf, from_child_)) {
        Fail("bridge closed its output");
      }
      line += buf;
      if (!line.empty() && line.back() == '\n') break;
    }
  }
  json response = json::parse(line, nullptr, false);
  if (response.is_discarded() || !response.is_object()) Fail("response is not a JSON object");
  if (auto it = response.find("error"); it != response.end()) {
    throw Error(error_code, "bridge: " + (it->is_string() ? it->get<std::string>() : it->dump()));
  }
  return response;
}

BridgeClient::BridgeClient(std::shared_ptr<BridgeProcess> process, BridgeMode required)
    : process_(std::move(process)) {
  auto hello = process_->Call({{"op", "handshake"}});
  if (hello.value("ok", false) != true) Fail("handshake not acknowledged");
  const auto &version = Field(hello, "version");
  if (!version.is_number_integer() || version.get<int>() != kBridgeProtocolVersion) {
    Fail("unsupported protocol version " + version.dump());
  }
  for (const auto &m : Field(hello, "modes")) {
    if (m.is_string()) modes_.push_back(m.get<std::string>());
  }
  const std::string want = required == BridgeMode::kGenerative ? "generative" : "extractive";
  bool offered = false;
  for (const auto &m : modes_) offered = offered || m == want || m == "both";
  if (!offered) Fail("bridge does not offer mode '" + want + "'");
  bos_ = AsToken(Field(process_->Call({{"op", "special"}, {"which", "bos"}}), "id"));
  eos_ = AsToken(Field(process_->Call({{"op", "special"}, {"which", "eos"}}), "id"));
}

std::shared_ptr<BridgeClient> BridgeClient::Spawn(const std::string &command,
                                                  BridgeMode required) {
  return std::make_shared<BridgeClient>(std::make_shared<BridgeProcess>(command), required);
}

std::vector<TokenId> BridgeClient::Encode(std::string_view text) const {
  auto r = process_->Call({{"op", "encode"}, {"text", text}});
  const auto &tokens = Field(r, "tokens");
  if (!tokens.is_array()) Fail("\"tokens\" is not an array");
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto &t : tokens) out.push_back(AsToken(t));
  return out;
}

std::string BridgeClient::Decode(const std::vector<TokenId> &tokens) const {
  auto r = process_->Call({{"op", "decode"}, {"tokens", tokens}});
  const auto &text = Field(r, "text");
  if (!text.is_string()) Fail("\"text\" is not a string");
  return text.get<std::string>();
}

std::vector<TokenLogprob> BridgeClient::NextLogprobs(std::string_view marked_context,
                                                     std::span<const TokenId> prefix,
                                                     std::span<const TokenId> allowed) const {
  json req = {{"op", "next_logprobs"},
              {"context", marked_context},
              {"prefix", std::vector<TokenId>(prefix.begin(), prefix.end())},
              {"allowed", std::vector<TokenId>(allowed.begin(), allowed.end())}};
  auto r = process_->Call(req, ErrorCode::kScorerFailure);
  const auto &lp = Field(r, "logprobs");
  if (!lp.is_array() || lp.size() != allowed.size()) {
    throw Error(ErrorCode::kScorerFailure, "logprobs not aligned with the allowed tokens");
  }
  std::vector<TokenLogprob> out;
  out.reserve(allowed.size());
  for (std::size_t i = 0; i < allowed.size(); ++i) out.push_back({allowed[i], AsReal(lp[i])});
  return out;
}

SpanScores BridgeClient::Score(std::string_view query, std::string_view context) const {
  auto r = process_->Call({{"op", "span_scores"}, {"query", query}, {"context", context}},
                          ErrorCode::kScorerFailure);
  const auto &spans = Field(r, "spans");
  const auto &start = Field(r, "start");
  const auto &end = Field(r, "end");
  if (!spans.is_array() || !start.is_array() || !end.is_array()) {
    throw Error(ErrorCode::kScorerFailure, "span_scores fields are not arrays");
  }
  SpanScores out;
  out.token_spans.reserve(spans.size());
  for (const auto &s : spans) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_unsigned() ||
        !s[1].is_number_unsigned()) {
      throw Error(ErrorCode::kScorerFailure, "malformed span " + s.dump());
    }
    try {
      out.token_spans.push_back({ByteOffsetFromCodePoints(context, s[0].get<std::size_t>()),
                                 ByteOffsetFromCodePoints(context, s[1].get<std::size_t>())});
    } catch (const Error &e) {
      throw Error(ErrorCode::kScorerFailure, std::string("span out of range: ") + e.what());
    }
  }
  for (const auto &v : start) out.start.push_back(AsReal(v));
  for (const auto &v : end) out.end.push_back(AsReal(v));
  return out;
}

}  // namespace edrep
