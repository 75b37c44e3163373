#include "edrep/types.h"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <unordered_set>

namespace edrep {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyTitle: return "EmptyTitle";
    case ErrorCode::kCorruptStream: return "CorruptStream";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvalidSpan: return "InvalidSpan";
    case ErrorCode::kMissingGold: return "MissingGold";
    case ErrorCode::kTokenizerNotRoundTrip: return "TokenizerNotRoundTrip";
    case ErrorCode::kEmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::kInvalidPrefix: return "InvalidPrefix";
    case ErrorCode::kScorerFailure: return "ScorerFailure";
    case ErrorCode::kBudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::kNoTokens: return "NoTokens";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kEmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::kUnknownDatasetName: return "UnknownDatasetName";
    case ErrorCode::kMisalignedRecords: return "MisalignedRecords";
    case ErrorCode::kBridgeProtocol: return "BridgeProtocol";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

bool IsAscii(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string ToNfc(std::string s) {
  if (IsAscii(s)) return s;
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kInvalidArgument, "ICU NFC normalizer unavailable");
  }
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(s);
  if (nfc->isNormalized(u, status) && U_SUCCESS(status)) return s;
  status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc->normalize(u, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kInvalidArgument, "NFC normalization failed");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

bool IsNormalizedTitle(std::string_view s) {
  if (s.empty()) return false;
  if (IsSpace(s.front()) || IsSpace(s.back())) return false;
  for (char c : s) {
    if (c == '_' || (IsSpace(c) && c != ' ')) return false;
  }
  return true;
}

}  // namespace

EntityTitle NormalizeTitle(std::string_view raw) {
  std::string s(raw);
  for (char &c : s) {
    if (c == '_' || IsSpace(c)) c = ' ';
  }
  s = ToNfc(std::move(s));
  auto first = s.find_first_not_of(' ');
  if (first == std::string::npos) {
    throw Error(ErrorCode::kEmptyTitle, "title is empty after normalization: '" +
                                            std::string(raw) + "'");
  }
  auto last = s.find_last_not_of(' ');
  return EntityTitle(s.substr(first, last - first + 1));
}

EntityTitle EntityTitle::FromNormalized(std::string value) {
  if (value.empty()) throw Error(ErrorCode::kEmptyTitle, "empty title");
  if (!IsNormalizedTitle(value) || ToNfc(value) != value) {
    throw Error(ErrorCode::kInvalidArgument, "title is not normalized: '" + value + "'");
  }
  return EntityTitle(std::move(value));
}

CandidateRepresentation::CandidateRepresentation(EntityTitle title,
                                                 std::optional<EntityDescription> description)
    : title_(std::move(title)), description_(std::move(description)) {
  surface_ = title_.str();
  if (description_) {
    surface_ += kRepresentationSeparator;
    surface_ += description_->value;
  }
}

bool EDInstance::gold_in_candidates() const {
  return gold && std::find(candidates.begin(), candidates.end(), *gold) != candidates.end();
}

void ValidateInstance(const EDInstance &instance) {
  const auto &span = instance.mention;
  if (!(span.start < span.end && span.end <= instance.text.size())) {
    throw Error(ErrorCode::kInvalidSpan,
                "mention [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                    ") out of bounds for text of " + std::to_string(instance.text.size()) +
                    " bytes in instance '" + instance.id + "'");
  }
  if (!IsCodePointBoundary(instance.text, span.start) ||
      !IsCodePointBoundary(instance.text, span.end)) {
    throw Error(ErrorCode::kInvalidSpan,
                "mention does not fall on code point boundaries in instance '" + instance.id + "'");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto &c : instance.candidates) {
    if (!seen.insert(c.view()).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate candidate '" + c.str() + "' in instance '" + instance.id + "'");
    }
  }
}

MarkedContext MarkMention(const EDInstance &instance) {
  const std::string &text = instance.text;
  const auto &span = instance.mention;
  std::string out;
  out.reserve(text.size() + kOpenMarker.size() + kCloseMarker.size() + 2);
  out.append(text, 0, span.start);
  out += kOpenMarker;
  out += ' ';
  out.append(text, span.start, span.size());
  out += ' ';
  out += kCloseMarker;
  out.append(text, span.end, std::string::npos);
  return MarkedContext{std::move(out)};
}

std::string StripMarkers(std::string_view marked) {
  const std::string open = std::string(kOpenMarker) + " ";
  const std::string close = " " + std::string(kCloseMarker);
  auto o = marked.find(open);
  auto c = marked.find(close);
  if (o == std::string_view::npos || c == std::string_view::npos || c < o + open.size() ||
      marked.find(open, o + 1) != std::string_view::npos ||
      marked.find(close, c + 1) != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "markers missing or out of order");
  }
  std::string out;
  out.reserve(marked.size());
  out.append(marked.substr(0, o));
  out.append(marked.substr(o + open.size(), c - o - open.size()));
  out.append(marked.substr(c + close.size()));
  return out;
}

bool IsCodePointBoundary(std::string_view text, std::size_t byte_offset) {
  if (byte_offset == 0 || byte_offset == text.size()) return true;
  if (byte_offset > text.size()) return false;
  return (static_cast<unsigned char>(text[byte_offset]) & 0xC0) != 0x80;
}

std::size_t ByteOffsetFromCodePoints(std::string_view text, std::size_t code_points) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) continue;
    if (seen == code_points) return i;
    ++seen;
  }
  if (seen == code_points) return text.size();
  throw Error(ErrorCode::kInvalidSpan, "offset " + std::to_string(code_points) +
                                           " beyond text of " + std::to_string(seen) +
                                           " code points");
}

std::size_t CodePointsFromByteOffset(std::string_view text, std::size_t byte_offset) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < byte_offset && i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace edrep
