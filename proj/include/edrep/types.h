#pragma once

// Domain vocabulary shared by every module: titles, descriptions, candidate
// surfaces, mention spans, instances and the tokenizer contract.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edrep/error.h"

namespace edrep {

// Normalized Wikipedia page title: underscores replaced by spaces, NFC,
// trimmed, no tab or newline characters. Only constructible through
// NormalizeTitle() or FromNormalized(), so every instance is valid.
class EntityTitle {
 public:
  // Accepts a string that is already in normal form; throws kEmptyTitle or
  // kInvalidArgument otherwise.
  static EntityTitle FromNormalized(std::string value);

  const std::string &str() const { return value_; }
  std::string_view view() const { return value_; }

  friend bool operator==(const EntityTitle &, const EntityTitle &) = default;
  friend auto operator<=>(const EntityTitle &, const EntityTitle &) = default;

 private:
  explicit EntityTitle(std::string value) : value_(std::move(value)) {}
  friend EntityTitle NormalizeTitle(std::string_view raw);

  std::string value_;
};

// Underscores to spaces, control whitespace to spaces, NFC, trim.
// Idempotent. Throws Error(kEmptyTitle) when nothing is left.
EntityTitle NormalizeTitle(std::string_view raw);

// Short single-line entity description.
struct EntityDescription {
  std::string value;
  std::string language = "en";
};

inline constexpr std::string_view kRepresentationSeparator = ": ";

// Textual candidate representation: "title: description", or the bare title
// when no description is known.
class CandidateRepresentation {
 public:
  explicit CandidateRepresentation(EntityTitle title,
                                   std::optional<EntityDescription> description = std::nullopt);

  const EntityTitle &title() const { return title_; }
  const std::optional<EntityDescription> &description() const { return description_; }
  const std::string &surface() const { return surface_; }

 private:
  EntityTitle title_;
  std::optional<EntityDescription> description_;
  std::string surface_;
};

// Half-open byte range [start, end) into the owning UTF-8 text. Both ends lie
// on code point boundaries. File formats carry code point offsets; readers
// convert at the boundary.
struct MentionSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  friend bool operator==(const MentionSpan &, const MentionSpan &) = default;
};

struct EDInstance {
  std::string id;
  std::string text;
  MentionSpan mention;
  std::vector<EntityTitle> candidates;
  std::optional<EntityTitle> gold;

  std::string_view mention_text() const {
    return std::string_view(text).substr(mention.start, mention.size());
  }
  bool gold_in_candidates() const;
};

// Throws kInvalidSpan or kInvalidArgument when the instance invariants
// (span bounds, UTF-8 boundaries, distinct candidates) do not hold.
void ValidateInstance(const EDInstance &instance);

inline constexpr std::string_view kOpenMarker = "<s>";
inline constexpr std::string_view kCloseMarker = "</s>";

// Context with the mention wrapped as "<s> mention </s>".
struct MarkedContext {
  std::string value;
};

MarkedContext MarkMention(const EDInstance &instance);

// Inverse of MarkMention: drops "<s> " and " </s>". Throws kInvalidArgument if
// the markers are not present exactly once and in order.
std::string StripMarkers(std::string_view marked);

using TokenId = std::int32_t;

// Subword (or word) tokenizer contract. Implementations must be safe to call
// concurrently.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::vector<TokenId> Encode(std::string_view text) const = 0;
  virtual std::string Decode(const std::vector<TokenId> &tokens) const = 0;
  virtual TokenId bos_id() const = 0;
  virtual TokenId eos_id() const = 0;
};

// UTF-8 helpers used at every boundary that speaks code point offsets.
bool IsCodePointBoundary(std::string_view text, std::size_t byte_offset);
// Throws kInvalidSpan if the text has fewer code points than requested.
std::size_t ByteOffsetFromCodePoints(std::string_view text, std::size_t code_points);
std::size_t CodePointsFromByteOffset(std::string_view text, std::size_t byte_offset);

}  // namespace edrep
