#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edrep/types.h"

namespace edrep {

struct DescriptionMapMeta {
  std::string dump_date = "unknown";
  std::string language = "en";
};

// Sorted mapping from normalized Wikipedia title to description.
//
// Entries live in fixed-size arena blocks laid out exactly as the persisted
// TSV lines ("title\tdescription\n"), so the map costs little more than its
// file size and can be written out without reformatting.
//
// Persisted form: one header line
//   "#edrep-descriptions\tdump_date=<d>\tlanguage=<l>\tentries=<n>"
// followed by "title\tdescription" lines sorted by title byte order.
class DescriptionMap {
 public:
  DescriptionMap() = default;
  DescriptionMap(DescriptionMap &&) noexcept = default;
  DescriptionMap &operator=(DescriptionMap &&) noexcept = default;

  std::optional<EntityDescription> Lookup(const EntityTitle &title) const;
  std::optional<std::string_view> LookupView(std::string_view title) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const DescriptionMapMeta &meta() const { return meta_; }

  void Write(std::ostream &out) const;
  void WriteFile(const std::string &path) const;
  static DescriptionMap Read(std::istream &in);
  static DescriptionMap ReadFile(const std::string &path);

  // Visits entries in sorted order.
  template <typename Fn>
  void ForEach(Fn &&fn) const {
    for (const auto &e : entries_) fn(Title(e), Description(e));
  }

 private:
  friend class DescriptionMapBuilder;

  // 12 bytes per entry. (block, offset) order equals insertion order, which
  // makes the keep-first tie-break an in-place sort key.
  struct Entry {
    std::uint32_t block;
    std::uint32_t offset;
    std::uint16_t title_size;
    std::uint16_t description_size;
  };

  const char *Data(const Entry &e) const { return blocks_[e.block].get() + e.offset; }
  std::string_view Title(const Entry &e) const { return {Data(e), e.title_size}; }
  std::string_view Description(const Entry &e) const {
    return {Data(e) + e.title_size + 1, e.description_size};
  }
  // Full TSV line including the trailing newline.
  std::string_view Line(const Entry &e) const {
    return {Data(e), std::size_t{e.title_size} + e.description_size + 2};
  }
  // Sorts by (title, insertion order) and drops later duplicates.
  std::uint64_t SortAndDeduplicate();

  DescriptionMapMeta meta_;
  std::vector<std::unique_ptr<char[]>> blocks_;
  std::vector<Entry> entries_;
};

// Accumulates entries in insertion order and produces a sorted map.
// Duplicate titles keep the first inserted entry and are counted.
class DescriptionMapBuilder {
 public:
  explicit DescriptionMapBuilder(DescriptionMapMeta meta, std::size_t block_size = 32u << 20);

  static constexpr std::size_t kMaxFieldSize = 0xFFFF;

  // Title must already be normalized; description must be single-line.
  // Returns false (and stores nothing) if either field exceeds kMaxFieldSize.
  bool Add(std::string_view title, std::string_view description);

  std::uint64_t added() const { return added_; }
  DescriptionMap Build(std::uint64_t *collisions = nullptr) &&;

 private:
  static constexpr std::size_t kIndexChunk = 1u << 16;

  DescriptionMapMeta meta_;
  std::size_t block_size_;
  std::vector<std::unique_ptr<char[]>> blocks_;
  std::size_t block_used_ = 0;
  std::size_t block_capacity_ = 0;
  // Chunked so the index never needs a reallocating copy while streaming.
  std::vector<std::vector<DescriptionMap::Entry>> index_;
  std::uint64_t added_ = 0;
};

// Replaces tabs, newlines and other control whitespace by single spaces.
std::string SanitizeDescription(std::string_view raw);

}  // namespace edrep
