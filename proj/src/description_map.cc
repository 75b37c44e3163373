#include "edrep/description_map.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace edrep {

namespace {

constexpr std::string_view kHeaderTag = "#edrep-descriptions";

std::string HeaderLine(const DescriptionMapMeta &meta, std::size_t entries) {
  std::string line(kHeaderTag);
  line += "\tdump_date=" + meta.dump_date;
  line += "\tlanguage=" + meta.language;
  line += "\tentries=" + std::to_string(entries);
  return line;
}

DescriptionMapMeta ParseHeader(std::string_view line) {
  DescriptionMapMeta meta;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    auto next = line.find('\t', pos);
    if (next == std::string_view::npos) next = line.size();
    auto field = line.substr(pos, next - pos);
    auto eq = field.find('=');
    if (eq != std::string_view::npos) {
      auto key = field.substr(0, eq);
      auto value = std::string(field.substr(eq + 1));
      if (key == "dump_date") meta.dump_date = value;
      if (key == "language") meta.language = value;
    }
    pos = next + 1;
  }
  return meta;
}

}  // namespace

std::string SanitizeDescription(std::string_view raw) {
  std::string out(raw);
  for (char &c : out) {
    if (c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') c = ' ';
  }
  return out;
}

std::optional<std::string_view> DescriptionMap::LookupView(std::string_view title) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), title,
                             [this](const Entry &e, std::string_view t) { return Title(e) < t; });
  if (it == entries_.end() || Title(*it) != title) return std::nullopt;
  return Description(*it);
}

std::optional<EntityDescription> DescriptionMap::Lookup(const EntityTitle &title) const {
  auto found = LookupView(title.view());
  if (!found) return std::nullopt;
  return EntityDescription{std::string(*found), meta_.language};
}

std::uint64_t DescriptionMap::SortAndDeduplicate() {
  std::sort(entries_.begin(), entries_.end(), [this](const Entry &a, const Entry &b) {
    int cmp = Title(a).compare(Title(b));
    if (cmp != 0) return cmp < 0;
    if (a.block != b.block) return a.block < b.block;
    return a.offset < b.offset;
  });
  auto last = std::unique(entries_.begin(), entries_.end(),
                          [this](const Entry &a, const Entry &b) { return Title(a) == Title(b); });
  auto collisions = static_cast<std::uint64_t>(entries_.end() - last);
  entries_.erase(last, entries_.end());
  return collisions;
}

void DescriptionMap::Write(std::ostream &out) const {
  out << HeaderLine(meta_, entries_.size()) << '\n';
  for (const auto &e : entries_) {
    auto line = Line(e);
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing description map");
}

void DescriptionMap::WriteFile(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  std::vector<char> buffer(1 << 20);
  out.rdbuf()->pubsetbuf(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  Write(out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path + "'");
}

DescriptionMap DescriptionMap::Read(std::istream &in) {
  std::string line;
  DescriptionMapMeta meta;
  std::uint64_t line_no = 0;
  std::optional<DescriptionMapBuilder> builder;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with(kHeaderTag)) {
      meta = ParseHeader(line);
      continue;
    }
    if (!builder) builder.emplace(meta);
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::kParseError,
                  "description map line " + std::to_string(line_no) + ": expected title<TAB>description");
    }
    std::string_view view(line);
    if (!builder->Add(view.substr(0, tab), SanitizeDescription(view.substr(tab + 1)))) {
      throw Error(ErrorCode::kParseError,
                  "description map line " + std::to_string(line_no) + ": field too long");
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "failed reading description map");
  if (!builder) builder.emplace(meta);
  return std::move(*builder).Build();
}

DescriptionMap DescriptionMap::ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return Read(in);
}

DescriptionMapBuilder::DescriptionMapBuilder(DescriptionMapMeta meta, std::size_t block_size)
    : meta_(std::move(meta)), block_size_(block_size) {}

bool DescriptionMapBuilder::Add(std::string_view title, std::string_view description) {
  if (title.size() > kMaxFieldSize || description.size() > kMaxFieldSize) return false;
  const std::size_t need = title.size() + description.size() + 2;
  if (blocks_.empty() || block_used_ + need > block_capacity_) {
    block_capacity_ = std::max(block_size_, need);
    // Left uninitialized: untouched pages are never resident.
    blocks_.push_back(std::unique_ptr<char[]>(new char[block_capacity_]));
    block_used_ = 0;
  }
  char *dst = blocks_.back().get() + block_used_;
  std::memcpy(dst, title.data(), title.size());
  dst[title.size()] = '\t';
  std::memcpy(dst + title.size() + 1, description.data(), description.size());
  dst[need - 1] = '\n';

  if (index_.empty() || index_.back().size() == kIndexChunk) {
    index_.emplace_back();
    index_.back().reserve(kIndexChunk);
  }
  index_.back().push_back({static_cast<std::uint32_t>(blocks_.size() - 1),
                           static_cast<std::uint32_t>(block_used_),
                           static_cast<std::uint16_t>(title.size()),
                           static_cast<std::uint16_t>(description.size())});
  block_used_ += need;
  ++added_;
  return true;
}

DescriptionMap DescriptionMapBuilder::Build(std::uint64_t *collisions) && {
  DescriptionMap map;
  map.meta_ = std::move(meta_);
  map.blocks_ = std::move(blocks_);
  map.entries_.reserve(added_);
  for (auto &chunk : index_) {
    map.entries_.insert(map.entries_.end(), chunk.begin(), chunk.end());
    std::vector<DescriptionMap::Entry>().swap(chunk);
  }
  index_.clear();
  std::uint64_t dropped = map.SortAndDeduplicate();
  if (collisions) *collisions = dropped;
  return map;
}

}  // namespace edrep
