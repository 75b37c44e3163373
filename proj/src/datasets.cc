#include "edrep/datasets.h"

#include <deque>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

namespace edrep {

using json = nlohmann::json;

DatasetFormat ParseDatasetFormat(std::string_view name) {
  if (name == "canonical-jsonl" || name == "jsonl") return DatasetFormat::kCanonicalJsonl;
  if (name == "aida-conll" || name == "aida") return DatasetFormat::kAidaConll;
  throw Error(ErrorCode::kInvalidArgument, "unknown dataset format '" + std::string(name) + "'");
}

CandidateSidecar ReadCandidateSidecar(std::istream &in) {
  CandidateSidecar out;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("mention_id") ||
        !record["mention_id"].is_string() || !record.contains("candidates") ||
        !record["candidates"].is_array()) {
      throw Error(ErrorCode::kParseError,
                  "candidate sidecar line " + std::to_string(line_no) + ": malformed record");
    }
    std::vector<std::string> titles;
    for (const auto &c : record["candidates"]) {
      if (!c.is_string()) {
        throw Error(ErrorCode::kParseError,
                    "candidate sidecar line " + std::to_string(line_no) + ": non-string title");
      }
      titles.push_back(c.get<std::string>());
    }
    out[record["mention_id"].get<std::string>()] = std::move(titles);
  }
  return out;
}

CandidateSidecar ReadCandidateSidecarFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return ReadCandidateSidecar(in);
}

namespace {

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find('\t', pos);
    if (next == std::string_view::npos) {
      cols.push_back(line.substr(pos));
      return cols;
    }
    cols.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

void AppendUtf8(std::string &out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// YAGO entity names escape non-ASCII characters as \uXXXX.
std::string UnescapeYago(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 5 < s.size() && s[i + 1] == 'u') {
      std::uint32_t cp = 0;
      bool ok = true;
      for (std::size_t k = 2; k < 6 && ok; ++k) {
        char c = s[i + k];
        cp <<= 4;
        if (c >= '0' && c <= '9') cp |= c - '0';
        else if (c >= 'a' && c <= 'f') cp |= c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') cp |= c - 'A' + 10;
        else ok = false;
      }
      if (ok) {
        AppendUtf8(out, cp);
        i += 5;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

}  // namespace

struct DatasetReader::AidaState {
  struct Mention {
    std::size_t start;
    std::size_t end;
    std::string entity;  // empty for --NME--
    std::size_t ordinal;
  };

  std::string doc_id;
  std::string text;
  bool sentence_open = false;
  bool in_doc = false;
  std::vector<Mention> mentions;
  std::optional<std::size_t> open_mention;
  std::uint64_t doc_count = 0;
  std::deque<EDInstance> ready;
  bool eof = false;

  void AppendToken(std::string_view token) {
    if (!text.empty()) text += sentence_open ? ' ' : '\n';
    sentence_open = true;
    text += token;
  }
};

DatasetReader::DatasetReader(std::istream &in, DatasetFormat format,
                             const CandidateSidecar *sidecar)
    : in_(in), format_(format), sidecar_(sidecar) {
  if (format_ == DatasetFormat::kAidaConll) aida_ = std::make_unique<AidaState>();
}

DatasetReader::~DatasetReader() = default;

std::optional<EDInstance> DatasetReader::Next() {
  auto instance = format_ == DatasetFormat::kCanonicalJsonl ? NextJsonl() : NextAida();
  if (instance) ++counters_.instances;
  return instance;
}

EDInstance DatasetReader::Finalize(EDInstance instance, std::vector<std::string> raw_candidates) {
  if (sidecar_) {
    auto it = sidecar_->find(instance.id);
    if (it != sidecar_->end()) {
      raw_candidates = it->second;
    } else {
      ++counters_.missing_candidate_sets;
    }
  }
  std::unordered_set<std::string> seen;
  instance.candidates.clear();
  for (const auto &raw : raw_candidates) {
    EntityTitle title = [&] {
      try {
        return NormalizeTitle(raw);
      } catch (const Error &e) {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no_) + ": " + e.what());
      }
    }();
    if (!seen.insert(title.str()).second) {
      ++counters_.duplicate_candidates;
      continue;
    }
    instance.candidates.push_back(std::move(title));
  }
  if (instance.gold && !instance.gold_in_candidates()) ++counters_.gold_not_in_candidates;
  ValidateInstance(instance);
  return instance;
}

std::optional<EDInstance> DatasetReader::NextJsonl() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string &why) -> Error {
      return Error(ErrorCode::kParseError, "line " + std::to_string(line_no_) + ": " + why);
    };
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded()) throw fail("invalid JSON");
    if (!record.is_object()) throw fail("expected an object");
    if (!record.contains("id") || !record["id"].is_string()) throw fail("missing string 'id'");
    if (!record.contains("text") || !record["text"].is_string()) throw fail("missing string 'text'");
    const auto &mention = record.value("mention", json());
    if (!mention.is_object() || !mention.contains("start") || !mention.contains("end") ||
        !mention["start"].is_number_unsigned() || !mention["end"].is_number_unsigned()) {
      throw fail("missing 'mention' {start, end}");
    }
    EDInstance instance;
    instance.id = record["id"].get<std::string>();
    instance.text = record["text"].get<std::string>();
    auto start = mention["start"].get<std::size_t>();
    auto end = mention["end"].get<std::size_t>();
    if (start >= end) {
      throw Error(ErrorCode::kInvalidSpan, "line " + std::to_string(line_no_) +
                                               ": empty or reversed mention span");
    }
    try {
      instance.mention.start = ByteOffsetFromCodePoints(instance.text, start);
      instance.mention.end = ByteOffsetFromCodePoints(instance.text, end);
    } catch (const Error &e) {
      throw Error(ErrorCode::kInvalidSpan, "line " + std::to_string(line_no_) + ": " + e.what());
    }
    std::vector<std::string> candidates;
    if (record.contains("candidates")) {
      if (!record["candidates"].is_array()) throw fail("'candidates' must be an array");
      for (const auto &c : record["candidates"]) {
        if (!c.is_string()) throw fail("non-string candidate");
        candidates.push_back(c.get<std::string>());
      }
    }
    if (record.contains("gold") && !record["gold"].is_null()) {
      if (!record["gold"].is_string()) throw fail("'gold' must be a string or null");
      try {
        instance.gold = NormalizeTitle(record["gold"].get<std::string>());
      } catch (const Error &e) {
        throw fail(e.what());
      }
    }
    return Finalize(std::move(instance), std::move(candidates));
  }
  if (in_.bad()) throw Error(ErrorCode::kIo, "read failure");
  return std::nullopt;
}

std::optional<EDInstance> DatasetReader::NextAida() {
  auto &st = *aida_;
  auto flush_document = [&] {
    for (const auto &m : st.mentions) {
      if (m.entity.empty()) continue;
      EDInstance instance;
      instance.id = st.doc_id + "#" + std::to_string(m.ordinal);
      instance.text = st.text;
      instance.mention = {m.start, m.end};
      try {
        instance.gold = NormalizeTitle(m.entity);
      } catch (const Error &e) {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no_) + ": " + e.what());
      }
      st.ready.push_back(Finalize(std::move(instance), {}));
    }
    st.text.clear();
    st.mentions.clear();
    st.open_mention.reset();
    st.sentence_open = false;
  };

  std::string line;
  while (st.ready.empty() && !st.eof) {
    if (!std::getline(in_, line)) {
      if (in_.bad()) throw Error(ErrorCode::kIo, "read failure");
      st.eof = true;
      if (st.in_doc) flush_document();
      break;
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with("-DOCSTART-")) {
      if (st.in_doc) flush_document();
      st.in_doc = true;
      auto open = line.find('(');
      auto close = line.rfind(')');
      if (open != std::string::npos && close != std::string::npos && close > open) {
        st.doc_id = line.substr(open + 1, close - open - 1);
      } else {
        st.doc_id = "doc" + std::to_string(st.doc_count);
      }
      ++st.doc_count;
      continue;
    }
    if (line.empty()) {
      st.sentence_open = false;
      st.open_mention.reset();
      continue;
    }
    if (!st.in_doc) {
      st.in_doc = true;
      st.doc_id = "doc" + std::to_string(st.doc_count++);
    }
    auto cols = SplitTabs(line);
    if (cols[0].empty()) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no_) + ": empty token");
    }
    st.AppendToken(cols[0]);
    const std::size_t token_end = st.text.size();
    const std::size_t token_start = token_end - cols[0].size();
    if (cols.size() >= 3 && cols[1] == "B") {
      std::string entity;
      if (cols.size() >= 4 && cols[3] != "--NME--") entity = UnescapeYago(cols[3]);
      st.mentions.push_back({token_start, token_end, std::move(entity), st.mentions.size()});
      st.open_mention = st.mentions.size() - 1;
    } else if (cols.size() >= 3 && cols[1] == "I") {
      if (!st.open_mention) {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(line_no_) + ": I tag without an open mention");
      }
      st.mentions[*st.open_mention].end = token_end;
    } else if (cols.size() == 1) {
      st.open_mention.reset();
    } else {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no_) + ": unrecognized annotation columns");
    }
  }
  if (st.ready.empty()) return std::nullopt;
  EDInstance out = std::move(st.ready.front());
  st.ready.pop_front();
  return out;
}

std::vector<EDInstance> ReadDataset(std::istream &in, DatasetFormat format,
                                    const CandidateSidecar *sidecar, ReaderCounters *counters) {
  DatasetReader reader(in, format, sidecar);
  std::vector<EDInstance> out;
  while (auto instance = reader.Next()) out.push_back(std::move(*instance));
  if (counters) *counters = reader.counters();
  return out;
}

std::vector<EDInstance> ReadDatasetFile(const std::string &path, DatasetFormat format,
                                        const CandidateSidecar *sidecar,
                                        ReaderCounters *counters) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return ReadDataset(in, format, sidecar, counters);
}

void WriteCanonicalJsonl(std::ostream &out, const EDInstance &instance) {
  json record;
  record["id"] = instance.id;
  record["text"] = instance.text;
  record["mention"] = {
      {"start", CodePointsFromByteOffset(instance.text, instance.mention.start)},
      {"end", CodePointsFromByteOffset(instance.text, instance.mention.end)}};
  json candidates = json::array();
  for (const auto &c : instance.candidates) candidates.push_back(c.str());
  record["candidates"] = std::move(candidates);
  record["gold"] = instance.gold ? json(instance.gold->str()) : json(nullptr);
  out << record.dump() << '\n';
}

void StatsAccumulator::Add(const EDInstance &instance) {
  ++stats_.instances;
  for (const auto &c : instance.candidates) {
    ++stats_.candidates_total;
    auto [it, inserted] = seen_.try_emplace(c.str(), false);
    if (inserted) it->second = map_.LookupView(c.view()).has_value();
    if (!it->second) ++stats_.failures_total;
  }
}

DatasetStats StatsAccumulator::Finish() const {
  DatasetStats out = stats_;
  out.candidates_unique = seen_.size();
  out.failures_unique = 0;
  for (const auto &[title, found] : seen_) {
    if (!found) ++out.failures_unique;
  }
  return out;
}

DatasetStats ComputeStats(std::span<const EDInstance> instances, const DescriptionMap &map) {
  StatsAccumulator acc(map);
  for (const auto &instance : instances) acc.Add(instance);
  return acc.Finish();
}

DatasetStats ComputeStats(DatasetReader &reader, const DescriptionMap &map) {
  StatsAccumulator acc(map);
  while (auto instance = reader.Next()) acc.Add(*instance);
  return acc.Finish();
}

std::string CollapseWhitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

TrainIndex TrainIndex::Build(std::span<const EDInstance> train) {
  TrainIndex index;
  for (const auto &instance : train) index.Add(instance);
  return index;
}

void TrainIndex::Add(const EDInstance &instance) {
  if (!instance.gold) {
    throw Error(ErrorCode::kMissingGold, "training instance '" + instance.id + "' has no gold");
  }
  ++table_[MentionKey(instance)][*instance.gold];
  entities_.insert(*instance.gold);
}

bool TrainIndex::HasMention(std::string_view mention) const {
  return table_.find(mention) != table_.end();
}

bool TrainIndex::HasEntity(const EntityTitle &entity) const { return entities_.contains(entity); }

bool TrainIndex::HasPair(std::string_view mention, const EntityTitle &entity) const {
  return PairCount(mention, entity) > 0;
}

std::uint64_t TrainIndex::PairCount(std::string_view mention, const EntityTitle &entity) const {
  auto it = table_.find(mention);
  if (it == table_.end()) return 0;
  auto jt = it->second.find(entity);
  return jt == it->second.end() ? 0 : jt->second;
}

std::optional<EntityTitle> TrainIndex::MostFrequent(std::string_view mention) const {
  auto it = table_.find(mention);
  if (it == table_.end()) return std::nullopt;
  const EntityTitle *best = nullptr;
  std::uint64_t best_count = 0;
  // Map iteration is in title order, so strict > keeps the smallest on ties.
  for (const auto &[title, count] : it->second) {
    if (count > best_count) {
      best = &title;
      best_count = count;
    }
  }
  return best ? std::optional<EntityTitle>(*best) : std::nullopt;
}

}  // namespace edrep
