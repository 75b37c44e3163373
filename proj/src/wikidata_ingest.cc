#include "edrep/wikidata_ingest.h"

#include <omp.h>

#include <array>
#include <boost/iostreams/device/file.hpp>
#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filtering_stream.hpp>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace edrep {

namespace {

using json = nlohmann::json;

// Strips the array framing around one dump line. Returns an empty view for
// lines that carry no entity.
std::string_view EntityPayload(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' ' ||
                           line.back() == '\t')) {
    line.remove_suffix(1);
  }
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
  if (!line.empty() && line.back() == ',') line.remove_suffix(1);
  if (line == "[" || line == "]") return {};
  return line;
}

// Tracks the key path of the current value for the three-level paths we
// care about and ignores everything else.
class FieldSax : public nlohmann::json_sax<json> {
 public:
  explicit FieldSax(std::string_view language, EntityFields *out)
      : language_(language), out_(out) {}

  bool null() override { return Value(); }
  bool boolean(bool) override { return Value(); }
  bool number_integer(number_integer_t) override { return Value(); }
  bool number_unsigned(number_unsigned_t) override { return Value(); }
  bool number_float(number_float_t, const string_t &) override { return Value(); }
  bool binary(binary_t &) override { return Value(); }

  bool string(string_t &val) override {
    if (!Value()) return false;
    if (depth_ != 3 || !AllObjects()) return true;
    if (OnPath(3, kSitelinkPath)) {
      out_->enwiki_title = std::move(val);
    } else if (OnPath(3, {"descriptions", language_, "value"})) {
      out_->description = std::move(val);
    }
    return true;
  }

  bool start_object(std::size_t) override { return Open(true); }
  bool end_object() override { return Close(); }
  bool start_array(std::size_t) override { return Open(false); }
  bool end_array() override { return Close(); }

  // A repeated key replaces the earlier member, so any capture below it is
  // forgotten; this matches last-wins DOM semantics.
  bool key(string_t &val) override {
    if (depth_ < 1 || depth_ > 3) return true;
    keys_[depth_ - 1] = std::move(val);
    if (OnPath(depth_, kSitelinkPath)) out_->enwiki_title.reset();
    if (OnPath(depth_, {"descriptions", language_, "value"})) out_->description.reset();
    return true;
  }

  bool parse_error(std::size_t, const std::string &, const nlohmann::detail::exception &) override {
    return false;
  }

 private:
  bool Value() {
    // A scalar at top level is not an entity.
    return depth_ > 0;
  }
  bool Open(bool is_object) {
    if (depth_ == 0 && !is_object) return false;
    if (depth_ < is_object_.size()) is_object_[depth_] = is_object;
    ++depth_;
    return true;
  }
  bool Close() {
    --depth_;
    return true;
  }
  bool AllObjects() const { return is_object_[0] && is_object_[1] && is_object_[2]; }

  using Path = std::array<std::string_view, 3>;
  static constexpr Path kSitelinkPath{"sitelinks", "enwiki", "title"};

  // True when the first `levels` keys of the current path match `path`.
  bool OnPath(std::size_t levels, const Path &path) const {
    for (std::size_t i = 0; i < levels; ++i) {
      if (!is_object_[i] || keys_[i] != path[i]) return false;
    }
    return true;
  }

  std::string_view language_;
  EntityFields *out_;
  std::size_t depth_ = 0;
  std::array<bool, 3> is_object_{};
  std::array<std::string, 3> keys_;
};

class Accumulator {
 public:
  explicit Accumulator(const IngestOptions &options)
      : builder_(DescriptionMapMeta{options.dump_date, options.language}) {}

  void Fold(EntityFields fields) {
    if (!fields.is_entity) return;
    if (fields.malformed) {
      ++stats_.malformed_lines;
      return;
    }
    ++stats_.entities_scanned;
    if (!fields.enwiki_title) return;
    ++stats_.with_enwiki_sitelink;
    if (!fields.description || fields.description->empty()) return;
    ++stats_.with_description;
    std::string title;
    try {
      title = NormalizeTitle(*fields.enwiki_title).str();
    } catch (const Error &) {
      ++stats_.invalid_titles;
      return;
    }
    if (!builder_.Add(title, SanitizeDescription(*fields.description))) {
      ++stats_.invalid_titles;
    }
  }

  IngestResult Finish() && {
    IngestResult result;
    result.map = std::move(builder_).Build(&stats_.collisions);
    stats_.emitted = result.map.size();
    result.stats = stats_;
    return result;
  }

 private:
  DescriptionMapBuilder builder_;
  IngestStats stats_;
};

// Rethrows stream failures as kCorruptStream.
template <typename Fn>
auto GuardStream(Fn &&fn) {
  try {
    return fn();
  } catch (const Error &) {
    throw;
  } catch (const std::exception &e) {
    throw Error(ErrorCode::kCorruptStream, e.what());
  }
}

bool ReadLine(std::istream &in, std::string &line) {
  return static_cast<bool>(std::getline(in, line));
}

}  // namespace

EntityFields ExtractEntityFields(std::string_view line, std::string_view language) {
  EntityFields fields;
  auto payload = EntityPayload(line);
  if (payload.empty()) return fields;
  fields.is_entity = true;
  FieldSax sax(language, &fields);
  bool ok = json::sax_parse(payload.begin(), payload.end(), &sax);
  if (!ok) {
    fields.malformed = true;
    fields.enwiki_title.reset();
    fields.description.reset();
  }
  return fields;
}

EntityFields ExtractEntityFieldsDom(std::string_view line, std::string_view language) {
  EntityFields fields;
  auto payload = EntityPayload(line);
  if (payload.empty()) return fields;
  fields.is_entity = true;
  json doc = json::parse(payload.begin(), payload.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    fields.malformed = true;
    return fields;
  }
  auto string_at = [&doc](std::string_view a, std::string_view b,
                          std::string_view c) -> std::optional<std::string> {
    auto first = doc.find(std::string(a));
    if (first == doc.end() || !first->is_object()) return std::nullopt;
    auto second = first->find(std::string(b));
    if (second == first->end() || !second->is_object()) return std::nullopt;
    auto third = second->find(std::string(c));
    if (third == second->end() || !third->is_string()) return std::nullopt;
    return third->get<std::string>();
  };
  fields.enwiki_title = string_at("sitelinks", "enwiki", "title");
  fields.description = string_at("descriptions", language, "value");
  return fields;
}

IngestResult IngestDump(std::istream &in, const IngestOptions &options) {
  return GuardStream([&] {
    Accumulator acc(options);
    const int jobs = options.jobs > 0 ? options.jobs : omp_get_max_threads();
    std::vector<std::string> lines;
    std::vector<EntityFields> parsed;
    std::string line;
    bool more = true;
    while (more) {
      lines.clear();
      std::size_t bytes = 0;
      while (lines.size() < options.batch_lines && bytes < options.batch_bytes) {
        if (!ReadLine(in, line)) {
          more = false;
          break;
        }
        bytes += line.size();
        lines.push_back(std::move(line));
        line.clear();
      }
      if (lines.empty()) break;

      parsed.assign(lines.size(), EntityFields{});
      const auto n = static_cast<std::int64_t>(lines.size());
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 256)
      for (std::int64_t i = 0; i < n; ++i) {
        parsed[i] = ExtractEntityFields(lines[i], options.language);
      }
      for (auto &fields : parsed) acc.Fold(std::move(fields));
    }
    if (in.bad()) throw Error(ErrorCode::kCorruptStream, "read failure");
    return std::move(acc).Finish();
  });
}

IngestResult IngestDumpSerial(std::istream &in, const IngestOptions &options) {
  return GuardStream([&] {
    Accumulator acc(options);
    std::string line;
    while (ReadLine(in, line)) {
      acc.Fold(ExtractEntityFieldsDom(line, options.language));
    }
    if (in.bad()) throw Error(ErrorCode::kCorruptStream, "read failure");
    return std::move(acc).Finish();
  });
}

namespace {

class DumpStream : public std::istream {
 public:
  explicit DumpStream(const std::string &path) : std::istream(nullptr) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw Error(ErrorCode::kIo, "cannot open dump '" + path + "'");
    unsigned char magic[3] = {0, 0, 0};
    probe.read(reinterpret_cast<char *>(magic), 3);
    const auto got = probe.gcount();
    probe.close();

    namespace io = boost::iostreams;
    if (got >= 2 && magic[0] == 0x1f && magic[1] == 0x8b) {
      chain_.push(io::gzip_decompressor());
    } else if (got == 3 && magic[0] == 'B' && magic[1] == 'Z' && magic[2] == 'h') {
      chain_.push(io::bzip2_decompressor());
    } else if (got > 0 && magic[0] != '[' && magic[0] != ' ' && magic[0] != '\n') {
      throw Error(ErrorCode::kCorruptStream, "unrecognized dump format in '" + path + "'");
    }
    chain_.push(io::file_source(path, std::ios::binary));
    rdbuf(chain_.rdbuf());
    // Decompression errors propagate instead of looking like end of input.
    exceptions(std::ios::badbit);
  }

 private:
  boost::iostreams::filtering_istream chain_;
};

}  // namespace

std::unique_ptr<std::istream> OpenDump(const std::string &path) {
  return std::make_unique<DumpStream>(path);
}

IngestResult IngestDumpFile(const std::string &path, const IngestOptions &options, bool serial) {
  auto in = OpenDump(path);
  return serial ? IngestDumpSerial(*in, options) : IngestDump(*in, options);
}

std::string DumpDateFromPath(std::string_view path) {
  auto slash = path.find_last_of('/');
  auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  for (std::size_t i = 0; i + 8 <= name.size(); ++i) {
    bool digits = true;
    for (std::size_t k = 0; k < 8 && digits; ++k) {
      digits = name[i + k] >= '0' && name[i + k] <= '9';
    }
    bool bounded = (i == 0 || !(name[i - 1] >= '0' && name[i - 1] <= '9')) &&
                   (i + 8 == name.size() || !(name[i + 8] >= '0' && name[i + 8] <= '9'));
    if (digits && bounded) return std::string(name.substr(i, 8));
  }
  return "unknown";
}

}  // namespace edrep
