#pragma once

// Streaming ingestion of a Wikidata "entities" JSON dump into a
// DescriptionMap keyed by normalized enwiki title.
//
// The dump is a JSON array with one entity object per line, every line but
// the last terminated by ",". Only two paths are read from each entity:
//   sitelinks.enwiki.title
//   descriptions.<language>.value
// Memory stays bounded by the map itself plus one batch of lines.

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "edrep/description_map.h"

namespace edrep {

struct IngestStats {
  std::uint64_t entities_scanned = 0;
  std::uint64_t with_enwiki_sitelink = 0;
  std::uint64_t with_description = 0;
  std::uint64_t emitted = 0;
  std::uint64_t malformed_lines = 0;
  // Entities dropped because another entity already claimed the title.
  std::uint64_t collisions = 0;
  // Sitelink titles that normalize to nothing or exceed the field limit.
  std::uint64_t invalid_titles = 0;

  friend bool operator==(const IngestStats &, const IngestStats &) = default;
};

struct IngestOptions {
  std::string language = "en";
  std::string dump_date = "unknown";
  // Worker threads for the parallel kernel; 0 uses the OpenMP default.
  int jobs = 0;
  std::size_t batch_lines = 1u << 14;
  std::size_t batch_bytes = 16u << 20;
};

struct IngestResult {
  DescriptionMap map;
  IngestStats stats;
};

// Fields pulled out of one entity line.
struct EntityFields {
  bool malformed = false;
  // False for the "[" / "]" framing lines and blank lines.
  bool is_entity = false;
  std::optional<std::string> enwiki_title;
  std::optional<std::string> description;
};

// Streaming SAX extraction (used by the parallel kernel).
EntityFields ExtractEntityFields(std::string_view line, std::string_view language);
// Full DOM parse (used by the serial reference).
EntityFields ExtractEntityFieldsDom(std::string_view line, std::string_view language);

// Parallel kernel: batches of lines are parsed concurrently and folded in
// dump order, so output is identical for every thread count.
IngestResult IngestDump(std::istream &decompressed, const IngestOptions &options);

// Serial reference implementation kept for testing the parallel kernel.
IngestResult IngestDumpSerial(std::istream &decompressed, const IngestOptions &options);

// Opens a gzip, bzip2 or plain dump, detected from its magic bytes. Read
// errors on the returned stream surface as Error(kCorruptStream).
std::unique_ptr<std::istream> OpenDump(const std::string &path);

IngestResult IngestDumpFile(const std::string &path, const IngestOptions &options,
                            bool serial = false);

// Extracts an 8-digit date (e.g. "20220613") from a dump file name, or
// "unknown".
std::string DumpDateFromPath(std::string_view path);

}  // namespace edrep
