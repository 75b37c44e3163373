#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "edrep/bridge.h"
#include "edrep/datasets.h"
#include "edrep/description_map.h"
#include "edrep/evaluation.h"
#include "edrep/extractive.h"
#include "edrep/generative.h"
#include "edrep/predictions.h"
#include "edrep/representation.h"
#include "edrep/scorers.h"
#include "edrep/tokenizers.h"
#include "edrep/wikidata_ingest.h"
#include "json.hpp"

using namespace edrep;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Thrown for flag combinations CLI11 cannot check on its own.
struct UsageError : std::runtime_error {
  UsageError(const std::string &flag, const std::string &reason)
      : std::runtime_error(flag + ": " + reason) {}
};

struct DatasetFlags {
  std::string path;
  std::string format = "canonical-jsonl";
  std::string candidates;
};

void AddDatasetFlags(CLI::App *cmd, DatasetFlags &f, const std::string &name = "--dataset") {
  cmd->add_option(name, f.path, "dataset file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", f.format, "canonical-jsonl | aida-conll")
      ->check(CLI::IsMember({"canonical-jsonl", "jsonl", "aida-conll", "aida"}));
  cmd->add_option("--candidates", f.candidates, "candidate sidecar JSONL")
      ->check(CLI::ExistingFile);
}

std::vector<EDInstance> LoadDataset(const DatasetFlags &f, ReaderCounters *counters = nullptr) {
  CandidateSidecar sidecar;
  if (!f.candidates.empty()) sidecar = ReadCandidateSidecarFile(f.candidates);
  return ReadDatasetFile(f.path, ParseDatasetFormat(f.format),
                         f.candidates.empty() ? nullptr : &sidecar, counters);
}

json CountersJson(const ReaderCounters &c) {
  return {{"instances", c.instances},
          {"duplicate_candidates", c.duplicate_candidates},
          {"gold_not_in_candidates", c.gold_not_in_candidates},
          {"missing_candidate_sets", c.missing_candidate_sets}};
}

// ingest-wikidata ------------------------------------------------------------

struct IngestFlags {
  std::string dump, lang = "en", out;
  int jobs = 0;
  bool serial = false;
};

int RunIngest(const IngestFlags &f) {
  IngestOptions opts;
  opts.language = f.lang;
  opts.dump_date = DumpDateFromPath(f.dump);
  opts.jobs = f.jobs;
  auto t0 = std::chrono::steady_clock::now();
  auto result = IngestDumpFile(f.dump, opts, f.serial);
  result.map.WriteFile(f.out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto &s = result.stats;
  json j = {{"entities_scanned", s.entities_scanned},
            {"with_enwiki_sitelink", s.with_enwiki_sitelink},
            {"with_description", s.with_description},
            {"emitted", s.emitted},
            {"malformed_lines", s.malformed_lines},
            {"collisions", s.collisions},
            {"invalid_titles", s.invalid_titles},
            {"dump_date", opts.dump_date},
            {"language", opts.language},
            {"seconds", secs}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

// stats ----------------------------------------------------------------------

struct StatsFlags {
  DatasetFlags dataset;
  std::string descriptions;
};

int RunStats(const StatsFlags &f) {
  auto map = DescriptionMap::ReadFile(f.descriptions);
  CandidateSidecar sidecar;
  if (!f.dataset.candidates.empty()) sidecar = ReadCandidateSidecarFile(f.dataset.candidates);
  std::ifstream in(f.dataset.path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + f.dataset.path + "'");
  DatasetReader reader(in, ParseDatasetFormat(f.dataset.format),
                       f.dataset.candidates.empty() ? nullptr : &sidecar);
  auto s = ComputeStats(reader, map);
  json j = {{"instances", s.instances},
            {"candidates_total", s.candidates_total},
            {"candidates_unique", s.candidates_unique},
            {"failures_total", s.failures_total},
            {"failures_unique", s.failures_unique},
            {"reader", CountersJson(reader.counters())}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

// decode ---------------------------------------------------------------------

struct DecodeFlags {
  std::string mode = "generative";
  DatasetFlags dataset;
  std::string descriptions;
  std::string scorer = "ngram";
  std::string bridge_cmd;
  std::size_t beam = 5;
  std::optional<std::size_t> budget;
  std::string out;
  int jobs = 0;
  int order = 2;
  std::string tokenizer = "byte";
  double length_penalty = 0.0;
};

std::unique_ptr<Tokenizer> MakeLocalTokenizer(const std::string &name) {
  if (name == "whitespace") return std::make_unique<WhitespaceTokenizer>();
  return std::make_unique<ByteTokenizer>();
}

void ValidateDecodeFlags(const DecodeFlags &f) {
  if (f.scorer == "bridge" && f.bridge_cmd.empty()) {
    throw UsageError("--bridge-cmd", "required with --scorer bridge");
  }
  if (f.mode == "generative" && f.scorer == "overlap") {
    throw UsageError("--scorer", "overlap only scores extractive decoding");
  }
  if (f.mode == "extractive" && f.scorer == "ngram") {
    throw UsageError("--scorer", "ngram only scores generative decoding");
  }
  if (f.beam == 0) throw UsageError("--beam", "must be positive");
  if (f.order < 1) throw UsageError("--order", "must be positive");
  if (f.jobs < 0) throw UsageError("--jobs", "must not be negative");
}

int RunDecode(const DecodeFlags &f) {
  auto map = DescriptionMap::ReadFile(f.descriptions);
  auto instances = LoadDataset(f.dataset);
  const bool generative = f.mode == "generative";

  // One bridge process per worker thread; requests within a process are
  // serialized by the client.
  const int threads = f.jobs > 0 ? f.jobs : omp_get_max_threads();
  std::vector<std::shared_ptr<BridgeClient>> bridges;
  std::unique_ptr<Tokenizer> local_tokenizer;
  if (f.scorer == "bridge") {
    const auto mode = generative ? BridgeMode::kGenerative : BridgeMode::kExtractive;
    for (int i = 0; i < threads; ++i) bridges.push_back(BridgeClient::Spawn(f.bridge_cmd, mode));
  } else {
    local_tokenizer = MakeLocalTokenizer(f.tokenizer);
  }
  const Tokenizer &tokenizer = bridges.empty() ? *local_tokenizer : *bridges.front();
  auto bridge_for_thread = [&]() { return bridges[omp_get_thread_num() % bridges.size()]; };

  // Representation failures (colliding surfaces) are reported per instance.
  std::vector<PredictionLine> lines(instances.size());
  std::vector<EDInstance> todo;
  std::vector<std::vector<CandidateRepresentation>> reps;
  std::vector<std::size_t> slot;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    lines[i].id = instances[i].id;
    lines[i].gold = instances[i].gold;
    try {
      reps.push_back(MakeRepresentations(instances[i], map));
      todo.push_back(instances[i]);
      slot.push_back(i);
    } catch (const Error &e) {
      lines[i].error = e.what();
    }
  }

  auto oracle_for = [&](std::size_t k) {
    const auto &inst = todo[k];
    if (!inst.gold) throw Error(ErrorCode::kMissingGold, "oracle needs a gold title");
    return std::make_shared<OracleScorer>(MakeRepresentation(*inst.gold, map).surface(), tokenizer);
  };

  if (generative) {
    DecodeOptions opts{f.beam, f.length_penalty};
    TokenScorerProvider provider = [&](std::size_t k) -> std::shared_ptr<const TokenScorer> {
      if (f.scorer == "oracle") return oracle_for(k);
      if (f.scorer == "bridge") return bridge_for_thread();
      return std::make_shared<NgramScorer>(reps[k], tokenizer, f.order);
    };
    auto outcomes = DecodeBatch(todo, reps, provider, tokenizer, opts, f.jobs);
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      auto &line = lines[slot[k]];
      if (outcomes[k].error) {
        line.error = outcomes[k].error->what();
        continue;
      }
      line.predicted = outcomes[k].result->winner;
      for (const auto &s : outcomes[k].result->ranked) line.scores.emplace_back(s.title.str(), s.score);
    }
  } else {
    AssembleOptions opts;
    opts.budget = f.budget;
    opts.tokenizer = &tokenizer;
    SpanScorerProvider provider = [&](std::size_t k) -> std::shared_ptr<const SpanScorer> {
      if (f.scorer == "oracle") return oracle_for(k);
      if (f.scorer == "bridge") return bridge_for_thread();
      return std::make_shared<OverlapSpanScorer>();
    };
    auto outcomes = ExtractBatch(todo, reps, provider, opts, f.jobs);
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      auto &line = lines[slot[k]];
      if (outcomes[k].error) {
        line.error = outcomes[k].error->what();
        continue;
      }
      line.predicted = outcomes[k].result->winner;
      for (const auto &s : outcomes[k].result->scores) line.scores.emplace_back(s.title.str(), s.score);
    }
  }

  std::ofstream out(f.out);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + f.out + "'");
  std::size_t failed = 0;
  for (const auto &line : lines) {
    WritePredictionLine(out, line);
    if (line.error) ++failed;
  }
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + f.out + "' failed");
  std::cerr << "decoded " << lines.size() - failed << " of " << lines.size() << " instances\n";
  return 0;
}

// evaluate -------------------------------------------------------------------

struct EvaluateFlags {
  std::vector<std::string> predictions;
  std::vector<std::string> gold;
  std::vector<std::string> names;
  std::string format = "canonical-jsonl";
  std::string candidates;
  std::string train;
  std::string train_format = "canonical-jsonl";
  std::string ood;
  std::string lfc = "mention";
  bool text = false;
};

std::set<std::string> SplitNames(const std::string &csv) {
  std::set<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

int RunEvaluate(const EvaluateFlags &f) {
  if (f.predictions.size() != f.gold.size()) {
    throw UsageError("--gold", "give one gold dataset per predictions file");
  }
  if (!f.names.empty() && f.names.size() != f.gold.size()) {
    throw UsageError("--name", "give one name per gold dataset");
  }
  std::optional<TrainIndex> index;
  if (!f.train.empty()) {
    DatasetFlags train{f.train, f.train_format, ""};
    std::vector<EDInstance> with_gold;
    for (auto &inst : LoadDataset(train)) {
      if (inst.gold) with_gold.push_back(std::move(inst));
    }
    index = TrainIndex::Build(with_gold);
  }
  const auto policy = f.lfc == "anywhere" ? LfcPolicy::kSeenAnywhere : LfcPolicy::kSeenWithMention;

  EvaluationReport report;
  for (std::size_t d = 0; d < f.gold.size(); ++d) {
    const std::string name =
        f.names.empty() ? std::filesystem::path(f.gold[d]).stem().string() : f.names[d];
    if (report.datasets.contains(name)) throw UsageError("--name", "duplicate name '" + name + "'");
    auto gold = LoadDataset({f.gold[d], f.format, f.candidates});
    auto lines = ReadPredictionsFile(f.predictions[d]);
    std::unordered_map<std::string, const PredictionLine *> by_id;
    for (const auto &l : lines) by_id.emplace(l.id, &l);

    // inKB: only instances with a gold title are scored.
    std::vector<EDInstance> scored;
    std::vector<PredictionRecord> records;
    for (auto &inst : gold) {
      if (!inst.gold) continue;
      auto it = by_id.find(inst.id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::kMisalignedRecords, "no prediction for '" + inst.id + "'");
      }
      records.push_back({inst.id, it->second->predicted, *inst.gold});
      scored.push_back(std::move(inst));
    }
    report.datasets[name] = MicroF1(records);
    if (index) report.frequency_classes[name] = FrequencyBreakdown(scored, records, *index, policy);
  }
  std::map<std::string, double> f1;
  for (const auto &[name, s] : report.datasets) f1[name] = s.f1;
  report.averages = Aggregate(f1, SplitNames(f.ood));

  if (f.text) {
    std::cout << RenderReportText(report);
  } else {
    std::cout << ReportJson(report) << '\n';
  }
  return 0;
}

// compare --------------------------------------------------------------------

struct CompareFlags {
  std::string a, b;
  std::string method = "chi2-cc";
  double alpha = 0.01;
  DatasetFlags gold;
};

std::vector<PredictionRecord> CompareRecords(const std::string &path,
                                             const std::unordered_map<std::string, EntityTitle> *gold) {
  auto lines = ReadPredictionsFile(path);
  if (!gold) return RecordsFromPredictions(lines);
  std::vector<PredictionRecord> out;
  for (const auto &l : lines) {
    auto it = gold->find(l.id);
    if (it != gold->end()) out.push_back({l.id, l.predicted, it->second});
  }
  return out;
}

int RunCompare(const CompareFlags &f) {
  const auto method = ParseMcNemarMethod(f.method);
  std::unordered_map<std::string, EntityTitle> gold;
  if (!f.gold.path.empty()) {
    for (const auto &inst : LoadDataset(f.gold)) {
      if (inst.gold) gold.emplace(inst.id, *inst.gold);
    }
  }
  const auto *gold_ptr = f.gold.path.empty() ? nullptr : &gold;
  auto a = CompareRecords(f.a, gold_ptr);
  auto b = CompareRecords(f.b, gold_ptr);
  auto r = McNemar(a, b, method, f.alpha);
  std::cout << McNemarJson(r, method, f.alpha) << '\n';
  return 0;
}

// rep-stats ------------------------------------------------------------------

struct RepStatsFlags {
  DatasetFlags dataset;
  std::string descriptions;
  std::string mode = "with-description";
  std::string scorer;
  std::string bridge_cmd;
  std::string tokenizer = "byte";
};

int RunRepStats(const RepStatsFlags &f) {
  if (f.scorer == "bridge" && f.bridge_cmd.empty()) {
    throw UsageError("--bridge-cmd", "required with --scorer bridge");
  }
  auto map = DescriptionMap::ReadFile(f.descriptions);
  auto instances = LoadDataset(f.dataset);
  std::shared_ptr<Tokenizer> tokenizer;
  if (f.scorer == "bridge") {
    tokenizer = BridgeClient::Spawn(f.bridge_cmd, BridgeMode::kGenerative);
  } else {
    tokenizer = MakeLocalTokenizer(f.tokenizer);
  }
  const auto mode =
      f.mode == "title-only" ? RepresentationMode::kTitleOnly : RepresentationMode::kWithDescription;
  auto s = RepresentationLengthStats(instances, map, *tokenizer, mode);
  json j = {{"mode", f.mode}, {"mean", s.mean}, {"p99", s.p99}, {"occurrences", s.occurrences}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

bool IsValidationError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownDatasetName:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Entity disambiguation with candidate representations"};
  app.require_subcommand(1);

  IngestFlags ingest;
  auto *ingest_cmd = app.add_subcommand("ingest-wikidata", "build a description map from a dump");
  ingest_cmd->add_option("--dump", ingest.dump, "Wikidata JSON dump (.json, .gz, .bz2)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--lang", ingest.lang, "description language");
  ingest_cmd->add_option("--out", ingest.out, "output TSV")->required();
  ingest_cmd->add_option("--jobs", ingest.jobs, "parser threads (0: all)")
      ->check(CLI::NonNegativeNumber);
  ingest_cmd->add_flag("--serial", ingest.serial, "use the serial reference parser");

  StatsFlags stats;
  auto *stats_cmd = app.add_subcommand("stats", "dataset statistics");
  AddDatasetFlags(stats_cmd, stats.dataset);
  stats_cmd->add_option("--descriptions", stats.descriptions, "description map TSV")
      ->required()
      ->check(CLI::ExistingFile);

  DecodeFlags decode;
  auto *decode_cmd = app.add_subcommand("decode", "disambiguate a dataset");
  decode_cmd->add_option("--mode", decode.mode)->check(CLI::IsMember({"generative", "extractive"}));
  AddDatasetFlags(decode_cmd, decode.dataset);
  decode_cmd->add_option("--descriptions", decode.descriptions)->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--scorer", decode.scorer)
      ->check(CLI::IsMember({"ngram", "overlap", "oracle", "bridge"}));
  decode_cmd->add_option("--bridge-cmd", decode.bridge_cmd, "command line of the model bridge");
  decode_cmd->add_option("--beam", decode.beam);
  decode_cmd->add_option("--budget", decode.budget, "token budget for extractive inputs");
  decode_cmd->add_option("--out", decode.out, "predictions JSONL")->required();
  decode_cmd->add_option("--jobs", decode.jobs, "worker threads (0: all)");
  decode_cmd->add_option("--order", decode.order, "n-gram order");
  decode_cmd->add_option("--tokenizer", decode.tokenizer, "local tokenizer")
      ->check(CLI::IsMember({"byte", "whitespace"}));
  decode_cmd->add_option("--length-penalty", decode.length_penalty);

  EvaluateFlags eval;
  auto *eval_cmd = app.add_subcommand("evaluate", "inKB micro F1 and frequency classes");
  eval_cmd->add_option("--predictions", eval.predictions)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", eval.gold)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--name", eval.names, "dataset names (default: gold file stems)");
  eval_cmd->add_option("--format", eval.format)
      ->check(CLI::IsMember({"canonical-jsonl", "jsonl", "aida-conll", "aida"}));
  eval_cmd->add_option("--candidates", eval.candidates)->check(CLI::ExistingFile);
  eval_cmd->add_option("--train", eval.train)->check(CLI::ExistingFile);
  eval_cmd->add_option("--train-format", eval.train_format)
      ->check(CLI::IsMember({"canonical-jsonl", "jsonl", "aida-conll", "aida"}));
  eval_cmd->add_option("--ood", eval.ood, "comma-separated out-of-domain dataset names");
  eval_cmd->add_option("--lfc", eval.lfc, "LFC definition")
      ->check(CLI::IsMember({"mention", "anywhere"}));
  eval_cmd->add_flag("--text", eval.text, "plain-text table instead of JSON");

  CompareFlags cmp;
  auto *cmp_cmd = app.add_subcommand("compare", "McNemar test between two systems");
  cmp_cmd->add_option("--a", cmp.a)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--b", cmp.b)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--method", cmp.method)->check(CLI::IsMember({"chi2-cc", "exact"}));
  cmp_cmd->add_option("--alpha", cmp.alpha)->check(CLI::Range(0.0, 1.0));
  cmp_cmd->add_option("--gold", cmp.gold.path, "gold dataset overriding the files' gold")
      ->check(CLI::ExistingFile);
  cmp_cmd->add_option("--format", cmp.gold.format)
      ->check(CLI::IsMember({"canonical-jsonl", "jsonl", "aida-conll", "aida"}));

  RepStatsFlags rep;
  auto *rep_cmd = app.add_subcommand("rep-stats", "candidate representation lengths");
  AddDatasetFlags(rep_cmd, rep.dataset);
  rep_cmd->add_option("--descriptions", rep.descriptions)->required()->check(CLI::ExistingFile);
  rep_cmd->add_option("--mode", rep.mode)->check(CLI::IsMember({"title-only", "with-description"}));
  rep_cmd->add_option("--scorer", rep.scorer)->check(CLI::IsMember({"bridge"}));
  rep_cmd->add_option("--bridge-cmd", rep.bridge_cmd);
  rep_cmd->add_option("--tokenizer", rep.tokenizer, "local tokenizer without a bridge")
      ->check(CLI::IsMember({"byte", "whitespace"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*ingest_cmd) return RunIngest(ingest);
    if (*stats_cmd) return RunStats(stats);
    if (*decode_cmd) {
      ValidateDecodeFlags(decode);
      return RunDecode(decode);
    }
    if (*eval_cmd) return RunEvaluate(eval);
    if (*cmp_cmd) return RunCompare(cmp);
    if (*rep_cmd) return RunRepStats(rep);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return IsValidationError(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
