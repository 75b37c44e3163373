#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "edrep/datasets.h"
#include "json.hpp"
#include "test_util.h"

using namespace edrep;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run Cli(const std::string &args) {
  std::string cmd = std::string(EDREP_CLI) + " " + args + " 2>/dev/null";
  FILE *p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Temporary directory with a small dataset and description map.
struct Fixture {
  fs::path dir;
  std::string data, desc, train;

  Fixture() {
    dir = fs::temp_directory_path() / ("edrep_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    data = (dir / "test.jsonl").string();
    desc = (dir / "desc.tsv").string();
    train = (dir / "train.jsonl").string();
    std::mt19937 rng(101);
    std::ofstream d(data), t(train), m(desc);
    std::vector<std::string> titles;
    for (int i = 0; i < 30; ++i) titles.push_back("Entity " + testing::RandomWord(rng) + std::to_string(i));
    m << "#edrep-descriptions\tdump_date=20220613\tlanguage=en\tentries=15\n";
    std::vector<std::string> sorted(titles.begin(), titles.begin() + 15);
    std::sort(sorted.begin(), sorted.end());
    for (const auto &s : sorted) m << s << "\tdescription of " << s << "\n";
    for (int i = 0; i < 60; ++i) {
      std::shuffle(titles.begin(), titles.end(), rng);
      std::vector<std::string> cands(titles.begin(), titles.begin() + 1 + i % 8);
      auto text = testing::RandomPhrase(rng, 5) + " target " + testing::RandomPhrase(rng, 5);
      const auto start = text.find("target");
      auto inst = testing::MakeInstance("d" + std::to_string(i), text, start, start + 6, cands,
                                        cands[i % cands.size()]);
      WriteCanonicalJsonl(d, inst);
      WriteCanonicalJsonl(t, inst);
    }
  }
  ~Fixture() { fs::remove_all(dir); }

  std::string Path(const std::string &name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("oracle decoding evaluates to F1 = 1") {
  Fixture fx;
  for (std::string mode : {"generative", "extractive"}) {
    const auto out = fx.Path(mode + ".jsonl");
    auto r = Cli("decode --mode " + mode + " --dataset " + fx.data + " --descriptions " + fx.desc +
                 " --scorer oracle --out " + out);
    REQUIRE(r.code == 0);
    auto e = Cli("evaluate --predictions " + out + " --gold " + fx.data);
    REQUIRE(e.code == 0);
    auto j = json::parse(e.out);
    CHECK(j["datasets"]["test"]["f1"] == 1.0);
    CHECK(j["avg"] == 1.0);
  }
}

TEST_CASE("compare of a file with itself") {
  Fixture fx;
  const auto out = fx.Path("p.jsonl");
  REQUIRE(Cli("decode --dataset " + fx.data + " --descriptions " + fx.desc + " --out " + out).code == 0);
  for (std::string method : {"chi2-cc", "exact"}) {
    auto r = Cli("compare --a " + out + " --b " + out + " --method " + method + " --alpha 0.01");
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["b"] == 0);
    CHECK(j["c"] == 0);
    CHECK(j["p_value"] == 1.0);
  }
}

TEST_CASE("decode then evaluate is byte-stable across runs and thread counts") {
  Fixture fx;
  for (std::string mode : {"generative", "extractive"}) {
    const std::string scorer = mode == "generative" ? "ngram" : "overlap";
    std::vector<std::string> preds, reports;
    for (int jobs : {1, 4, 1}) {
      const auto out = fx.Path(mode + std::to_string(preds.size()) + ".jsonl");
      auto r = Cli("decode --mode " + mode + " --dataset " + fx.data + " --descriptions " + fx.desc +
                   " --scorer " + scorer + " --jobs " + std::to_string(jobs) + " --out " + out +
                   " --budget 400 --tokenizer whitespace");
      REQUIRE(r.code == 0);
      preds.push_back(Slurp(out));
      auto e = Cli("evaluate --predictions " + out + " --gold " + fx.data + " --train " + fx.train);
      REQUIRE(e.code == 0);
      reports.push_back(e.out);
    }
    CHECK(preds[0] == preds[1]);
    CHECK(preds[0] == preds[2]);
    CHECK(reports[0] == reports[1]);
    CHECK(reports[0] == reports[2]);
    auto j = json::parse(reports[0]);
    CHECK(j["frequency_classes"]["test"]["MFC"]["count"].get<int>() > 0);
    // Every prediction line carries the declared fields.
    std::istringstream lines(preds[0]);
    std::string line;
    while (std::getline(lines, line)) {
      auto p = json::parse(line);
      CHECK(p.contains("id"));
      CHECK(p.contains("predicted"));
      CHECK(p["scores"].is_array());
    }
  }
}

TEST_CASE("exit codes") {
  Fixture fx;
  CHECK(Cli("").code == 1);
  CHECK(Cli("decode --dataset " + fx.data).code == 1);
  CHECK(Cli("decode --dataset /nonexistent --descriptions " + fx.desc + " --out x").code == 1);
  CHECK(Cli("decode --dataset " + fx.data + " --descriptions " + fx.desc +
            " --scorer bridge --out " + fx.Path("x"))
            .code == 1);
  CHECK(Cli("compare --a " + fx.data + " --b " + fx.data + " --method nope").code == 1);
  // Runtime failures: unreadable description map, evaluation without predictions.
  std::ofstream(fx.Path("bad.tsv")) << "not a map\n";
  CHECK(Cli("stats --dataset " + fx.data + " --descriptions " + fx.Path("bad.tsv")).code == 2);
  std::ofstream(fx.Path("empty.jsonl")) << "";
  CHECK(Cli("evaluate --predictions " + fx.Path("empty.jsonl") + " --gold " + fx.data).code == 2);
  CHECK(Cli("evaluate --predictions " + fx.Path("empty.jsonl") + " --gold " + fx.data +
            " --ood nope")
            .code == 2);
}

TEST_CASE("stats, rep-stats and ingest commands") {
  Fixture fx;
  auto s = Cli("stats --dataset " + fx.data + " --descriptions " + fx.desc);
  REQUIRE(s.code == 0);
  auto j = json::parse(s.out);
  CHECK(j["instances"] == 60);
  CHECK(j["failures_total"].get<int>() <= j["candidates_total"].get<int>());

  auto r = Cli("rep-stats --dataset " + fx.data + " --descriptions " + fx.desc +
               " --mode title-only --tokenizer whitespace");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["mean"] == 2.0);

  auto b = Cli("rep-stats --dataset " + fx.data + " --descriptions " + fx.desc +
               " --mode with-description --scorer bridge --bridge-cmd '" EDREP_STUB_BRIDGE "'");
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out)["mean"].get<double>() > 8.0);

  const auto dump = fx.Path("latest-all-20220613.json");
  std::ofstream(dump)
      << "[\n"
      << R"({"id":"Q1","sitelinks":{"enwiki":{"title":"Paris"}},"descriptions":{"en":{"value":"capital"}}},)"
      << "\n"
      << R"({"id":"Q2","sitelinks":{"enwiki":{"title":"Lyon"}}})" << "\n]\n";
  auto in = Cli("ingest-wikidata --dump " + dump + " --lang en --out " + fx.Path("m.tsv"));
  REQUIRE(in.code == 0);
  auto stats = json::parse(in.out);
  CHECK(stats["entities_scanned"] == 2);
  CHECK(stats["emitted"] == 1);
  CHECK(Slurp(fx.Path("m.tsv")) ==
        "#edrep-descriptions\tdump_date=20220613\tlanguage=en\tentries=1\nParis\tcapital\n");
}

TEST_CASE("decode through a bridge command") {
  Fixture fx;
  for (std::string mode : {"generative", "extractive"}) {
    const auto out = fx.Path("b_" + mode + ".jsonl");
    auto r = Cli("decode --mode " + mode + " --dataset " + fx.data + " --descriptions " + fx.desc +
                 " --scorer bridge --bridge-cmd '" EDREP_STUB_BRIDGE "' --jobs 2 --out " + out);
    REQUIRE(r.code == 0);
    std::istringstream lines(Slurp(out));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
      auto p = json::parse(line);
      CHECK_FALSE(p.contains("error"));
      CHECK(p["predicted"].is_string());
      ++n;
    }
    CHECK(n == 60);
  }
  auto wrong = Cli("decode --dataset " + fx.data + " --descriptions " + fx.desc +
                   " --scorer bridge --bridge-cmd '" EDREP_STUB_BRIDGE " --modes extractive' --out " +
                   fx.Path("w.jsonl"));
  CHECK(wrong.code == 2);
}
