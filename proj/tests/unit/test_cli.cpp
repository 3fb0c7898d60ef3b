#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eventea/cli.hpp"
#include "eventea/embeddings.hpp"
#include "eventea/eval.hpp"
#include "eventea/manifest.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace eventea;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "eventea");
  std::ostringstream out, err;
  int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fixtures::temp_dir("cli");
    data_ = dir_ / "toy";
    write_dataset(data_, fixtures::toy_dataset());
    std::ofstream(dir_ / "train.cfg") << "dim = 32\nbatch_size = 4\nlearning_rate = 0.003\nmargin = 1.0\n"
                                         "negatives_per_positive = 3\nmax_epochs = 50\npatience = 50\nseed = 3\n";
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  fs::path data_;
};

}  // namespace

TEST(Cli, HelpListsAllSubcommands) {
  CliRun r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"analyze", "baseline", "split", "encode", "train", "eval", "cases", "make-dataset"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, UsageErrors) {
  CliRun unknown = run({"frobnicate"});
  EXPECT_EQ(unknown.code, cli::kUsage);
  EXPECT_FALSE(unknown.err.empty());
  EXPECT_EQ(run({"split", "--bogus-flag"}).code, cli::kUsage);
  EXPECT_EQ(run({"baseline", "--dataset", "x", "--out", "y", "--kind", "cosine"}).code, cli::kUsage);
}

TEST(Cli, SplitPrintsTimeAndRemainder) {
  CliRun r = run({"split", "--name", "2010 GCC U-23 Championship"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "time\t2010\nremainder\tGCC U-23 Championship\n");
}

TEST_F(CliTest, MissingDatasetIsDataError) {
  CliRun r = run({"analyze", "--dataset", p("nowhere")});
  EXPECT_EQ(r.code, cli::kDataError);
}

TEST_F(CliTest, TrainEncodeEvalPipeline) {
  CliRun t = run({"train", "--dataset", data_.string(), "--config", p("train.cfg"), "--out", p("params.txt"),
               "--fallback-seed", "5"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(p("params.txt.manifest.json")));
  EXPECT_TRUE(fs::exists(p("params.txt.log.jsonl")));

  for (const char* side : {"source", "target"}) {
    CliRun e = run({"encode", "--dataset", data_.string(), "--params", p("params.txt"), "--graph", side, "--out",
                 p(std::string(side) + ".emb"), "--fallback-seed", "5"});
    ASSERT_EQ(e.code, 0) << e.err;
  }
  CliRun ev = run({"eval", "--dataset", data_.string(), "--embeddings-src", p("source.emb"), "--embeddings-tgt",
                p("target.emb"), "--out", p("metrics.jsonl")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find("hits@1"), std::string::npos);
  std::ifstream metrics(p("metrics.jsonl"));
  std::string line;
  std::getline(metrics, line);
  auto header = nlohmann::json::parse(line);
  EXPECT_EQ(header["candidate_pool"], "test-targets");
  std::map<std::string, double> values;
  while (std::getline(metrics, line)) {
    auto j = nlohmann::json::parse(line);
    if (!j.contains("category")) values[j["metric"]] = j["value"];
  }
  // Recompute Hits@1 from the written embeddings with the brute-force oracle.
  const Dataset ds = load_dataset(data_);
  const EmbeddingTable src = EmbeddingTable::load(p("source.emb"));
  const EmbeddingTable tgt = EmbeddingTable::load(p("target.emb"));
  const auto test = ds.alignment.select(ds.alignment.test);
  std::vector<std::string> ids;
  Eigen::MatrixXd pool(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(tgt.dim()));
  for (std::size_t i = 0; i < test.size(); ++i) {
    ids.push_back(test[i].target);
    pool.row(static_cast<Eigen::Index>(i)) = tgt.row(*tgt.find(test[i].target)).transpose();
  }
  double hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    hits += oracle::brute_force_rank(src.row(*src.find(test[i].source)), pool, ids, i).gold_rank == 1;
  }
  EXPECT_DOUBLE_EQ(values.at("hits@1"), hits / static_cast<double>(test.size()));
  EXPECT_TRUE(fs::exists(p("metrics.jsonl.manifest.json")));

  auto manifest = RunManifest::from_json(slurp(p("source.emb.manifest.json")));
  EXPECT_EQ(manifest.subcommand, "encode");
  EXPECT_EQ(manifest.seeds.at("fallback_seed"), 5u);
  EXPECT_EQ(manifest.tool_version, kToolVersion);

  // Re-running from the same inputs reproduces outputs byte for byte.
  ASSERT_EQ(run({"train", "--dataset", data_.string(), "--config", p("train.cfg"), "--out", p("params2.txt"),
                 "--fallback-seed", "5"})
                .code,
            0);
  EXPECT_EQ(slurp(p("params.txt")), slurp(p("params2.txt")));

  CliRun cases = run({"cases", "--dataset", data_.string(), "--entities", "src:Summer_Games_2006,src:Summer_Games_2007",
                   "--embeddings-src", p("source.emb"), "--embeddings-tgt", p("target.emb"), "--out", p("cases.tsv")});
  ASSERT_EQ(cases.code, 0) << cases.err;
  std::ifstream tsv(p("cases.tsv"));
  auto rows = read_case_rows(tsv);
  EXPECT_EQ(rows.size(), 6u);
}

TEST_F(CliTest, BaselineAnalyzeMakeDataset) {
  CliRun b = run({"baseline", "--dataset", data_.string(), "--kind", "seq", "--topk", "3", "--out", p("base.tsv")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(fs::exists(p("base.tsv.manifest.json")));
  std::ifstream tsv(p("base.tsv"));
  std::size_t lines = 0;
  for (std::string l; std::getline(tsv, l);) ++lines;
  EXPECT_EQ(lines, 12u);  // 4 test sources x top 3

  CliRun a = run({"analyze", "--dataset", data_.string(), "--wl-iterations", "2", "--out", p("analyze.json")});
  ASSERT_EQ(a.code, 0) << a.err;
  auto report = nlohmann::json::parse(slurp(p("analyze.json")));
  EXPECT_EQ(report["source"]["entities"], 20);
  EXPECT_NEAR(report["wl_similarity"].get<double>(), 1.0, 1e-12);  // isomorphic chains, fully linked

  std::ofstream(p("shared")) << "src:Summer_Games_1990\tr\tsrc:Summer_Games_1995\n"
                                "tgt:Q100\tr\ttgt:Q105\n";
  CliRun m = run({"make-dataset", "--dataset", data_.string(), "--out", p("made"), "--threshold", "0.9",
               "--shared-triples", p("shared"), "--seed", "4"});
  ASSERT_EQ(m.code, 0) << m.err;
  Dataset made = load_dataset(p("made"));
  EXPECT_EQ(made.alignment.links.size(), 20u);
  EXPECT_EQ(made.source.relation_triples().size() + made.target.relation_triples().size(), 38u + 2u);
  EXPECT_TRUE(fs::exists(p("made/ent_links.manifest.json")));

  CliRun s = run({"split", "--dataset", data_.string(), "--out", p("strings.txt")});
  ASSERT_EQ(s.code, 0) << s.err;
  const std::string strings = slurp(p("strings.txt"));
  EXPECT_NE(strings.find("\n1995\n"), std::string::npos);
  EXPECT_NE(strings.find("Pacific Games ( )\n"), std::string::npos);
}

TEST_F(CliTest, DivergenceExitCode) {
  std::ofstream(p("wild.cfg")) << "dim = 8\nbatch_size = 4\nlearning_rate = 1e300\nmax_epochs = 5\n";
  CliRun r = run({"train", "--dataset", data_.string(), "--config", p("wild.cfg"), "--out", p("wild.txt")});
  EXPECT_EQ(r.code, cli::kDivergence) << r.err;
}

TEST(Manifest, JsonRoundTrip) {
  RunManifest m;
  m.subcommand = "train";
  m.config = {{"dim", "8"}};
  m.dataset = "d";
  m.fold = "f";
  m.seeds = {{"seed", 1}};
  m.started_at = utc_timestamp();
  m.finished_at = m.started_at;
  auto back = RunManifest::from_json(m.to_json());
  EXPECT_EQ(back.config, m.config);
  EXPECT_EQ(back.seeds, m.seeds);
  EXPECT_EQ(back.started_at, m.started_at);
  EXPECT_EQ(manifest_path("out/x.tsv"), fs::path("out/x.tsv.manifest.json"));
}
