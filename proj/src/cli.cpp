#include "eventea/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eventea/dataset_io.hpp"
#include "eventea/embeddings.hpp"
#include "eventea/eval.hpp"
#include "eventea/graph_iso.hpp"
#include "eventea/manifest.hpp"
#include "eventea/string_sim.hpp"
#include "eventea/tae.hpp"
#include "eventea/time_split.hpp"
#include "eventea/train.hpp"

namespace eventea::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDefaultSeed = 2022;

// EVENTEA_SEED replaces the default of every seed flag.
std::uint64_t default_seed() {
  if (const char* env = std::getenv("EVENTEA_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("EVENTEA_SEED is not an unsigned integer: ") + env);
    }
  }
  return kDefaultSeed;
}

// A config file without a seed key falls back to the environment default.
bool config_sets_seed(const std::string& path) {
  std::ifstream in(path);
  static const std::regex seed_key(R"(^\s*seed\s*=)");
  for (std::string line; std::getline(in, line);) {
    if (std::regex_search(line, seed_key)) return true;
  }
  return false;
}

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

struct DatasetOptions {
  std::string dir;
  std::string fold;

  void add(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--dataset", dir, "Dataset directory");
    if (required) opt->required();
    app->add_option("--fold", fold, "Split folder relative to the dataset directory");
  }
  Dataset load() const { return load_dataset(dir, fold); }
};

struct ProviderOptions {
  std::string static_store;
  std::string contextual_store;
  std::uint64_t fallback_seed = 0;
  std::size_t dim = 0;

  void add(CLI::App* app) {
    fallback_seed = default_seed();
    app->add_option("--static-store", static_store, "Static token vector store");
    app->add_option("--contextual-store", contextual_store, "Contextual token vector store");
    app->add_option("--fallback-seed", fallback_seed, "Seed of the hash fallback vectors")->capture_default_str();
    app->add_option("--dim", dim, "Vector dimension when no store is given (default 768)");
  }
  bool has_store() const { return !static_store.empty() || !contextual_store.empty(); }

  ProviderChain make(std::size_t fallback_dim = 768) const {
    std::shared_ptr<const ContextualStore> ctx;
    std::shared_ptr<const StaticStore> st;
    std::size_t d = dim;
    if (!contextual_store.empty()) {
      ctx = std::make_shared<ContextualStore>(ContextualStore::load(contextual_store));
      if (d == 0) d = ctx->dim();
    }
    if (!static_store.empty()) {
      st = std::make_shared<StaticStore>(StaticStore::load(static_store));
      if (d == 0) d = st->dim();
    }
    if (d == 0) d = fallback_dim;
    try {
      return ProviderChain(d, fallback_seed, ctx, st);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }

  void record(RunManifest& m) const {
    m.config["static_store"] = static_store;
    m.config["contextual_store"] = contextual_store;
    m.seeds["fallback_seed"] = fallback_seed;
  }
};

NamePolicy make_policy(const std::vector<std::string>& attributes) {
  NamePolicy p;
  if (!attributes.empty()) p.attributes = attributes;
  return p;
}

std::string join(const std::vector<std::string>& items, char sep = ',') {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

RunManifest start_manifest(const std::string& subcommand, const DatasetOptions* ds) {
  RunManifest m;
  m.subcommand = subcommand;
  m.started_at = utc_timestamp();
  if (ds) {
    m.dataset = ds->dir;
    m.fold = ds->fold;
  }
  return m;
}

void print_metrics_table(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
}

// Test-split alignment restricted to a candidate pool: "test" uses the test
// targets, "all" every entity of the target graph.
struct TestPool {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  std::vector<std::size_t> gold;  // per source, index into targets
};

TestPool test_pool(const Dataset& ds, const std::string& candidates) {
  TestPool pool;
  const auto links = ds.alignment.select(ds.alignment.test);
  if (links.empty()) throw DataError("the dataset has no test links");
  if (candidates == "test") {
    for (std::size_t i = 0; i < links.size(); ++i) {
      pool.sources.push_back(links[i].source);
      pool.targets.push_back(links[i].target);
      pool.gold.push_back(i);
    }
  } else {
    pool.targets.assign(ds.target.entities().begin(), ds.target.entities().end());
    std::map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < pool.targets.size(); ++i) index.emplace(pool.targets[i], i);
    for (const auto& l : links) {
      pool.sources.push_back(l.source);
      pool.gold.push_back(index.at(l.target));
    }
  }
  return pool;
}

Eigen::MatrixXd gather(const EmbeddingTable& table, const std::vector<std::string>& ids, const std::string& what) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(table.dim()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto row = table.find(ids[i]);
    if (!row) throw DataError(what + " embeddings lack entity " + ids[i]);
    m.row(static_cast<Eigen::Index>(i)) = table.vectors.row(static_cast<Eigen::Index>(*row));
  }
  return m;
}

std::vector<std::pair<std::string, double>> metric_values(const std::vector<std::size_t>& ranks) {
  return {{"hits@1", hits_at(ranks, 1)}, {"hits@10", hits_at(ranks, 10)}, {"mrr", mrr(ranks)}};
}

// ---- subcommands ----

struct AnalyzeCmd {
  DatasetOptions ds;
  std::size_t iterations = 3;
  std::string out_path;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("analyze", "Dataset statistics and WL structural similarity");
    ds.add(sub);
    sub->add_option("--wl-iterations", iterations, "WL relabeling iterations")->capture_default_str();
    sub->add_option("--out", out_path, "Write the report as JSON");
  }

  int run(std::ostream& out) const {
    RunManifest m = start_manifest("analyze", &ds);
    const Dataset data = ds.load();
    const double score = wl_similarity(data.source, data.target, data.alignment.links, iterations);
    nlohmann::ordered_json report;
    auto graph_json = [](const GraphLoadStats& s, const DegreeStats& d) {
      return nlohmann::ordered_json{{"entities", s.entities},
                                    {"relations", s.relations},
                                    {"relation_triples", s.relation_triples},
                                    {"attributes", s.attributes},
                                    {"attribute_triples", s.attribute_triples},
                                    {"duplicate_triples", s.duplicate_triples},
                                    {"min_degree", d.min_degree},
                                    {"mean_degree", d.mean_degree},
                                    {"max_degree", d.max_degree},
                                    {"isolated", d.isolated}};
    };
    report["source"] = graph_json(data.stats.source, degree_stats(data.source));
    report["target"] = graph_json(data.stats.target, degree_stats(data.target));
    report["links"] = {{"all", data.stats.links}, {"train", data.stats.train}, {"valid", data.stats.valid},
                       {"test", data.stats.test}};
    report["wl_iterations"] = iterations;
    report["wl_similarity"] = score;

    for (const auto* side : {"source", "target"}) {
      const auto& g = report[side];
      out << side << ": " << g["entities"] << " entities, " << g["relations"] << " relations, "
          << g["relation_triples"] << " relation triples, " << g["attributes"] << " attributes, "
          << g["attribute_triples"] << " attribute triples, " << g["isolated"] << " isolated\n";
    }
    out << "links: " << data.stats.links << " (train " << data.stats.train << ", valid " << data.stats.valid
        << ", test " << data.stats.test << ")\n";
    out << "wl_similarity(h=" << iterations << "): " << std::setprecision(6) << score << '\n';
    if (!out_path.empty()) {
      std::ofstream f(out_path);
      if (!f) throw DataError("cannot write " + out_path);
      f << report.dump(2) << '\n';
      m.config["wl_iterations"] = std::to_string(iterations);
      write_manifest(out_path, m);
    }
    return kOk;
  }
};

struct BaselineCmd {
  DatasetOptions ds;
  std::string kind = "lev-ratio";
  std::size_t topk = 10;
  bool no_lowercase = false;
  std::string candidates = "test";
  std::string out_path;
  std::string metrics_path;
  std::vector<std::string> name_attributes;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("baseline", "Name matching by string similarity");
    ds.add(sub);
    sub->add_option("--kind", kind, "Similarity")
        ->check(CLI::IsMember({"lev-ratio", "jaro", "jaro-winkler", "seq"}))
        ->capture_default_str();
    sub->add_option("--topk", topk, "Candidates per source")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--no-lowercase", no_lowercase, "Compare names case-sensitively");
    sub->add_option("--candidates", candidates, "Candidate pool")->check(CLI::IsMember({"test", "all"}));
    sub->add_option("--out", out_path, "Ranked candidates TSV (source, rank, target, score)")->required();
    sub->add_option("--metrics-out", metrics_path, "Metrics JSON-lines");
    sub->add_option("--name-attribute", name_attributes, "Name attribute preference (repeatable)");
  }

  int run(std::ostream& out) const {
    RunManifest m = start_manifest("baseline", &ds);
    const Dataset data = ds.load();
    const NamePolicy policy = make_policy(name_attributes);
    const auto src_names = entity_names(data.source, policy);
    const auto tgt_names = entity_names(data.target, policy);
    const TestPool pool = test_pool(data, candidates);
    std::vector<NamedEntity> sources;
    std::vector<NamedEntity> targets;
    for (const auto& s : pool.sources) sources.push_back({s, src_names.at(s)});
    for (const auto& t : pool.targets) targets.push_back({t, tgt_names.at(t)});
    NameMatchOptions options{parse_similarity_kind(kind), topk, !no_lowercase};
    const RankingResult ranking = name_match_align(sources, targets, pool.gold, options);

    std::ofstream tsv(out_path);
    if (!tsv) throw DataError("cannot write " + out_path);
    for (std::size_t i = 0; i < ranking.rows.size(); ++i) {
      const auto& row = ranking.rows[i];
      for (std::size_t r = 0; r < row.top.size(); ++r) {
        tsv << pool.sources[i] << '\t' << (r + 1) << '\t' << pool.targets[row.top[r].target] << '\t'
            << shortest(row.top[r].score) << '\n';
      }
    }
    const auto ranks = ranking.ranks();
    const auto metrics = metric_values(ranks);
    std::vector<std::pair<std::string, std::string>> table{{"baseline", kind}};
    for (const auto& [k, v] : metrics) table.emplace_back(k, fmt3(v));
    print_metrics_table(out, table);

    m.config = {{"kind", kind}, {"topk", std::to_string(topk)}, {"lowercase", no_lowercase ? "false" : "true"},
                {"candidates", candidates}, {"name_attributes", join(policy.attributes)}};
    write_manifest(out_path, m);
    if (!metrics_path.empty()) {
      std::ofstream f(metrics_path);
      if (!f) throw DataError("cannot write " + metrics_path);
      f << nlohmann::json{{"report", "baseline"}, {"kind", kind}, {"candidate_pool", candidates},
                          {"test_links", ranks.size()}}
               .dump()
        << '\n';
      for (const auto& [k, v] : metrics) f << nlohmann::json{{"metric", k}, {"value", v}}.dump() << '\n';
      write_manifest(metrics_path, m);
    }
    return kOk;
  }
};

struct SplitCmd {
  std::string name;
  DatasetOptions ds;
  std::string out_path;
  std::vector<std::string> name_attributes;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("split", "Separate time expressions from a name");
    sub->add_option("--name", name, "Name to split");
    ds.add(sub, false);
    sub->add_option("--out", out_path, "With --dataset: write every encoder input string, one per line");
    sub->add_option("--name-attribute", name_attributes, "Name attribute preference (repeatable)");
  }

  int run(std::ostream& out) const {
    if (!name.empty() || ds.dir.empty()) {
      if (name.empty() && ds.dir.empty()) throw CLI::ValidationError("split", "give --name or --dataset");
      const TimeSplit s = split_time(name);
      out << "time\t" << s.time << "\nremainder\t" << s.remainder << '\n';
      if (ds.dir.empty()) return kOk;
    }
    RunManifest m = start_manifest("split", &ds);
    const Dataset data = ds.load();
    const NamePolicy policy = make_policy(name_attributes);
    std::set<std::string> strings;
    for (const KnowledgeGraph* g : {&data.source, &data.target}) {
      for (const auto& [entity, entity_name] : entity_names(*g, policy)) {
        const TimeSplit s = split_time(entity_name);
        for (const std::string* str : {&entity_name, &s.time, &s.remainder}) {
          if (!str->empty()) strings.insert(*str);
        }
        std::string attrs = concat_attribute_values(*g, entity, policy);
        if (!attrs.empty()) strings.insert(std::move(attrs));
      }
    }
    std::ostream* dest = &out;
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw DataError("cannot write " + out_path);
      dest = &file;
    }
    for (const auto& s : strings) {
      if (s.find('\n') != std::string::npos) continue;
      *dest << s << '\n';
    }
    if (!out_path.empty()) {
      m.config["name_attributes"] = join(policy.attributes);
      write_manifest(out_path, m);
    }
    return kOk;
  }
};

struct EncodeCmd {
  DatasetOptions ds;
  ProviderOptions provider;
  std::string params_path;
  std::string out_path;
  std::string graph = "both";
  bool name_average = false;
  bool no_time_attention = false;
  bool no_other_attributes = false;
  std::vector<std::string> name_attributes;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("encode", "Write entity embeddings");
    ds.add(sub);
    provider.add(sub);
    sub->add_option("--params", params_path, "Trained parameters");
    sub->add_option("--out", out_path, "Embedding table")->required();
    sub->add_option("--graph", graph, "Which graph to encode")->check(CLI::IsMember({"source", "target", "both"}));
    sub->add_flag("--name-average", name_average, "Averaged name vectors instead of the trained encoder");
    sub->add_flag("--no-time-attention", no_time_attention, "Ablation: no time attention");
    sub->add_flag("--no-other-attributes", no_other_attributes, "Ablation: no other attribute values");
    sub->add_option("--name-attribute", name_attributes, "Name attribute preference (repeatable)");
  }

  int run(std::ostream& out) const {
    if (params_path.empty() && !name_average) {
      throw CLI::ValidationError("encode", "--params is required unless --name-average is given");
    }
    RunManifest m = start_manifest("encode", &ds);
    const Dataset data = ds.load();
    const NamePolicy policy = make_policy(name_attributes);
    std::optional<TaeParams> params;
    if (!name_average) params = TaeParams::load(params_path);
    const ProviderChain chain = provider.make(params ? params->dim() : 768);
    if (params && params->dim() != chain.dim()) {
      throw DataError("params dimension " + std::to_string(params->dim()) + " differs from provider dimension " +
                      std::to_string(chain.dim()));
    }
    EncoderOptions options{!no_time_attention, !no_other_attributes, policy};

    std::vector<EmbeddingTable> parts;
    for (const KnowledgeGraph* g : {&data.source, &data.target}) {
      if ((g == &data.source && graph == "target") || (g == &data.target && graph == "source")) continue;
      const auto names = entity_names(*g, policy);
      parts.push_back(name_average ? name_vector_baseline(chain, names)
                                   : encode_graph(*g, names, chain, *params, options));
    }
    EmbeddingTable table;
    std::size_t rows = 0;
    for (const auto& p : parts) rows += p.size();
    table.vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(chain.dim()));
    std::set<std::string> seen;
    Eigen::Index r = 0;
    for (const auto& p : parts) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!seen.insert(p.ids[i]).second) {
          throw DataError("entity " + p.ids[i] + " occurs in both graphs; encode them separately with --graph");
        }
        table.ids.push_back(p.ids[i]);
        table.vectors.row(r++) = p.vectors.row(static_cast<Eigen::Index>(i));
      }
    }
    table.save(out_path);
    out << "wrote " << table.size() << " embeddings of dimension " << table.dim() << " to " << out_path << '\n';

    provider.record(m);
    m.config["params"] = params_path;
    m.config["graph"] = graph;
    m.config["mode"] = name_average ? "name-average" : "tae";
    m.config["time_attention"] = no_time_attention ? "false" : "true";
    m.config["other_attributes"] = no_other_attributes ? "false" : "true";
    m.config["name_attributes"] = join(policy.attributes);
    if (params) m.config["beta"] = std::to_string(params->beta);
    write_manifest(out_path, m);
    return kOk;
  }
};

struct TrainCmd {
  DatasetOptions ds;
  ProviderOptions provider;
  std::string config_path;
  std::string out_path;
  bool grid = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> name_attributes;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("train", "Train the combination layer");
    ds.add(sub);
    provider.add(sub);
    sub->add_option("--config", config_path, "key = value training configuration");
    sub->add_option("--out", out_path, "Parameter file")->required();
    sub->add_flag("--grid", grid, "Grid search over margin x beta by validation Hits@1");
    sub->add_option("--seed", seed, "Override the configuration seed");
    sub->add_option("--name-attribute", name_attributes, "Name attribute preference (repeatable)");
  }

  int run(std::ostream& out) const {
    RunManifest m = start_manifest("train", &ds);
    TrainConfig config;
    config.seed = default_seed();
    if (!config_path.empty()) {
      config = TrainConfig::load(config_path);
      if (!config_sets_seed(config_path)) config.seed = default_seed();
    }
    if (seed) config.seed = *seed;
    const Dataset data = ds.load();
    const NamePolicy policy = make_policy(name_attributes);
    const ProviderChain chain = provider.make(config.dim);
    if (chain.dim() != config.dim) {
      if (!config_path.empty()) {
        throw DataError("store dimension " + std::to_string(chain.dim()) + " differs from config dim " +
                        std::to_string(config.dim));
      }
      config.dim = chain.dim();
    }

    std::vector<std::pair<double, double>> settings{{config.margin, config.beta}};
    if (grid) {
      settings.clear();
      for (double margin : {0.5, 1.5, 3.0, 3.5, 4.5, 5.0}) {
        for (double beta : {0.01, 0.02, 0.05, 0.1}) settings.emplace_back(margin, beta);
      }
    }
    std::optional<TrainResult> best;
    TrainConfig best_config = config;
    nlohmann::json log_lines = nlohmann::json::array();
    for (auto [margin, beta] : settings) {
      TrainConfig c = config;
      c.margin = margin;
      c.beta = beta;
      TrainResult r = train(data, chain, c, policy);
      for (const auto& e : r.log) {
        log_lines.push_back({{"margin", margin}, {"beta", beta}, {"epoch", e.epoch}, {"loss", e.loss},
                             {"valid_hits@1", e.valid_hits1}});
        out << "margin " << margin << " beta " << beta << " epoch " << e.epoch << " loss " << std::setprecision(10)
            << e.loss << " valid_hits@1 " << fmt3(e.valid_hits1) << '\n';
      }
      if (!best || r.best_valid_hits1 > best->best_valid_hits1) {
        best = std::move(r);
        best_config = c;
      }
    }
    best->params.save(out_path);
    const std::string log_path = out_path + ".log.jsonl";
    {
      std::ofstream f(log_path);
      if (!f) throw DataError("cannot write " + log_path);
      for (const auto& line : log_lines) f << line.dump() << '\n';
    }
    out << "best valid_hits@1 " << fmt3(best->best_valid_hits1) << " at epoch " << best->best_epoch
        << " (margin " << best_config.margin << ", beta " << best_config.beta << ")\n";

    m.config = best_config.to_map();
    m.config["grid"] = grid ? "true" : "false";
    m.config["name_attributes"] = join(policy.attributes);
    provider.record(m);
    m.seeds["train_seed"] = config.seed;
    write_manifest(out_path, m);
    write_manifest(log_path, m);
    return kOk;
  }
};

struct EvalCmd {
  DatasetOptions ds;
  std::string src_path;
  std::string tgt_path;
  std::string types_path;
  std::size_t topk = 10;
  std::string candidates = "test";
  std::string out_path;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("eval", "Cosine retrieval metrics on the test split");
    sub->add_option("--embeddings-src", src_path, "Source embedding table")->required();
    sub->add_option("--embeddings-tgt", tgt_path, "Target embedding table")->required();
    ds.add(sub);
    sub->add_option("--types", types_path, "Entity type file (entity \\t event|other)");
    sub->add_option("--topk", topk, "k of the second Hits@k")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--candidates", candidates, "Candidate pool")->check(CLI::IsMember({"test", "all"}));
    sub->add_option("--out", out_path, "Metrics JSON-lines");
  }

  int run(std::ostream& out) const {
    RunManifest m = start_manifest("eval", &ds);
    const Dataset data = ds.load();
    const EmbeddingTable src = EmbeddingTable::load(src_path);
    const EmbeddingTable tgt = src_path == tgt_path ? src : EmbeddingTable::load(tgt_path);
    const TestPool pool = test_pool(data, candidates);
    const RankingResult ranking =
        retrieve(gather(src, pool.sources, "source"), gather(tgt, pool.targets, "target"), pool.targets, pool.gold, topk);
    const auto ranks = ranking.ranks();

    EntityTypeMap types = data.types.value_or(EntityTypeMap{});
    if (!types_path.empty()) {
      types = EntityTypeMap{};
      std::ifstream in(types_path);
      if (!in) throw DataError("cannot open " + types_path);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        const std::string tag = tab == std::string::npos ? "" : line.substr(tab + 1);
        if (tag != "event" && tag != "other") {
          throw DataError(types_path + ":" + std::to_string(line_no) + ": expected entity \\t event|other");
        }
        types.set(line.substr(0, tab), tag == "event" ? EntityCategory::Event : EntityCategory::Other);
      }
    }

    std::vector<std::pair<std::string, double>> metrics{{"hits@1", hits_at(ranks, 1)},
                                                        {"hits@" + std::to_string(topk), hits_at(ranks, topk)},
                                                        {"mrr", mrr(ranks)}};
    const TypedRecall by_type = recall_by_type(ranks, pool.sources, types, 1);
    std::vector<std::pair<std::string, std::string>> table{{"candidate_pool", candidates},
                                                           {"test_links", std::to_string(ranks.size())}};
    for (const auto& [k, v] : metrics) table.emplace_back(k, fmt3(v));
    table.emplace_back("recall@1 event", by_type.event ? fmt3(*by_type.event) : "n/a");
    table.emplace_back("recall@1 other", by_type.other ? fmt3(*by_type.other) : "n/a");
    table.emplace_back("recall@1 all", fmt3(by_type.all));
    print_metrics_table(out, table);

    if (!out_path.empty()) {
      std::ofstream f(out_path);
      if (!f) throw DataError("cannot write " + out_path);
      f << nlohmann::json{{"report", "eval"}, {"candidate_pool", candidates == "test" ? "test-targets" : "all-targets"},
                          {"test_links", ranks.size()}}
               .dump()
        << '\n';
      for (const auto& [k, v] : metrics) f << nlohmann::json{{"metric", k}, {"value", v}}.dump() << '\n';
      auto typed = [&](const char* cat, const std::optional<double>& v) {
        nlohmann::json j{{"metric", "recall@1"}, {"category", cat}};
        j["value"] = v ? nlohmann::json(*v) : nlohmann::json("n/a");
        f << j.dump() << '\n';
      };
      typed("event", by_type.event);
      typed("other", by_type.other);
      typed("all", by_type.all);
      m.config = {{"embeddings_src", src_path}, {"embeddings_tgt", tgt_path}, {"types", types_path},
                  {"topk", std::to_string(topk)}, {"candidates", candidates}};
      write_manifest(out_path, m);
    }
    return kOk;
  }
};

struct CasesCmd {
  DatasetOptions ds;
  ProviderOptions provider;
  std::string entities;
  std::string src_path;
  std::string tgt_path;
  std::string out_path;
  std::string candidates = "test";
  std::vector<std::string> name_attributes;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("cases", "Top-3 case study report (TSV)");
    sub->add_option("--entities", entities, "Comma-separated source entities, or @file with one per line")->required();
    sub->add_option("--embeddings-src", src_path, "Source embedding table")->required();
    sub->add_option("--embeddings-tgt", tgt_path, "Target embedding table")->required();
    ds.add(sub);
    provider.add(sub);
    sub->add_option("--candidates", candidates, "Candidate pool")->check(CLI::IsMember({"test", "all"}));
    sub->add_option("--out", out_path, "Report file (default: standard output)");
    sub->add_option("--name-attribute", name_attributes, "Name attribute preference (repeatable)");
  }

  std::vector<std::string> requested() const {
    std::vector<std::string> ids;
    if (!entities.empty() && entities.front() == '@') {
      std::ifstream in(entities.substr(1));
      if (!in) throw DataError("cannot open " + entities.substr(1));
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.push_back(line);
      }
    } else {
      std::stringstream ss(entities);
      std::string id;
      while (std::getline(ss, id, ',')) {
        if (!id.empty()) ids.push_back(id);
      }
    }
    return ids;
  }

  int run(std::ostream& out) const {
    RunManifest m = start_manifest("cases", &ds);
    const Dataset data = ds.load();
    const NamePolicy policy = make_policy(name_attributes);
    const auto src_names = entity_names(data.source, policy);
    const auto tgt_names = entity_names(data.target, policy);
    const EmbeddingTable src = EmbeddingTable::load(src_path);
    const EmbeddingTable tgt = src_path == tgt_path ? src : EmbeddingTable::load(tgt_path);
    const TestPool pool = test_pool(data, candidates);

    CasePool sources{pool.sources, {}, gather(src, pool.sources, "source")};
    CasePool targets{pool.targets, {}, gather(tgt, pool.targets, "target")};
    for (const auto& s : pool.sources) sources.names.push_back(src_names.at(s));
    for (const auto& t : pool.targets) targets.names.push_back(tgt_names.at(t));

    CaseScorers scorers;
    Eigen::MatrixXd src_name_vectors;
    Eigen::MatrixXd tgt_name_vectors;
    if (provider.has_store()) {
      const ProviderChain chain = provider.make();
      auto name_vectors = [&](const std::vector<std::string>& names) {
        Eigen::MatrixXd mat(static_cast<Eigen::Index>(names.size()), static_cast<Eigen::Index>(chain.dim()));
        for (std::size_t i = 0; i < names.size(); ++i) {
          mat.row(static_cast<Eigen::Index>(i)) = mean_pool(chain.encode_sequence(names[i])).transpose();
        }
        return mat;
      };
      src_name_vectors = name_vectors(sources.names);
      tgt_name_vectors = name_vectors(targets.names);
      scorers.source_name_vectors = &src_name_vectors;
      scorers.target_name_vectors = &tgt_name_vectors;
    }
    const auto rows = case_report(requested(), sources, targets, pool.gold, scorers);
    if (out_path.empty()) {
      write_case_rows(out, rows);
    } else {
      std::ofstream f(out_path);
      if (!f) throw DataError("cannot write " + out_path);
      write_case_rows(f, rows);
      provider.record(m);
      m.config["entities"] = entities;
      m.config["embeddings_src"] = src_path;
      m.config["embeddings_tgt"] = tgt_path;
      m.config["candidates"] = candidates;
      write_manifest(out_path, m);
    }
    return kOk;
  }
};

struct MakeDatasetCmd {
  DatasetOptions ds;
  std::string out_dir;
  double threshold = 0.9;
  std::string shared_path;
  std::uint64_t seed = 0;
  bool no_lowercase = false;
  std::vector<std::string> name_attributes;

  void add(CLI::App& app) {
    seed = default_seed();
    auto* sub = app.add_subcommand("make-dataset", "Drop easy links and add shuffled halves of shared triples");
    ds.add(sub);
    sub->add_option("--out", out_dir, "Output dataset directory")->required();
    sub->add_option("--threshold", threshold, "Drop links with name similarity above this")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub->add_option("--shared-triples", shared_path, "Relation triples to distribute between the graphs");
    sub->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
    sub->add_flag("--no-lowercase", no_lowercase, "Compare names case-sensitively");
    sub->add_option("--name-attribute", name_attributes, "Name attribute preference (repeatable)");
  }

  int run(std::ostream& out) const {
    RunManifest m = start_manifest("make-dataset", &ds);
    Dataset data = ds.load();
    const NamePolicy policy = make_policy(name_attributes);
    const auto kept = filter_difficult_pairs(data.alignment.links, entity_names(data.source, policy),
                                             entity_names(data.target, policy), threshold, !no_lowercase);
    const std::set<EntityLink> kept_set(kept.begin(), kept.end());
    std::vector<std::size_t> remap(data.alignment.links.size(), kNoGold);
    AlignmentSet filtered;
    for (std::size_t i = 0; i < data.alignment.links.size(); ++i) {
      if (kept_set.count(data.alignment.links[i])) {
        remap[i] = filtered.links.size();
        filtered.links.push_back(data.alignment.links[i]);
      }
    }
    auto carry = [&](const std::vector<std::size_t>& split, std::vector<std::size_t>& dest) {
      for (std::size_t i : split) {
        if (remap[i] != kNoGold) dest.push_back(remap[i]);
      }
    };
    carry(data.alignment.train, filtered.train);
    carry(data.alignment.valid, filtered.valid);
    carry(data.alignment.test, filtered.test);
    out << "kept " << filtered.links.size() << " of " << data.alignment.links.size() << " links (threshold "
        << threshold << ")\n";
    data.alignment = std::move(filtered);

    if (!shared_path.empty()) {
      auto [first, second] = shuffle_split_shared_triples(read_relation_triples(shared_path), seed);
      for (const auto& t : first) data.source.add_relation_triple(t.head, t.relation, t.tail);
      for (const auto& t : second) data.target.add_relation_triple(t.head, t.relation, t.tail);
      out << "added " << first.size() << " shared triples to the source graph and " << second.size()
          << " to the target graph\n";
    }
    write_dataset(out_dir, data, ds.fold);
    m.config = {{"threshold", std::to_string(threshold)}, {"shared_triples", shared_path},
                {"lowercase", no_lowercase ? "false" : "true"}, {"name_attributes", join(policy.attributes)}};
    m.seeds["shuffle_seed"] = seed;
    write_manifest(fs::path(out_dir) / "ent_links", m);
    return kOk;
  }
};

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entity alignment toolkit for event-centric knowledge graphs", "eventea"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  AnalyzeCmd analyze;
  BaselineCmd baseline;
  SplitCmd split;
  EncodeCmd encode;
  TrainCmd train_cmd;
  EvalCmd eval;
  CasesCmd cases;
  MakeDatasetCmd make_dataset;
  try {
    analyze.add(app);
    baseline.add(app);
    split.add(app);
    encode.add(app);
    train_cmd.add(app);
    eval.add(app);
    cases.add(app);
    make_dataset.add(app);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::vector<std::string> rest(args.rbegin(), args.rend());
  if (!rest.empty()) rest.pop_back();  // program name
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "analyze") return analyze.run(out);
    if (name == "baseline") return baseline.run(out);
    if (name == "split") return split.run(out);
    if (name == "encode") return encode.run(out);
    if (name == "train") return train_cmd.run(out);
    if (name == "eval") return eval.run(out);
    if (name == "cases") return cases.run(out);
    if (name == "make-dataset") return make_dataset.run(out);
    err << "error: unknown subcommand " << name << '\n';
    return kUsage;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DivergenceError& e) {
    err << "error: training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace eventea::cli
