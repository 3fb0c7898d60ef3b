#include "eventea/dataset_io.hpp"

#include <fstream>
#include <functional>
#include <set>

#include "eventea/random.hpp"
#include "eventea/string_sim.hpp"
#include "eventea/unicode.hpp"

namespace eventea {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void line_error(const fs::path& file, std::size_t line, const std::string& what) {
  throw DataError(file.string() + ":" + std::to_string(line) + ": " + what);
}

// Calls fn(fields, line_no) for each non-empty line. With fields == 3 the
// line is split on its first two tabs; with fields == 2 it must contain
// exactly one tab.
void for_each_record(const fs::path& file, std::size_t fields,
                     const std::function<void(const std::vector<std::string_view>&, std::size_t)>& fn) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> parts;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    parts.clear();
    std::string_view rest(line);
    for (std::size_t f = 0; f + 1 < fields; ++f) {
      auto tab = rest.find('\t');
      if (tab == std::string_view::npos) {
        line_error(file, line_no, "expected " + std::to_string(fields) + " tab-separated fields");
      }
      parts.push_back(rest.substr(0, tab));
      rest.remove_prefix(tab + 1);
    }
    if (fields == 2 && rest.find('\t') != std::string_view::npos) {
      line_error(file, line_no, "expected 2 tab-separated fields");
    }
    parts.push_back(rest);
    for (std::size_t f = 0; f + 1 < fields; ++f) {
      if (parts[f].empty()) line_error(file, line_no, "empty identifier field");
    }
    fn(parts, line_no);
  }
}

std::size_t load_graph(const fs::path& rel, const fs::path& attr, KnowledgeGraph& graph) {
  std::size_t duplicates = 0;
  for_each_record(rel, 3, [&](const auto& f, std::size_t line_no) {
    if (f[2].empty()) line_error(rel, line_no, "empty tail entity");
    if (!graph.add_relation_triple(f[0], f[1], f[2])) ++duplicates;
  });
  for_each_record(attr, 3, [&](const auto& f, std::size_t) {
    if (!graph.add_attribute_triple(f[0], f[1], f[2])) ++duplicates;
  });
  return duplicates;
}

std::vector<EntityLink> load_links(const fs::path& file) {
  std::vector<EntityLink> links;
  for_each_record(file, 2, [&](const auto& f, std::size_t line_no) {
    if (f[1].empty()) line_error(file, line_no, "empty target entity");
    links.push_back({unicode::nfc(f[0]), unicode::nfc(f[1])});
  });
  return links;
}

std::vector<std::size_t> load_split(const fs::path& file, const std::map<EntityLink, std::size_t>& index) {
  std::vector<std::size_t> out;
  std::size_t line_no = 0;
  for (const auto& link : load_links(file)) {
    ++line_no;
    auto it = index.find(link);
    if (it == index.end()) {
      throw DataError(file.string() + ": link not in ent_links: " + link.source + " -> " + link.target);
    }
    out.push_back(it->second);
  }
  return out;
}

void write_lines(const fs::path& file, const std::function<void(std::ofstream&)>& fn) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  fn(out);
}

}  // namespace

GraphLoadStats graph_stats(const KnowledgeGraph& graph, std::size_t duplicates) {
  return {graph.entities().size(),         graph.relations().size(),
          graph.relation_triples().size(), graph.attributes().size(),
          graph.attribute_triples().size(), duplicates};
}

Dataset load_dataset(const fs::path& dir, const fs::path& fold) {
  Dataset ds;
  const std::size_t dup1 = load_graph(dir / "rel_triples_1", dir / "attr_triples_1", ds.source);
  const std::size_t dup2 = load_graph(dir / "rel_triples_2", dir / "attr_triples_2", ds.target);

  const fs::path links_file = dir / "ent_links";
  ds.alignment.links = load_links(links_file);
  for (const auto& link : ds.alignment.links) {
    if (!ds.source.has_entity(link.source)) {
      throw DataError(links_file.string() + ": unknown source entity " + link.source);
    }
    if (!ds.target.has_entity(link.target)) {
      throw DataError(links_file.string() + ": unknown target entity " + link.target);
    }
  }

  std::map<EntityLink, std::size_t> index;
  for (std::size_t i = 0; i < ds.alignment.links.size(); ++i) index.emplace(ds.alignment.links[i], i);

  const fs::path split_dir = fold.empty() ? dir : dir / fold;
  if (!fold.empty() && !fs::is_directory(split_dir)) {
    throw DataError("fold directory not found: " + split_dir.string());
  }
  if (fs::exists(split_dir / "train_links") || !fold.empty()) {
    ds.alignment.train = load_split(split_dir / "train_links", index);
    ds.alignment.valid = load_split(split_dir / "valid_links", index);
    ds.alignment.test = load_split(split_dir / "test_links", index);
  } else {
    for (std::size_t i = 0; i < ds.alignment.links.size(); ++i) ds.alignment.test.push_back(i);
  }
  ds.alignment.validate();

  const fs::path types_file = dir / "entity_types";
  if (fs::exists(types_file)) {
    EntityTypeMap types;
    for_each_record(types_file, 2, [&](const auto& f, std::size_t line_no) {
      if (!ds.source.has_entity(f[0]) && !ds.target.has_entity(f[0])) {
        line_error(types_file, line_no, "unknown entity " + std::string(f[0]));
      }
      if (f[1] == "event") {
        types.set(f[0], EntityCategory::Event);
      } else if (f[1] == "other") {
        types.set(f[0], EntityCategory::Other);
      } else {
        line_error(types_file, line_no, "tag must be 'event' or 'other'");
      }
    });
    ds.types = std::move(types);
  }

  ds.stats.source = graph_stats(ds.source, dup1);
  ds.stats.target = graph_stats(ds.target, dup2);
  ds.stats.links = ds.alignment.links.size();
  ds.stats.train = ds.alignment.train.size();
  ds.stats.valid = ds.alignment.valid.size();
  ds.stats.test = ds.alignment.test.size();
  return ds;
}

void write_dataset(const fs::path& dir, const Dataset& ds, const fs::path& fold) {
  fs::create_directories(dir);
  auto write_graph = [&](const KnowledgeGraph& g, const std::string& suffix) {
    write_lines(dir / ("rel_triples_" + suffix), [&](std::ofstream& out) {
      for (const auto& t : g.relation_triples()) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
    });
    write_lines(dir / ("attr_triples_" + suffix), [&](std::ofstream& out) {
      for (const auto& t : g.attribute_triples()) out << t.entity << '\t' << t.attribute << '\t' << t.value << '\n';
    });
  };
  write_graph(ds.source, "1");
  write_graph(ds.target, "2");
  auto write_link_file = [&](const fs::path& file, const std::vector<EntityLink>& links) {
    write_lines(file, [&](std::ofstream& out) {
      for (const auto& l : links) out << l.source << '\t' << l.target << '\n';
    });
  };
  write_link_file(dir / "ent_links", ds.alignment.links);
  const fs::path split_dir = fold.empty() ? dir : dir / fold;
  fs::create_directories(split_dir);
  write_link_file(split_dir / "train_links", ds.alignment.select(ds.alignment.train));
  write_link_file(split_dir / "valid_links", ds.alignment.select(ds.alignment.valid));
  write_link_file(split_dir / "test_links", ds.alignment.select(ds.alignment.test));
  if (ds.types) {
    write_lines(dir / "entity_types", [&](std::ofstream& out) {
      for (const auto& [entity, cat] : ds.types->tags()) out << entity << '\t' << to_string(cat) << '\n';
    });
  }
}

std::vector<EntityLink> filter_difficult_pairs(
    const std::vector<EntityLink>& links, const std::map<std::string, std::string, std::less<>>& source_names,
    const std::map<std::string, std::string, std::less<>>& target_names, double threshold, bool lowercase) {
  std::vector<EntityLink> kept;
  for (const auto& link : links) {
    auto s = source_names.find(link.source);
    if (s == source_names.end()) throw DataError("no name for source entity " + link.source);
    auto t = target_names.find(link.target);
    if (t == target_names.end()) throw DataError("no name for target entity " + link.target);
    const double sim = levenshtein_ratio(unicode::prepare(s->second, lowercase), unicode::prepare(t->second, lowercase));
    if (sim <= threshold) kept.push_back(link);
  }
  return kept;
}

std::pair<std::vector<RelationTriple>, std::vector<RelationTriple>> shuffle_split_shared_triples(
    std::vector<RelationTriple> triples, std::uint64_t seed) {
  Rng rng(seed);
  shuffle(triples, rng);
  const std::size_t first = (triples.size() + 1) / 2;
  std::vector<RelationTriple> a(std::make_move_iterator(triples.begin()),
                                std::make_move_iterator(triples.begin() + static_cast<std::ptrdiff_t>(first)));
  std::vector<RelationTriple> b(std::make_move_iterator(triples.begin() + static_cast<std::ptrdiff_t>(first)),
                                std::make_move_iterator(triples.end()));
  return {std::move(a), std::move(b)};
}

std::vector<RelationTriple> read_relation_triples(const fs::path& path) {
  std::vector<RelationTriple> out;
  std::set<RelationTriple> seen;
  for_each_record(path, 3, [&](const auto& f, std::size_t line_no) {
    if (f[2].empty()) line_error(path, line_no, "empty tail entity");
    RelationTriple t{unicode::nfc(f[0]), unicode::nfc(f[1]), unicode::nfc(f[2])};
    if (seen.insert(t).second) out.push_back(std::move(t));
  });
  return out;
}

}  // namespace eventea
