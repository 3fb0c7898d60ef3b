#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eventea/kg.hpp"

namespace eventea {

// Benchmark layout (all files UTF-8, tab-separated, one record per line):
//   rel_triples_1, rel_triples_2    head \t relation \t tail
//   attr_triples_1, attr_triples_2  entity \t attribute \t value
//   ent_links                       source \t target
//   <fold>/train_links, <fold>/valid_links, <fold>/test_links
//   entity_types (optional)         entity \t event|other
// Triple lines are split on the first two tabs only; the value keeps any
// further tabs.

struct GraphLoadStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t relation_triples = 0;
  std::size_t attributes = 0;
  std::size_t attribute_triples = 0;
  std::size_t duplicate_triples = 0;
};

struct LoadStats {
  GraphLoadStats source;
  GraphLoadStats target;
  std::size_t links = 0;
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

struct Dataset {
  KnowledgeGraph source;
  KnowledgeGraph target;
  AlignmentSet alignment;
  std::optional<EntityTypeMap> types;
  LoadStats stats;
};

/// Loads the layout under `dir`. Split files are read from `dir / fold`;
/// with an empty fold they are read from `dir` itself if present, and
/// otherwise every link is a test link. Throws DataError naming file and
/// line for malformed lines, and for links or type tags that reference
/// unknown entities.
Dataset load_dataset(const std::filesystem::path& dir, const std::filesystem::path& fold = {});

/// Writes the layout; triple files in graph insertion order, links in
/// alignment order, splits into `dir / fold` (or `dir` for an empty fold).
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset,
                   const std::filesystem::path& fold = {});

GraphLoadStats graph_stats(const KnowledgeGraph& graph, std::size_t duplicates = 0);

/// Links whose name similarity (levenshtein_ratio on normalized names) is at
/// most `threshold`; links scoring strictly above it are dropped. Throws
/// DataError when a linked entity has no name.
std::vector<EntityLink> filter_difficult_pairs(
    const std::vector<EntityLink>& links,
    const std::map<std::string, std::string, std::less<>>& source_names,
    const std::map<std::string, std::string, std::less<>>& target_names, double threshold = 0.9,
    bool lowercase = true);

/// Shuffles the triples (Fisher-Yates, mt19937_64 seeded with `seed`) and
/// returns the first ceil(n/2) and the remaining floor(n/2).
std::pair<std::vector<RelationTriple>, std::vector<RelationTriple>> shuffle_split_shared_triples(
    std::vector<RelationTriple> triples, std::uint64_t seed);

/// Reads a relation triple file (used for the shared-triple input of
/// dataset construction).
std::vector<RelationTriple> read_relation_triples(const std::filesystem::path& path);

}  // namespace eventea
