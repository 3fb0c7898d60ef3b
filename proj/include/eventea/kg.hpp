#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eventea {

/// Malformed or inconsistent input data (bad lines, unknown entities,
/// alignment violations). Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RelationTriple {
  std::string head;
  std::string relation;
  std::string tail;
  auto operator<=>(const RelationTriple&) const = default;
};

struct AttributeTriple {
  std::string entity;
  std::string attribute;
  std::string value;
  auto operator<=>(const AttributeTriple&) const = default;
};

/// A knowledge graph: entity, relation and attribute identifiers plus the two
/// triple sets. Identifiers are stored NFC-normalized. Triples are kept in
/// insertion order with duplicates rejected.
class KnowledgeGraph {
 public:
  /// Returns false if the entity already existed.
  bool add_entity(std::string_view id);
  /// Adds the triple and its endpoints. Returns false for a duplicate.
  bool add_relation_triple(std::string_view head, std::string_view relation,
                           std::string_view tail);
  /// Adds the triple and its subject. Returns false for a duplicate. The value
  /// is stored verbatim.
  bool add_attribute_triple(std::string_view entity, std::string_view attribute,
                            std::string_view value);

  bool has_entity(std::string_view id) const;

  const std::set<std::string>& entities() const { return entities_; }
  const std::set<std::string>& relations() const { return relations_; }
  const std::set<std::string>& attributes() const { return attributes_; }
  const std::vector<RelationTriple>& relation_triples() const { return rel_triples_; }
  const std::vector<AttributeTriple>& attribute_triples() const { return attr_triples_; }

  /// Attribute triples of one entity, in insertion order.
  std::vector<const AttributeTriple*> attributes_of(std::string_view entity) const;

  bool operator==(const KnowledgeGraph& other) const;

 private:
  std::set<std::string> entities_;
  std::set<std::string> relations_;
  std::set<std::string> attributes_;
  std::vector<RelationTriple> rel_triples_;
  std::vector<AttributeTriple> attr_triples_;
  std::set<RelationTriple> rel_index_;
  std::set<AttributeTriple> attr_index_;
  std::multimap<std::string, std::size_t, std::less<>> attr_by_entity_;
};

struct EntityLink {
  std::string source;
  std::string target;
  auto operator<=>(const EntityLink&) const = default;
};

/// Gold 1-to-1 links between a source and a target graph, with the
/// train/valid/test partition expressed as indices into `links`.
struct AlignmentSet {
  std::vector<EntityLink> links;
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;

  std::vector<EntityLink> select(const std::vector<std::size_t>& indices) const;

  /// Throws DataError if a source or target entity occurs in two links, or if
  /// the splits are not a partition of the link indices.
  void validate() const;
};

enum class EntityCategory { Event, Other };

std::string_view to_string(EntityCategory c);

class EntityTypeMap {
 public:
  void set(std::string_view entity, EntityCategory category);
  /// Untagged entities are Other.
  EntityCategory category(std::string_view entity) const;
  std::size_t size() const { return tags_.size(); }
  bool empty() const { return tags_.empty(); }
  const std::map<std::string, EntityCategory, std::less<>>& tags() const { return tags_; }

 private:
  std::map<std::string, EntityCategory, std::less<>> tags_;
};

/// Ordered list of attribute identifiers that may carry an entity's display
/// name. An entry matches an attribute if it equals the full identifier or
/// the identifier's local name (text after the last '/' or '#').
struct NamePolicy {
  std::vector<std::string> attributes{"label", "name", "prefLabel"};

  bool matches(std::string_view attribute) const;
};

/// Text after the last '/' or '#' of an IRI.
std::string_view local_name(std::string_view iri);

/// Human-readable fallback name from an IRI: local name, percent-decoded,
/// underscores replaced with spaces. Never empty for a non-empty IRI.
std::string name_from_iri(std::string_view iri);

/// Strips surrounding quotes and a trailing "@lang" or "^^<type>" suffix from
/// an RDF-style literal. Plain strings are returned unchanged.
std::string literal_text(std::string_view value);

/// One display name per entity. The first attribute in policy order that the
/// entity carries wins; among several values of that attribute the
/// lexicographically smallest is taken. Entities without a usable value fall
/// back to name_from_iri.
std::map<std::string, std::string, std::less<>> entity_names(
    const KnowledgeGraph& graph, const NamePolicy& policy = {});

/// Copy of the graph restricted to entities with at least one relation triple.
KnowledgeGraph strip_isolated(const KnowledgeGraph& graph);

struct DegreeStats {
  std::size_t min_degree = 0;
  double mean_degree = 0.0;
  std::size_t max_degree = 0;
  std::size_t isolated = 0;
};

/// Degrees in the undirected relation multigraph over all entities.
DegreeStats degree_stats(const KnowledgeGraph& graph);

}  // namespace eventea
