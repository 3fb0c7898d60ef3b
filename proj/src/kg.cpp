#include "eventea/kg.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "eventea/unicode.hpp"

namespace eventea {

bool KnowledgeGraph::add_entity(std::string_view id) {
  return entities_.insert(unicode::nfc(id)).second;
}

bool KnowledgeGraph::add_relation_triple(std::string_view head, std::string_view relation,
                                         std::string_view tail) {
  RelationTriple t{unicode::nfc(head), unicode::nfc(relation), unicode::nfc(tail)};
  if (!rel_index_.insert(t).second) return false;
  entities_.insert(t.head);
  entities_.insert(t.tail);
  relations_.insert(t.relation);
  rel_triples_.push_back(std::move(t));
  return true;
}

bool KnowledgeGraph::add_attribute_triple(std::string_view entity, std::string_view attribute,
                                          std::string_view value) {
  AttributeTriple t{unicode::nfc(entity), unicode::nfc(attribute), std::string(value)};
  if (!attr_index_.insert(t).second) return false;
  entities_.insert(t.entity);
  attributes_.insert(t.attribute);
  attr_by_entity_.emplace(t.entity, attr_triples_.size());
  attr_triples_.push_back(std::move(t));
  return true;
}

bool KnowledgeGraph::has_entity(std::string_view id) const {
  return entities_.find(unicode::nfc(id)) != entities_.end();
}

std::vector<const AttributeTriple*> KnowledgeGraph::attributes_of(std::string_view entity) const {
  std::vector<const AttributeTriple*> out;
  auto [lo, hi] = attr_by_entity_.equal_range(entity);
  for (auto it = lo; it != hi; ++it) out.push_back(&attr_triples_[it->second]);
  return out;
}

bool KnowledgeGraph::operator==(const KnowledgeGraph& other) const {
  return entities_ == other.entities_ && relations_ == other.relations_ &&
         attributes_ == other.attributes_ && rel_index_ == other.rel_index_ &&
         attr_index_ == other.attr_index_;
}

std::vector<EntityLink> AlignmentSet::select(const std::vector<std::size_t>& indices) const {
  std::vector<EntityLink> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(links.at(i));
  return out;
}

void AlignmentSet::validate() const {
  std::set<std::string_view> sources;
  std::set<std::string_view> targets;
  for (const auto& link : links) {
    if (!sources.insert(link.source).second) {
      throw DataError("source entity aligned more than once: " + link.source);
    }
    if (!targets.insert(link.target).second) {
      throw DataError("target entity aligned more than once: " + link.target);
    }
  }
  std::vector<bool> seen(links.size(), false);
  std::size_t covered = 0;
  for (const auto* split : {&train, &valid, &test}) {
    for (std::size_t i : *split) {
      if (i >= links.size()) throw DataError("split index out of range");
      if (seen[i]) {
        throw DataError("link appears in more than one split: " + links[i].source);
      }
      seen[i] = true;
      ++covered;
    }
  }
  if (covered != links.size()) {
    throw DataError("train/valid/test splits cover " + std::to_string(covered) + " of " +
                    std::to_string(links.size()) + " links");
  }
}

std::string_view to_string(EntityCategory c) {
  return c == EntityCategory::Event ? "event" : "other";
}

void EntityTypeMap::set(std::string_view entity, EntityCategory category) {
  tags_.insert_or_assign(unicode::nfc(entity), category);
}

EntityCategory EntityTypeMap::category(std::string_view entity) const {
  auto it = tags_.find(entity);
  return it == tags_.end() ? EntityCategory::Other : it->second;
}

std::string_view local_name(std::string_view iri) {
  auto pos = iri.find_last_of("/#");
  if (pos == std::string_view::npos) return iri;
  return iri.substr(pos + 1);
}

bool NamePolicy::matches(std::string_view attribute) const {
  for (const auto& a : attributes) {
    if (attribute == a || local_name(attribute) == a) return true;
  }
  return false;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = hex_value(s[i + 1]);
      int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string name_from_iri(std::string_view iri) {
  std::string_view local = local_name(iri);
  if (local.empty()) local = iri;
  std::string decoded = percent_decode(local);
  std::replace(decoded.begin(), decoded.end(), '_', ' ');
  std::string name = collapse_whitespace(unicode::nfc(decoded));
  return name.empty() ? std::string(iri) : name;
}

std::string literal_text(std::string_view value) {
  if (value.size() >= 2 && value.front() == '"') {
    auto close = value.rfind('"');
    if (close > 0) {
      std::string_view rest = value.substr(close + 1);
      if (rest.empty() || rest.front() == '@' || rest.starts_with("^^")) {
        return std::string(value.substr(1, close - 1));
      }
    }
  }
  return std::string(value);
}

std::map<std::string, std::string, std::less<>> entity_names(const KnowledgeGraph& graph,
                                                             const NamePolicy& policy) {
  // best[entity] = (policy rank, value)
  std::unordered_map<std::string_view, std::pair<std::size_t, std::string>> best;
  for (const auto& t : graph.attribute_triples()) {
    std::size_t rank = policy.attributes.size();
    for (std::size_t i = 0; i < policy.attributes.size(); ++i) {
      const auto& a = policy.attributes[i];
      if (t.attribute == a || local_name(t.attribute) == a) {
        rank = i;
        break;
      }
    }
    if (rank == policy.attributes.size()) continue;
    std::string text = collapse_whitespace(unicode::nfc(literal_text(t.value)));
    if (text.empty()) continue;
    auto it = best.find(t.entity);
    if (it == best.end()) {
      best.emplace(t.entity, std::make_pair(rank, std::move(text)));
    } else if (rank < it->second.first ||
               (rank == it->second.first && text < it->second.second)) {
      it->second = {rank, std::move(text)};
    }
  }
  std::map<std::string, std::string, std::less<>> names;
  for (const auto& e : graph.entities()) {
    auto it = best.find(e);
    names.emplace(e, it != best.end() ? it->second.second : name_from_iri(e));
  }
  return names;
}

KnowledgeGraph strip_isolated(const KnowledgeGraph& graph) {
  KnowledgeGraph out;
  std::set<std::string_view> connected;
  for (const auto& t : graph.relation_triples()) {
    out.add_relation_triple(t.head, t.relation, t.tail);
    connected.insert(t.head);
    connected.insert(t.tail);
  }
  for (const auto& t : graph.attribute_triples()) {
    if (connected.count(t.entity)) out.add_attribute_triple(t.entity, t.attribute, t.value);
  }
  return out;
}

DegreeStats degree_stats(const KnowledgeGraph& graph) {
  DegreeStats stats;
  if (graph.entities().empty()) return stats;
  std::unordered_map<std::string_view, std::size_t> degree;
  for (const auto& t : graph.relation_triples()) {
    ++degree[t.head];
    ++degree[t.tail];
  }
  stats.min_degree = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  for (const auto& e : graph.entities()) {
    auto it = degree.find(e);
    std::size_t d = it == degree.end() ? 0 : it->second;
    stats.min_degree = std::min(stats.min_degree, d);
    stats.max_degree = std::max(stats.max_degree, d);
    total += d;
    if (d == 0) ++stats.isolated;
  }
  stats.mean_degree = static_cast<double>(total) / static_cast<double>(graph.entities().size());
  return stats;
}

}  // namespace eventea
