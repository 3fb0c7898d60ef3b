#include "eventea/graph_iso.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace eventea {

void LabeledGraph::set_edges(const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  adjacency.assign(labels.size(), {});
  for (auto [a, b] : edges) {
    if (a == b) continue;
    adjacency.at(a).push_back(b);
    adjacency.at(b).push_back(a);
  }
  for (auto& list : adjacency) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

namespace {

LabeledGraph make_graph(const KnowledgeGraph& kg) {
  LabeledGraph g;
  g.names.assign(kg.entities().begin(), kg.entities().end());
  g.labels.assign(g.names.size(), -1);
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < g.names.size(); ++i) index.emplace(g.names[i], i);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(kg.relation_triples().size());
  for (const auto& t : kg.relation_triples()) edges.emplace_back(index.at(t.head), index.at(t.tail));
  g.set_edges(edges);
  return g;
}

}  // namespace

std::pair<LabeledGraph, LabeledGraph> build_label_graphs(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                                                         const std::vector<EntityLink>& links) {
  LabeledGraph g1 = make_graph(kg1);
  LabeledGraph g2 = make_graph(kg2);
  std::unordered_map<std::string_view, std::size_t> index2;
  for (std::size_t i = 0; i < g2.names.size(); ++i) index2.emplace(g2.names[i], i);
  std::unordered_map<std::string_view, std::size_t> partner;  // kg1 entity -> kg2 node
  for (const auto& link : links) {
    auto it = index2.find(link.target);
    if (it != index2.end() && kg1.entities().count(link.source)) partner.emplace(link.source, it->second);
  }
  int next = 0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    g1.labels[i] = next;
    auto it = partner.find(g1.names[i]);
    if (it != partner.end()) g2.labels[it->second] = next;
    ++next;
  }
  for (std::size_t i = 0; i < g2.size(); ++i) {
    if (g2.labels[i] < 0) g2.labels[i] = next++;
  }
  return {std::move(g1), std::move(g2)};
}

int WlDictionary::compress(int label, const std::vector<int>& neighbor_labels) {
  auto [it, inserted] = table_.try_emplace({label, neighbor_labels}, static_cast<int>(table_.size()));
  return it->second;
}

WlFeatures wl_feature_vector(const LabeledGraph& graph, std::size_t iterations, WlDictionary& dictionary) {
  WlFeatures features;
  std::vector<int> labels = graph.labels;
  for (int l : labels) ++features[{0, l}];
  std::vector<int> next(labels.size());
  std::vector<int> neighbor_labels;
  for (std::size_t it = 1; it <= iterations; ++it) {
    for (std::size_t v = 0; v < labels.size(); ++v) {
      neighbor_labels.clear();
      for (std::size_t u : graph.adjacency[v]) neighbor_labels.push_back(labels[u]);
      std::sort(neighbor_labels.begin(), neighbor_labels.end());
      next[v] = dictionary.compress(labels[v], neighbor_labels);
    }
    labels.swap(next);
    for (int l : labels) ++features[{it, l}];
  }
  return features;
}

double wl_kernel(const WlFeatures& a, const WlFeatures& b) {
  // Integer accumulation keeps the kernel exact for graphs of any practical size.
  unsigned __int128 sum = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      sum += static_cast<unsigned __int128>(ia->second) * ib->second;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(sum);
}

double wl_similarity(const LabeledGraph& g1, const LabeledGraph& g2, std::size_t iterations) {
  WlDictionary dictionary;
  const WlFeatures f1 = wl_feature_vector(g1, iterations, dictionary);
  const WlFeatures f2 = wl_feature_vector(g2, iterations, dictionary);
  const double k11 = wl_kernel(f1, f1);
  const double k22 = wl_kernel(f2, f2);
  if (k11 == 0.0 || k22 == 0.0) return 0.0;
  const double score = wl_kernel(f1, f2) / std::sqrt(k11 * k22);
  return std::clamp(score, 0.0, 1.0);
}

double wl_similarity(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2, const std::vector<EntityLink>& links,
                     std::size_t iterations) {
  auto [g1, g2] = build_label_graphs(strip_isolated(kg1), strip_isolated(kg2), links);
  return wl_similarity(g1, g2, iterations);
}

}  // namespace eventea
