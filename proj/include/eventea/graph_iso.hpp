#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eventea/kg.hpp"

namespace eventea {

/// Undirected simple graph with integer node labels. Adjacency lists are
/// sorted, without self-loops or parallel edges.
struct LabeledGraph {
  std::vector<std::string> names;  // entity identifier per node
  std::vector<int> labels;
  std::vector<std::vector<std::size_t>> adjacency;

  std::size_t size() const { return labels.size(); }
  /// Builds adjacency from an edge list, dropping self-loops and duplicates.
  void set_edges(const std::vector<std::pair<std::size_t, std::size_t>>& edges);
};

/// Node per entity of each graph (isolated entities are expected to have been
/// stripped), edges from relation triples with relation identity dropped.
/// Both ends of a link present in the two graphs share one label; every other
/// node gets a fresh label. Labels are dense, assigned in sorted entity order.
std::pair<LabeledGraph, LabeledGraph> build_label_graphs(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                                                         const std::vector<EntityLink>& links);

/// Sparse WL feature vector: (iteration, compressed label) -> count.
using WlFeatures = std::map<std::pair<std::size_t, int>, std::uint64_t>;

/// Label compression shared across every graph run through it, so equal
/// signatures in different graphs get equal labels.
class WlDictionary {
 public:
  int compress(int label, const std::vector<int>& neighbor_labels);

 private:
  std::map<std::pair<int, std::vector<int>>, int> table_;
};

/// Counts the labels of iterations 0..iterations. At each iteration a node's
/// new label is the compressed (old label, sorted neighbour labels).
WlFeatures wl_feature_vector(const LabeledGraph& graph, std::size_t iterations, WlDictionary& dictionary);

/// Sum over shared keys of count products.
double wl_kernel(const WlFeatures& a, const WlFeatures& b);

/// Normalized kernel k12 / sqrt(k11 k22) of two labeled graphs sharing one
/// dictionary; 0 when either self-kernel is 0.
double wl_similarity(const LabeledGraph& g1, const LabeledGraph& g2, std::size_t iterations);

/// Strips isolated entities, builds the label graphs and scores them.
double wl_similarity(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2, const std::vector<EntityLink>& links,
                     std::size_t iterations = 3);

}  // namespace eventea
