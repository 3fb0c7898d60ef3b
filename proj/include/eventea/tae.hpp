#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "eventea/embeddings.hpp"
#include "eventea/kg.hpp"

namespace eventea {

/// Attention of each time token over the name tokens.
struct AttentionResult {
  Eigen::MatrixXd weights;        // k x m, rows sum to 1
  std::vector<Vector> attended;   // k vectors of dimension d
};

/// Cosine similarity; 0 if either vector is zero.
double cosine(const Vector& a, const Vector& b);

/// weights(i, j) = softmax over j of cos(name_j, time_i); attended_i is the
/// weighted sum of the name vectors. An empty time sequence gives zero rows.
/// Throws std::invalid_argument for an empty name sequence or mismatched
/// dimensions.
AttentionResult time_attention(const TokenSequence& time_seq, const TokenSequence& name_seq);

/// Mean of the attended vectors, zero vector when there are none.
Vector time_embedding(const std::vector<Vector>& attended, std::size_t dim);

/// r + beta * g.
Vector fuse(const Vector& r, const Vector& g, double beta);

/// Parameters of the linear combination layer, plus the frozen fusion weight.
struct TaeParams {
  Eigen::MatrixXd weight;  // d x 2d
  Vector bias;             // d
  double beta = 0.02;

  std::size_t dim() const { return static_cast<std::size_t>(bias.size()); }

  /// weight = [I | I] / 2, bias = 0.
  static TaeParams initial(std::size_t dim, double beta);
  /// Throws std::invalid_argument on inconsistent shapes, negative beta or
  /// non-finite entries.
  void validate() const;

  // Serialized in the store file format with dimension 2d:
  //   "W#i"  row i of weight (i < d)
  //   "b"    bias followed by d zeros
  //   "beta" beta followed by 2d-1 zeros
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static TaeParams read(std::istream& in, std::string_view source = "<stream>");
  static TaeParams load(const std::filesystem::path& path);
};

/// weight * [h; f] + bias.
Vector combine(const Vector& h, const Vector& f, const TaeParams& params);

struct EncoderOptions {
  bool time_attention = true;    // off: h = 0 and r pools the full name
  bool other_attributes = true;  // off: g = 0
  NamePolicy name_policy;
};

/// The parameter-free part of the encoder: the concatenation [h; f].
struct EncoderInputs {
  Vector h;
  Vector f;

  Vector stacked() const;
};

/// Runs time split, token encoding, attention, pooling and fusion for one
/// entity whose display name is `name`.
EncoderInputs encoder_inputs(const KnowledgeGraph& graph, std::string_view entity,
                             std::string_view name, const ProviderChain& provider, double beta,
                             const EncoderOptions& options);

Vector encode_entity(const KnowledgeGraph& graph, std::string_view entity, std::string_view name,
                     const ProviderChain& provider, const TaeParams& params,
                     const EncoderOptions& options);

/// Encodes the listed entities (all graph entities when `entities` is empty).
EmbeddingTable encode_graph(const KnowledgeGraph& graph,
                            const std::map<std::string, std::string, std::less<>>& names,
                            const ProviderChain& provider, const TaeParams& params,
                            const EncoderOptions& options,
                            const std::vector<std::string>& entities = {});

}  // namespace eventea
