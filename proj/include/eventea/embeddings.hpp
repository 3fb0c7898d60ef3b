#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "eventea/kg.hpp"

namespace eventea {

using Vector = Eigen::VectorXd;

/// Token strings with one vector each. `dim` is kept explicitly so that an
/// empty sequence still knows its dimension.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<Vector> vectors;
  std::size_t dim = 0;

  std::size_t size() const { return vectors.size(); }
  bool empty() const { return vectors.empty(); }
};

// Store file format (text, UTF-8):
//   <count> <dim>\n
//   <key>\t<v1> <v2> ... <v_dim>\n      (count records)
// Contextual stores write one record per token position with key
// "<string>#<position>", positions 0..n-1 in order.

struct StoreRecord {
  std::string key;
  std::vector<double> values;
};

/// Reads every record of a store file. Throws DataError with the line number
/// on a malformed header or record.
std::vector<StoreRecord> read_store_records(std::istream& in, std::size_t* dim_out,
                                            std::string_view source = "<stream>");
/// Writes records with shortest round-trip decimal formatting.
void write_store_records(std::ostream& out, std::size_t dim,
                         const std::vector<StoreRecord>& records);

/// Vocabulary of token vectors (e.g. exported FastText vectors).
class StaticStore {
 public:
  explicit StaticStore(std::size_t dim) : dim_(dim) {}

  static StaticStore load(const std::filesystem::path& path);
  static StaticStore read(std::istream& in, std::string_view source = "<stream>");
  void write(std::ostream& out) const;

  void insert(std::string token, const Vector& v);
  /// Null when the token is not in the vocabulary.
  const Eigen::VectorXf* find(std::string_view token) const;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dim_;
  std::map<std::string, Eigen::VectorXf, std::less<>> vectors_;
};

/// Per-string token vector sequences (e.g. exported contextual model states),
/// keyed by the exact input string.
class ContextualStore {
 public:
  explicit ContextualStore(std::size_t dim) : dim_(dim) {}

  static ContextualStore load(const std::filesystem::path& path);
  static ContextualStore read(std::istream& in, std::string_view source = "<stream>");
  void write(std::ostream& out) const;

  void insert(std::string key, std::vector<Vector> vectors);
  const std::vector<Eigen::VectorXf>* find(std::string_view key) const;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return sequences_.size(); }

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<Eigen::VectorXf>, std::less<>> sequences_;
};

/// Lowercases, then splits on whitespace and punctuation. Digit runs stay
/// whole, and a year range such as "1948–49" or "1990-1991" stays one token.
std::vector<std::string> tokenize(std::string_view text);

/// Deterministic unit-norm pseudo-random vector for a token: the generator is
/// seeded with stable_hash(token) XOR seed and yields dim normal draws.
Vector hash_vector(std::string_view token, std::size_t dim, std::uint64_t seed);

/// Resolves strings to token vectors: contextual store (whole string), else
/// per token static store, else hash fallback. Always succeeds.
class ProviderChain {
 public:
  /// Throws std::invalid_argument if the stores disagree on dimension or
  /// dim is zero.
  ProviderChain(std::size_t dim, std::uint64_t fallback_seed,
                std::shared_ptr<const ContextualStore> contextual = nullptr,
                std::shared_ptr<const StaticStore> static_store = nullptr);

  std::size_t dim() const { return dim_; }
  std::uint64_t fallback_seed() const { return seed_; }

  TokenSequence encode_sequence(std::string_view text) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::shared_ptr<const ContextualStore> contextual_;
  std::shared_ptr<const StaticStore> static_;
};

/// Mean of the sequence's vectors; the zero vector for an empty sequence.
Vector mean_pool(const TokenSequence& seq);

/// Row-per-entity embedding table, serialized in the store file format with
/// entity identifiers as keys.
struct EmbeddingTable {
  std::vector<std::string> ids;
  Eigen::MatrixXd vectors;  // ids.size() x dim

  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  std::size_t size() const { return ids.size(); }
  /// Row index of an id, or nullopt.
  std::optional<std::size_t> find(std::string_view id) const;
  Vector row(std::size_t i) const { return vectors.row(static_cast<Eigen::Index>(i)).transpose(); }

  static EmbeddingTable load(const std::filesystem::path& path);
  static EmbeddingTable read(std::istream& in, std::string_view source = "<stream>");
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

 private:
  mutable std::unordered_map<std::string, std::size_t> index_;
};

/// Entity vector = mean_pool(encode_sequence(name)), rows in the order of
/// the map's keys.
EmbeddingTable name_vector_baseline(const ProviderChain& provider,
                                    const std::map<std::string, std::string, std::less<>>& names);

/// All attribute values of the entity except those of excluded attributes,
/// sorted by (attribute, value) and joined by single spaces.
std::string concat_attribute_values(const KnowledgeGraph& graph, std::string_view entity,
                                    const NamePolicy& exclude);

}  // namespace eventea
