#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eventea/dataset_io.hpp"
#include "eventea/embeddings.hpp"
#include "eventea/random.hpp"
#include "eventea/tae.hpp"

namespace eventea {

/// Non-finite loss or gradient during training. Maps to CLI exit code 3.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t dim = 768;
  std::size_t batch_size = 256;
  double learning_rate = 1e-4;
  double margin = 3.0;
  double beta = 0.02;
  std::size_t negatives_per_positive = 5;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 2022;
  bool time_attention = true;
  bool other_attributes = true;

  /// Throws std::invalid_argument unless every size is positive, the margin
  /// is positive and beta is non-negative. A learning rate of 0 is allowed.
  void validate() const;

  /// Flat "key = value" text, '#' comments. Unknown keys are rejected.
  static TrainConfig parse(std::istream& in, std::string_view source = "<stream>");
  static TrainConfig load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  std::map<std::string, std::string> to_map() const;
};

/// An (source row, target row) pair in the source and target input tables.
struct EntityPair {
  std::size_t source = 0;
  std::size_t target = 0;
  auto operator<=>(const EntityPair&) const = default;
};

struct PairBatch {
  std::vector<EntityPair> positives;
  std::vector<EntityPair> negatives;
};

/// Sum of positive-pair distances plus hinge terms max(0, margin - distance)
/// over negatives. Embeddings are rows of the two matrices.
double contrastive_loss(const Eigen::MatrixXd& source_embeddings, const Eigen::MatrixXd& target_embeddings,
                        const PairBatch& batch, double margin);

/// For every positive, `per_positive` negatives that replace the source or
/// the target (fair coin) with a uniform draw from the corresponding pool,
/// redrawn while the pair is a gold link. Throws std::invalid_argument when a
/// positive cannot be corrupted on either side.
PairBatch sample_negatives(const std::vector<EntityPair>& positives, const std::vector<std::size_t>& source_pool,
                           const std::vector<std::size_t>& target_pool, const std::set<EntityPair>& gold,
                           std::size_t per_positive, Rng& rng);

struct Gradients {
  Eigen::MatrixXd weight;
  Vector bias;
};

/// Analytic gradient of contrastive_loss with embeddings e = W z + b, where
/// the rows of the input matrices are the stacked encoder inputs z = [h; f].
/// Terms at zero distance and hinge terms at or beyond the margin contribute
/// nothing. Throws DivergenceError on non-finite values.
Gradients loss_gradients(const Eigen::MatrixXd& source_inputs, const Eigen::MatrixXd& target_inputs,
                         const PairBatch& batch, const TaeParams& params, double margin);

/// Embeddings W z + b for every row of `inputs`.
Eigen::MatrixXd apply_params(const Eigen::MatrixXd& inputs, const TaeParams& params);

/// Adam with beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t dim, double learning_rate);
  void step(TaeParams& params, const Gradients& grads);

 private:
  double lr_;
  std::size_t t_ = 0;
  Eigen::MatrixXd m_w_, v_w_;
  Vector m_b_, v_b_;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double valid_hits1 = 0.0;
};

struct TrainResult {
  TaeParams params;  // best validation Hits@1
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_valid_hits1 = 0.0;
};

/// Input matrices for the rows of a link list.
struct EncodedSide {
  std::vector<std::string> ids;
  Eigen::MatrixXd inputs;  // rows = stacked [h; f]
};

EncodedSide encode_inputs(const KnowledgeGraph& graph, const std::vector<std::string>& ids,
                          const std::map<std::string, std::string, std::less<>>& names,
                          const ProviderChain& provider, double beta, const EncoderOptions& options);

/// Trains W and b on the train links, selecting by validation Hits@1 with
/// early stopping. Negatives are sampled once per positive from the entities
/// of the training links; batches are reshuffled every epoch. Throws
/// DivergenceError on a non-finite loss.
TrainResult train(const Dataset& dataset, const ProviderChain& provider, const TrainConfig& config,
                  const NamePolicy& names = {});

}  // namespace eventea
