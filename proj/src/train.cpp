#include "eventea/train.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "eventea/eval.hpp"

namespace eventea {

// ---- TrainConfig ----

void TrainConfig::validate() const {
  if (dim == 0 || batch_size == 0 || negatives_per_positive == 0 || max_epochs == 0 || patience == 0) {
    throw std::invalid_argument("train config: sizes must be positive");
  }
  if (!(margin > 0.0) || !std::isfinite(margin)) throw std::invalid_argument("train config: margin must be > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("train config: beta must be >= 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train config: learning_rate must be >= 0");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& value, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument(where + ": bad value '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& value, const std::string& where) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument(where + ": expected true/false, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

TrainConfig TrainConfig::parse(std::istream& in, std::string_view source) {
  TrainConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key == "dim") c.dim = parse_number<std::size_t>(value, where);
    else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(value, where);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(value, where);
    else if (key == "margin") c.margin = parse_number<double>(value, where);
    else if (key == "beta") c.beta = parse_number<double>(value, where);
    else if (key == "negatives_per_positive") c.negatives_per_positive = parse_number<std::size_t>(value, where);
    else if (key == "max_epochs") c.max_epochs = parse_number<std::size_t>(value, where);
    else if (key == "patience") c.patience = parse_number<std::size_t>(value, where);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(value, where);
    else if (key == "time_attention") c.time_attention = parse_bool(value, where);
    else if (key == "other_attributes") c.other_attributes = parse_bool(value, where);
    else throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse(in, path.string());
}

std::map<std::string, std::string> TrainConfig::to_map() const {
  return {{"dim", std::to_string(dim)},
          {"batch_size", std::to_string(batch_size)},
          {"learning_rate", format_double(learning_rate)},
          {"margin", format_double(margin)},
          {"beta", format_double(beta)},
          {"negatives_per_positive", std::to_string(negatives_per_positive)},
          {"max_epochs", std::to_string(max_epochs)},
          {"patience", std::to_string(patience)},
          {"seed", std::to_string(seed)},
          {"time_attention", time_attention ? "true" : "false"},
          {"other_attributes", other_attributes ? "true" : "false"}};
}

void TrainConfig::write(std::ostream& out) const {
  for (const auto& [k, v] : to_map()) out << k << " = " << v << '\n';
}

// ---- loss and gradients ----

double contrastive_loss(const Eigen::MatrixXd& source_embeddings, const Eigen::MatrixXd& target_embeddings,
                        const PairBatch& batch, double margin) {
  double loss = 0.0;
  for (const auto& p : batch.positives) {
    loss += (source_embeddings.row(static_cast<Eigen::Index>(p.source)) -
             target_embeddings.row(static_cast<Eigen::Index>(p.target)))
                .norm();
  }
  for (const auto& n : batch.negatives) {
    const double dist = (source_embeddings.row(static_cast<Eigen::Index>(n.source)) -
                         target_embeddings.row(static_cast<Eigen::Index>(n.target)))
                            .norm();
    loss += std::max(0.0, margin - dist);
  }
  return loss;
}

PairBatch sample_negatives(const std::vector<EntityPair>& positives, const std::vector<std::size_t>& source_pool,
                           const std::vector<std::size_t>& target_pool, const std::set<EntityPair>& gold,
                           std::size_t per_positive, Rng& rng) {
  if (source_pool.empty() || target_pool.empty()) throw std::invalid_argument("sample_negatives: empty pool");
  PairBatch batch;
  batch.positives = positives;
  batch.negatives.reserve(positives.size() * per_positive);

  auto can_corrupt = [&](const EntityPair& p, bool source_side) {
    const auto& pool = source_side ? source_pool : target_pool;
    for (std::size_t e : pool) {
      EntityPair c = source_side ? EntityPair{e, p.target} : EntityPair{p.source, e};
      if (!gold.count(c) && c != p) return true;
    }
    return false;
  };

  for (const auto& p : positives) {
    const bool source_ok = can_corrupt(p, true);
    const bool target_ok = can_corrupt(p, false);
    if (!source_ok && !target_ok) {
      throw std::invalid_argument("sample_negatives: positive pair cannot be corrupted on either side");
    }
    for (std::size_t n = 0; n < per_positive; ++n) {
      bool replace_source = (rng() >> 63) != 0;
      if (replace_source && !source_ok) replace_source = false;
      if (!replace_source && !target_ok) replace_source = true;
      EntityPair c;
      do {
        c = replace_source ? EntityPair{source_pool[uniform_index(rng, source_pool.size())], p.target}
                           : EntityPair{p.source, target_pool[uniform_index(rng, target_pool.size())]};
      } while (gold.count(c) || c == p);
      batch.negatives.push_back(c);
    }
  }
  return batch;
}

Eigen::MatrixXd apply_params(const Eigen::MatrixXd& inputs, const TaeParams& params) {
  Eigen::MatrixXd out = inputs * params.weight.transpose();
  out.rowwise() += params.bias.transpose();
  return out;
}

namespace {

// Loss of the batch under e = W z + b, computed from input differences (the
// bias cancels), and optionally its gradient.
double batch_objective(const Eigen::MatrixXd& source_inputs, const Eigen::MatrixXd& target_inputs,
                       const PairBatch& batch, const TaeParams& params, double margin, Gradients* grads) {
  const Eigen::Index d = static_cast<Eigen::Index>(params.dim());
  if (source_inputs.cols() != 2 * d || target_inputs.cols() != 2 * d) {
    throw std::invalid_argument("inputs must have 2d columns");
  }
  const std::size_t total = batch.positives.size() + batch.negatives.size();
  // Column p of directions holds +/- the unit difference of pair p's
  // embeddings, column p of deltas the matching input difference; the weight
  // gradient is their product.
  Eigen::MatrixXd directions;
  Eigen::MatrixXd deltas;
  if (grads) {
    directions = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(total));
    deltas = Eigen::MatrixXd::Zero(2 * d, static_cast<Eigen::Index>(total));
  }
  double loss = 0.0;
  Eigen::Index col = 0;
  auto add = [&](const EntityPair& pair, bool positive) {
    const Eigen::VectorXd dz = (source_inputs.row(static_cast<Eigen::Index>(pair.source)) -
                                target_inputs.row(static_cast<Eigen::Index>(pair.target)))
                                   .transpose();
    const Eigen::VectorXd diff = params.weight * dz;
    const double dist = diff.norm();
    if (!std::isfinite(dist)) throw DivergenceError("non-finite embedding distance");
    loss += positive ? dist : std::max(0.0, margin - dist);
    if (grads && dist > 0.0 && (positive || dist < margin)) {
      directions.col(col) = (positive ? 1.0 : -1.0) * diff / dist;
      deltas.col(col) = dz;
    }
    ++col;
  };
  for (const auto& p : batch.positives) add(p, true);
  for (const auto& n : batch.negatives) add(n, false);
  if (grads) {
    grads->weight = directions * deltas.transpose();
    grads->bias = Vector::Zero(d);
    if (!grads->weight.allFinite()) throw DivergenceError("non-finite gradient");
  }
  return loss;
}

}  // namespace

Gradients loss_gradients(const Eigen::MatrixXd& source_inputs, const Eigen::MatrixXd& target_inputs,
                         const PairBatch& batch, const TaeParams& params, double margin) {
  Gradients g;
  batch_objective(source_inputs, target_inputs, batch, params, margin, &g);
  return g;
}

// ---- Adam ----

AdamOptimizer::AdamOptimizer(std::size_t dim, double learning_rate)
    : lr_(learning_rate),
      m_w_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(2 * dim))),
      v_w_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(2 * dim))),
      m_b_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      v_b_(Vector::Zero(static_cast<Eigen::Index>(dim))) {}

void AdamOptimizer::step(TaeParams& params, const Gradients& grads) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  m_w_ = kBeta1 * m_w_ + (1.0 - kBeta1) * grads.weight;
  v_w_ = kBeta2 * v_w_ + (1.0 - kBeta2) * grads.weight.cwiseProduct(grads.weight);
  m_b_ = kBeta1 * m_b_ + (1.0 - kBeta1) * grads.bias;
  v_b_ = kBeta2 * v_b_ + (1.0 - kBeta2) * grads.bias.cwiseProduct(grads.bias);
  params.weight.array() -= lr_ * (m_w_.array() / c1) / ((v_w_.array() / c2).sqrt() + kEps);
  params.bias.array() -= lr_ * (m_b_.array() / c1) / ((v_b_.array() / c2).sqrt() + kEps);
}

// ---- training loop ----

EncodedSide encode_inputs(const KnowledgeGraph& graph, const std::vector<std::string>& ids,
                          const std::map<std::string, std::string, std::less<>>& names,
                          const ProviderChain& provider, double beta, const EncoderOptions& options) {
  EncodedSide side;
  side.ids = ids;
  const auto d = static_cast<Eigen::Index>(provider.dim());
  side.inputs.resize(static_cast<Eigen::Index>(ids.size()), 2 * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = names.find(ids[i]);
    if (it == names.end()) throw DataError("no display name for entity " + ids[i]);
    side.inputs.row(static_cast<Eigen::Index>(i)) =
        encoder_inputs(graph, ids[i], it->second, provider, beta, options).stacked().transpose();
  }
  return side;
}

namespace {

double validation_hits1(const EncodedSide& sources, const EncodedSide& targets, const TaeParams& params) {
  std::vector<std::size_t> gold(sources.ids.size());
  std::iota(gold.begin(), gold.end(), std::size_t{0});
  const RankingResult ranking =
      retrieve(apply_params(sources.inputs, params), apply_params(targets.inputs, params), targets.ids, gold, 1);
  const auto ranks = ranking.ranks();
  return hits_at(ranks, 1);
}

}  // namespace

TrainResult train(const Dataset& dataset, const ProviderChain& provider, const TrainConfig& config,
                  const NamePolicy& name_policy) {
  config.validate();
  if (provider.dim() != config.dim) {
    throw std::invalid_argument("provider dimension " + std::to_string(provider.dim()) +
                                " differs from config dim " + std::to_string(config.dim));
  }
  const auto train_links = dataset.alignment.select(dataset.alignment.train);
  const auto valid_links = dataset.alignment.select(dataset.alignment.valid);
  if (train_links.empty()) throw DataError("training requires a non-empty train split");
  if (valid_links.empty()) throw DataError("training requires a non-empty valid split");

  const auto source_names = entity_names(dataset.source, name_policy);
  const auto target_names = entity_names(dataset.target, name_policy);
  EncoderOptions options;
  options.time_attention = config.time_attention;
  options.other_attributes = config.other_attributes;
  options.name_policy = name_policy;

  auto side = [&](const std::vector<EntityLink>& links, bool source) {
    std::vector<std::string> ids;
    ids.reserve(links.size());
    for (const auto& l : links) ids.push_back(source ? l.source : l.target);
    return encode_inputs(source ? dataset.source : dataset.target, ids, source ? source_names : target_names,
                         provider, config.beta, options);
  };
  const EncodedSide train_src = side(train_links, true);
  const EncodedSide train_tgt = side(train_links, false);
  const EncodedSide valid_src = side(valid_links, true);
  const EncodedSide valid_tgt = side(valid_links, false);

  const std::size_t n = train_links.size();
  std::vector<EntityPair> positives;
  std::set<EntityPair> gold;
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) {
    positives.push_back({i, i});
    gold.insert({i, i});
    pool[i] = i;
  }
  Rng rng(config.seed);
  const PairBatch all = sample_negatives(positives, pool, pool, gold, config.negatives_per_positive, rng);
  const std::size_t per = config.negatives_per_positive;

  TrainResult result;
  TaeParams params = TaeParams::initial(config.dim, config.beta);
  AdamOptimizer optimizer(config.dim, config.learning_rate);
  result.params = params;
  double best = -1.0;
  std::size_t stale = 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      PairBatch batch;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t p = order[k];
        batch.positives.push_back(all.positives[p]);
        for (std::size_t q = 0; q < per; ++q) batch.negatives.push_back(all.negatives[p * per + q]);
      }
      Gradients grads;
      const double loss = batch_objective(train_src.inputs, train_tgt.inputs, batch, params, config.margin, &grads);
      if (!std::isfinite(loss)) throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += loss;
      optimizer.step(params, grads);
    }
    if (!params.weight.allFinite() || !params.bias.allFinite()) {
      throw DivergenceError("non-finite parameters at epoch " + std::to_string(epoch));
    }
    const double hits1 = validation_hits1(valid_src, valid_tgt, params);
    result.log.push_back({epoch, epoch_loss, hits1});
    if (hits1 > best) {
      best = hits1;
      result.params = params;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  result.best_valid_hits1 = best;
  return result;
}

}  // namespace eventea
