#include "eventea/tae.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "eventea/time_split.hpp"

namespace eventea {

double cosine(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

AttentionResult time_attention(const TokenSequence& time_seq, const TokenSequence& name_seq) {
  if (name_seq.empty()) throw std::invalid_argument("time_attention: empty name sequence");
  if (time_seq.dim != name_seq.dim) throw std::invalid_argument("time_attention: dimension mismatch");
  const auto k = static_cast<Eigen::Index>(time_seq.size());
  const auto m = static_cast<Eigen::Index>(name_seq.size());
  AttentionResult result;
  result.weights.resize(k, m);
  result.attended.reserve(time_seq.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    const Vector& t = time_seq.vectors[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(t.size()) != time_seq.dim) {
      throw std::invalid_argument("time_attention: dimension mismatch");
    }
    Eigen::VectorXd scores(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const Vector& n = name_seq.vectors[static_cast<std::size_t>(j)];
      if (n.size() != t.size()) throw std::invalid_argument("time_attention: dimension mismatch");
      scores[j] = cosine(n, t);
    }
    const double top = scores.maxCoeff();
    Eigen::VectorXd e = (scores.array() - top).exp();
    e /= e.sum();
    result.weights.row(i) = e.transpose();
    Vector a = Vector::Zero(t.size());
    for (Eigen::Index j = 0; j < m; ++j) a += e[j] * name_seq.vectors[static_cast<std::size_t>(j)];
    result.attended.push_back(std::move(a));
  }
  return result;
}

Vector time_embedding(const std::vector<Vector>& attended, std::size_t dim) {
  Vector h = Vector::Zero(static_cast<Eigen::Index>(dim));
  if (attended.empty()) return h;
  for (const auto& a : attended) h += a;
  return h / static_cast<double>(attended.size());
}

Vector fuse(const Vector& r, const Vector& g, double beta) {
  if (r.size() != g.size()) throw std::invalid_argument("fuse: dimension mismatch");
  return r + beta * g;
}

TaeParams TaeParams::initial(std::size_t dim, double beta) {
  const auto d = static_cast<Eigen::Index>(dim);
  TaeParams p;
  p.weight.resize(d, 2 * d);
  p.weight << Eigen::MatrixXd::Identity(d, d) * 0.5, Eigen::MatrixXd::Identity(d, d) * 0.5;
  p.bias = Vector::Zero(d);
  p.beta = beta;
  return p;
}

void TaeParams::validate() const {
  const Eigen::Index d = bias.size();
  if (d == 0) throw std::invalid_argument("TaeParams: zero dimension");
  if (weight.rows() != d || weight.cols() != 2 * d) {
    throw std::invalid_argument("TaeParams: weight must be d x 2d");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("TaeParams: beta must be finite and >= 0");
  if (!weight.allFinite() || !bias.allFinite()) throw std::invalid_argument("TaeParams: non-finite entries");
}

void TaeParams::write(std::ostream& out) const {
  validate();
  const std::size_t d = dim();
  std::vector<StoreRecord> records;
  records.reserve(d + 2);
  for (std::size_t i = 0; i < d; ++i) {
    StoreRecord rec{"W#" + std::to_string(i), std::vector<double>(2 * d)};
    for (std::size_t j = 0; j < 2 * d; ++j) {
      rec.values[j] = weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    records.push_back(std::move(rec));
  }
  StoreRecord b{"b", std::vector<double>(2 * d, 0.0)};
  for (std::size_t i = 0; i < d; ++i) b.values[i] = bias[static_cast<Eigen::Index>(i)];
  records.push_back(std::move(b));
  StoreRecord beta_rec{"beta", std::vector<double>(2 * d, 0.0)};
  beta_rec.values[0] = beta;
  records.push_back(std::move(beta_rec));
  write_store_records(out, 2 * d, records);
}

void TaeParams::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write(out);
}

TaeParams TaeParams::read(std::istream& in, std::string_view source) {
  std::size_t width = 0;
  auto records = read_store_records(in, &width, source);
  const std::string where(source);
  if (width % 2 != 0) throw DataError(where + ": params dimension must be even");
  const std::size_t d = width / 2;
  if (records.size() != d + 2) throw DataError(where + ": expected " + std::to_string(d + 2) + " records");
  TaeParams p;
  p.weight.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(2 * d));
  p.bias.resize(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    if (records[i].key != "W#" + std::to_string(i)) throw DataError(where + ": expected record W#" + std::to_string(i));
    for (std::size_t j = 0; j < 2 * d; ++j) {
      p.weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = records[i].values[j];
    }
  }
  const auto& b = records[d];
  const auto& beta = records[d + 1];
  if (b.key != "b" || beta.key != "beta") throw DataError(where + ": expected records 'b' and 'beta'");
  for (std::size_t i = 0; i < d; ++i) p.bias[static_cast<Eigen::Index>(i)] = b.values[i];
  for (std::size_t i = d; i < 2 * d; ++i) {
    if (b.values[i] != 0.0) throw DataError(where + ": non-zero padding in record 'b'");
  }
  p.beta = beta.values[0];
  for (std::size_t i = 1; i < 2 * d; ++i) {
    if (beta.values[i] != 0.0) throw DataError(where + ": non-zero padding in record 'beta'");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  return p;
}

TaeParams TaeParams::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read(in, path.string());
}

Vector combine(const Vector& h, const Vector& f, const TaeParams& params) {
  const auto d = static_cast<Eigen::Index>(params.dim());
  if (h.size() != d || f.size() != d || params.weight.rows() != d || params.weight.cols() != 2 * d) {
    throw std::invalid_argument("combine: shape mismatch");
  }
  return params.weight.leftCols(d) * h + params.weight.rightCols(d) * f + params.bias;
}

Vector EncoderInputs::stacked() const {
  Vector z(h.size() + f.size());
  z << h, f;
  return z;
}

EncoderInputs encoder_inputs(const KnowledgeGraph& graph, std::string_view entity,
                             std::string_view name, const ProviderChain& provider, double beta,
                             const EncoderOptions& options) {
  const std::size_t d = provider.dim();
  EncoderInputs in;
  Vector r;
  if (options.time_attention) {
    const TimeSplit split = split_time(name);
    const TokenSequence name_seq = provider.encode_sequence(name);
    const TokenSequence time_seq = provider.encode_sequence(split.time);
    if (time_seq.empty() || name_seq.empty()) {
      in.h = Vector::Zero(static_cast<Eigen::Index>(d));
    } else {
      in.h = time_embedding(time_attention(time_seq, name_seq).attended, d);
    }
    r = mean_pool(provider.encode_sequence(split.remainder));
  } else {
    in.h = Vector::Zero(static_cast<Eigen::Index>(d));
    r = mean_pool(provider.encode_sequence(name));
  }
  Vector g = Vector::Zero(static_cast<Eigen::Index>(d));
  if (options.other_attributes) {
    g = mean_pool(provider.encode_sequence(concat_attribute_values(graph, entity, options.name_policy)));
  }
  in.f = fuse(r, g, beta);
  return in;
}

Vector encode_entity(const KnowledgeGraph& graph, std::string_view entity, std::string_view name,
                     const ProviderChain& provider, const TaeParams& params,
                     const EncoderOptions& options) {
  const EncoderInputs in = encoder_inputs(graph, entity, name, provider, params.beta, options);
  return combine(in.h, in.f, params);
}

EmbeddingTable encode_graph(const KnowledgeGraph& graph,
                            const std::map<std::string, std::string, std::less<>>& names,
                            const ProviderChain& provider, const TaeParams& params,
                            const EncoderOptions& options, const std::vector<std::string>& entities) {
  std::vector<std::string> ids = entities;
  if (ids.empty()) ids.assign(graph.entities().begin(), graph.entities().end());
  EmbeddingTable table;
  table.vectors.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(params.dim()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = names.find(ids[i]);
    if (it == names.end()) throw DataError("no display name for entity " + ids[i]);
    table.vectors.row(static_cast<Eigen::Index>(i)) =
        encode_entity(graph, ids[i], it->second, provider, params, options).transpose();
  }
  table.ids = std::move(ids);
  return table;
}

}  // namespace eventea
