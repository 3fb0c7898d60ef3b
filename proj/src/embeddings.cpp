#include "eventea/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "eventea/random.hpp"
#include "eventea/unicode.hpp"

namespace eventea {

namespace {

[[noreturn]] void store_error(std::string_view source, std::size_t line, const std::string& what) {
  throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

std::size_t parse_size(std::string_view s, std::string_view source, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    store_error(source, line, "expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  out.append(buf, ptr);
}

void check_key(std::string_view key) {
  if (key.find_first_of("\t\n\r") != std::string_view::npos) {
    throw std::invalid_argument("store key contains a tab or newline: " + std::string(key));
  }
}

}  // namespace

std::vector<StoreRecord> read_store_records(std::istream& in, std::size_t* dim_out,
                                            std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) store_error(source, 1, "missing header line");
  strip_cr(line);
  auto space = line.find(' ');
  if (space == std::string::npos) store_error(source, 1, "header must be '<count> <dim>'");
  const std::size_t count = parse_size(std::string_view(line).substr(0, space), source, 1);
  const std::size_t dim = parse_size(std::string_view(line).substr(space + 1), source, 1);
  if (dim == 0) store_error(source, 1, "dimension must be positive");
  if (dim_out) *dim_out = dim;

  std::vector<StoreRecord> records;
  records.reserve(count);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) store_error(source, line_no, "missing tab after key");
    StoreRecord rec;
    rec.key = line.substr(0, tab);
    rec.values.reserve(dim);
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next != end && *next != ' ')) {
        store_error(source, line_no, "malformed number");
      }
      rec.values.push_back(v);
      p = next;
    }
    if (rec.values.size() != dim) {
      store_error(source, line_no,
                  "expected " + std::to_string(dim) + " values, got " + std::to_string(rec.values.size()));
    }
    records.push_back(std::move(rec));
  }
  if (records.size() != count) {
    store_error(source, line_no,
                "header declares " + std::to_string(count) + " records, found " +
                    std::to_string(records.size()));
  }
  return records;
}

void write_store_records(std::ostream& out, std::size_t dim, const std::vector<StoreRecord>& records) {
  out << records.size() << ' ' << dim << '\n';
  std::string line;
  for (const auto& rec : records) {
    check_key(rec.key);
    if (rec.values.size() != dim) throw std::invalid_argument("record dimension mismatch: " + rec.key);
    line.clear();
    line += rec.key;
    line += '\t';
    for (std::size_t i = 0; i < rec.values.size(); ++i) {
      if (i) line += ' ';
      append_number(line, rec.values[i]);
    }
    line += '\n';
    out << line;
  }
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

// ---- StaticStore ----

StaticStore StaticStore::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read(in, path.string());
}

StaticStore StaticStore::read(std::istream& in, std::string_view source) {
  std::size_t dim = 0;
  auto records = read_store_records(in, &dim, source);
  StaticStore store(dim);
  for (auto& rec : records) {
    Eigen::VectorXf v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = static_cast<float>(rec.values[i]);
    store.vectors_.insert_or_assign(std::move(rec.key), std::move(v));
  }
  return store;
}

void StaticStore::write(std::ostream& out) const {
  out << vectors_.size() << ' ' << dim_ << '\n';
  std::string line;
  for (const auto& [key, v] : vectors_) {
    line.clear();
    line += key;
    line += '\t';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) line += ' ';
      append_number(line, v[i]);
    }
    line += '\n';
    out << line;
  }
}

void StaticStore::insert(std::string token, const Vector& v) {
  check_key(token);
  if (static_cast<std::size_t>(v.size()) != dim_) throw std::invalid_argument("static store dimension mismatch");
  vectors_.insert_or_assign(std::move(token), v.cast<float>());
}

const Eigen::VectorXf* StaticStore::find(std::string_view token) const {
  auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

// ---- ContextualStore ----

ContextualStore ContextualStore::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read(in, path.string());
}

ContextualStore ContextualStore::read(std::istream& in, std::string_view source) {
  std::size_t dim = 0;
  auto records = read_store_records(in, &dim, source);
  ContextualStore store(dim);
  std::size_t record_no = 0;
  for (auto& rec : records) {
    ++record_no;
    auto hash = rec.key.rfind('#');
    if (hash == std::string::npos || hash + 1 == rec.key.size()) {
      throw DataError(std::string(source) + ": record " + std::to_string(record_no) +
                      ": contextual key lacks '#<position>' suffix: " + rec.key);
    }
    std::size_t pos = 0;
    std::string_view digits = std::string_view(rec.key).substr(hash + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), pos);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw DataError(std::string(source) + ": record " + std::to_string(record_no) +
                      ": bad position suffix in key: " + rec.key);
    }
    auto& seq = store.sequences_[rec.key.substr(0, hash)];
    if (pos != seq.size()) {
      throw DataError(std::string(source) + ": record " + std::to_string(record_no) +
                      ": positions out of order for key: " + rec.key);
    }
    Eigen::VectorXf v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = static_cast<float>(rec.values[i]);
    seq.push_back(std::move(v));
  }
  return store;
}

void ContextualStore::write(std::ostream& out) const {
  std::size_t count = 0;
  for (const auto& [key, seq] : sequences_) count += seq.size();
  out << count << ' ' << dim_ << '\n';
  std::string line;
  for (const auto& [key, seq] : sequences_) {
    for (std::size_t p = 0; p < seq.size(); ++p) {
      line.clear();
      line += key;
      line += '#';
      append_number(line, p);
      line += '\t';
      for (Eigen::Index i = 0; i < seq[p].size(); ++i) {
        if (i) line += ' ';
        append_number(line, seq[p][i]);
      }
      line += '\n';
      out << line;
    }
  }
}

void ContextualStore::insert(std::string key, std::vector<Vector> vectors) {
  check_key(key);
  if (vectors.empty()) throw std::invalid_argument("contextual store entries need at least one vector");
  std::vector<Eigen::VectorXf> seq;
  seq.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (static_cast<std::size_t>(v.size()) != dim_) {
      throw std::invalid_argument("contextual store dimension mismatch");
    }
    seq.push_back(v.cast<float>());
  }
  sequences_.insert_or_assign(std::move(key), std::move(seq));
}

const std::vector<Eigen::VectorXf>* ContextualStore::find(std::string_view key) const {
  auto it = sequences_.find(key);
  return it == sequences_.end() ? nullptr : &it->second;
}

// ---- tokenizer and fallback ----

namespace {

bool is_joining_dash(char32_t c) { return c == U'-' || c == U'‐' || c == U'–'; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  const std::u32string s = unicode::to_u32(unicode::lowercase(unicode::nfc(text)));
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(unicode::to_utf8(current));
    current.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char32_t c = s[i];
    if (unicode::is_alnum(c)) {
      current.push_back(c);
      continue;
    }
    // Dashes inside a word ("u-23", "1948–49") and slashes between digits
    // ("1990/91") keep the surrounding characters in one token.
    const bool has_next = i + 1 < s.size();
    if (!current.empty() && has_next) {
      const char32_t prev = current.back();
      const char32_t next = s[i + 1];
      if (is_joining_dash(c) && unicode::is_alnum(next)) {
        current.push_back(c);
        continue;
      }
      if (c == U'/' && unicode::is_digit(prev) && unicode::is_digit(next)) {
        current.push_back(c);
        continue;
      }
    }
    flush();
  }
  flush();
  return tokens;
}

Vector hash_vector(std::string_view token, std::size_t dim, std::uint64_t seed) {
  Rng rng(stable_hash(token) ^ seed);
  Vector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = standard_normal(rng);
  const double norm = v.norm();
  if (norm > 0.0) {
    v /= norm;
  } else {
    v.setZero();
    v[0] = 1.0;
  }
  return v;
}

ProviderChain::ProviderChain(std::size_t dim, std::uint64_t fallback_seed,
                             std::shared_ptr<const ContextualStore> contextual,
                             std::shared_ptr<const StaticStore> static_store)
    : dim_(dim), seed_(fallback_seed), contextual_(std::move(contextual)), static_(std::move(static_store)) {
  if (dim_ == 0) throw std::invalid_argument("provider dimension must be positive");
  if (contextual_ && contextual_->dim() != dim_) {
    throw std::invalid_argument("contextual store dimension " + std::to_string(contextual_->dim()) +
                                " differs from provider dimension " + std::to_string(dim_));
  }
  if (static_ && static_->dim() != dim_) {
    throw std::invalid_argument("static store dimension " + std::to_string(static_->dim()) +
                                " differs from provider dimension " + std::to_string(dim_));
  }
}

TokenSequence ProviderChain::encode_sequence(std::string_view text) const {
  TokenSequence seq;
  seq.dim = dim_;
  if (text.empty()) return seq;
  if (contextual_) {
    if (const auto* stored = contextual_->find(text)) {
      for (std::size_t p = 0; p < stored->size(); ++p) {
        seq.tokens.push_back(std::string(text) + "#" + std::to_string(p));
        seq.vectors.push_back((*stored)[p].cast<double>());
      }
      return seq;
    }
  }
  seq.tokens = tokenize(text);
  seq.vectors.reserve(seq.tokens.size());
  for (const auto& token : seq.tokens) {
    const Eigen::VectorXf* found = static_ ? static_->find(token) : nullptr;
    seq.vectors.push_back(found ? Vector(found->cast<double>()) : hash_vector(token, dim_, seed_));
  }
  return seq;
}

Vector mean_pool(const TokenSequence& seq) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(seq.dim));
  if (seq.vectors.empty()) return sum;
  for (const auto& v : seq.vectors) sum += v;
  return sum / static_cast<double>(seq.vectors.size());
}

// ---- EmbeddingTable ----

std::optional<std::size_t> EmbeddingTable::find(std::string_view id) const {
  if (index_.size() != ids.size()) {
    index_.clear();
    for (std::size_t i = 0; i < ids.size(); ++i) index_.emplace(ids[i], i);
  }
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read(in, path.string());
}

EmbeddingTable EmbeddingTable::read(std::istream& in, std::string_view source) {
  std::size_t dim = 0;
  auto records = read_store_records(in, &dim, source);
  EmbeddingTable table;
  table.vectors.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < records.size(); ++r) {
    table.ids.push_back(std::move(records[r].key));
    for (std::size_t i = 0; i < dim; ++i) {
      table.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = records[r].values[i];
    }
  }
  std::set<std::string_view> seen;
  for (const auto& id : table.ids) {
    if (!seen.insert(id).second) throw DataError(std::string(source) + ": duplicate key " + id);
  }
  return table;
}

void EmbeddingTable::write(std::ostream& out) const {
  std::vector<StoreRecord> records;
  records.reserve(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    StoreRecord rec{ids[r], {}};
    rec.values.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      rec.values[i] = vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
    }
    records.push_back(std::move(rec));
  }
  write_store_records(out, dim(), records);
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write(out);
}

EmbeddingTable name_vector_baseline(const ProviderChain& provider,
                                    const std::map<std::string, std::string, std::less<>>& names) {
  EmbeddingTable table;
  table.vectors.resize(static_cast<Eigen::Index>(names.size()), static_cast<Eigen::Index>(provider.dim()));
  Eigen::Index r = 0;
  for (const auto& [id, name] : names) {
    table.ids.push_back(id);
    table.vectors.row(r++) = mean_pool(provider.encode_sequence(name)).transpose();
  }
  return table;
}

std::string concat_attribute_values(const KnowledgeGraph& graph, std::string_view entity,
                                    const NamePolicy& exclude) {
  std::vector<std::pair<std::string_view, std::string_view>> items;
  for (const auto* t : graph.attributes_of(entity)) {
    if (exclude.matches(t->attribute)) continue;
    items.emplace_back(t->attribute, t->value);
  }
  std::sort(items.begin(), items.end());
  std::string out;
  for (const auto& [attr, value] : items) {
    if (value.empty()) continue;
    if (!out.empty()) out += ' ';
    out += value;
  }
  return out;
}

}  // namespace eventea
