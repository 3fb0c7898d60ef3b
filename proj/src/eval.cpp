#include "eventea/eval.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "eventea/string_sim.hpp"
#include "eventea/unicode.hpp"

namespace eventea {

namespace {

Eigen::MatrixXd normalized_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) {
      out.row(i) /= n;
    } else {
      out.row(i).setZero();
    }
  }
  return out;
}

}  // namespace

RankingResult retrieve(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& targets,
                       std::span<const std::string> target_ids, const std::vector<std::size_t>& gold,
                       std::size_t k) {
  if (targets.rows() == 0) throw std::invalid_argument("retrieve: empty candidate pool");
  if (k == 0) throw std::invalid_argument("retrieve: k must be >= 1");
  if (sources.rows() > 0 && sources.cols() != targets.cols()) {
    throw std::invalid_argument("retrieve: dimension mismatch");
  }
  if (target_ids.size() != static_cast<std::size_t>(targets.rows())) {
    throw std::invalid_argument("retrieve: target id count differs from target rows");
  }
  if (!gold.empty() && gold.size() != static_cast<std::size_t>(sources.rows())) {
    throw std::invalid_argument("retrieve: gold size differs from source rows");
  }
  const Eigen::MatrixXd src = normalized_rows(sources);
  const Eigen::MatrixXd tgt = normalized_rows(targets);
  RankingResult result;
  result.rows.reserve(static_cast<std::size_t>(src.rows()));
  Eigen::VectorXd scores(tgt.rows());
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    scores.noalias() = tgt * src.row(i).transpose();
    const std::size_t g = gold.empty() ? kNoGold : gold[static_cast<std::size_t>(i)];
    result.rows.push_back(
        rank_scores(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                    target_ids, g, k));
  }
  return result;
}

double hits_at(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw std::invalid_argument("hits_at: no ranks");
  std::size_t hits = 0;
  for (std::size_t r : ranks) {
    if (r <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw std::invalid_argument("mrr: no ranks");
  double sum = 0.0;
  for (std::size_t r : ranks) {
    if (r == 0) throw std::invalid_argument("mrr: ranks are 1-based");
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

TypedRecall recall_by_type(std::span<const std::size_t> ranks, std::span<const std::string> sources,
                           const EntityTypeMap& types, std::size_t k) {
  if (ranks.size() != sources.size()) throw std::invalid_argument("recall_by_type: size mismatch");
  std::vector<std::size_t> events;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    (types.category(sources[i]) == EntityCategory::Event ? events : others).push_back(ranks[i]);
  }
  TypedRecall out;
  if (!events.empty()) out.event = hits_at(events, k);
  if (!others.empty()) out.other = hits_at(others, k);
  out.all = hits_at(ranks, k);
  return out;
}

std::vector<CaseRow> case_report(const std::vector<std::string>& requested, const CasePool& sources,
                                 const CasePool& targets, const std::vector<std::size_t>& gold,
                                 const CaseScorers& scorers) {
  std::unordered_map<std::string_view, std::size_t> source_index;
  for (std::size_t i = 0; i < sources.ids.size(); ++i) source_index.emplace(sources.ids[i], i);

  std::vector<std::size_t> rows;
  std::vector<std::size_t> row_gold;
  for (const auto& id : requested) {
    auto it = source_index.find(id);
    if (it == source_index.end()) throw DataError("unknown source entity: " + id);
    rows.push_back(it->second);
    row_gold.push_back(gold.empty() ? kNoGold : gold[it->second]);
  }
  Eigen::MatrixXd selected(static_cast<Eigen::Index>(rows.size()), sources.embeddings.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    selected.row(static_cast<Eigen::Index>(r)) = sources.embeddings.row(static_cast<Eigen::Index>(rows[r]));
  }
  const RankingResult ranking = retrieve(selected, targets.embeddings, targets.ids, row_gold, 3);

  auto make_row = [&](std::size_t s, std::size_t t, std::size_t rank, double tae) {
    CaseRow row;
    row.source = sources.ids[s];
    row.source_name = sources.names[s];
    row.rank = rank;
    row.target = targets.ids[t];
    row.target_name = targets.names[t];
    row.tae = tae;
    if (scorers.levenshtein) {
      row.levenshtein = levenshtein_ratio(unicode::prepare(row.source_name), unicode::prepare(row.target_name));
    }
    if (scorers.source_name_vectors && scorers.target_name_vectors) {
      const Eigen::VectorXd a = scorers.source_name_vectors->row(static_cast<Eigen::Index>(s)).transpose();
      const Eigen::VectorXd b = scorers.target_name_vectors->row(static_cast<Eigen::Index>(t)).transpose();
      const double na = a.norm();
      const double nb = b.norm();
      row.name_cosine = (na == 0.0 || nb == 0.0) ? 0.0 : a.dot(b) / (na * nb);
    }
    return row;
  };

  std::vector<CaseRow> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& ranked = ranking.rows[r];
    for (std::size_t c = 0; c < ranked.top.size(); ++c) {
      CaseRow row = make_row(rows[r], ranked.top[c].target, c + 1, ranked.top[c].score);
      row.is_gold = ranked.top[c].target == row_gold[r];
      out.push_back(std::move(row));
    }
    const std::size_t g = row_gold[r];
    if (g != kNoGold && (ranked.top.empty() || ranked.top.front().target != g)) {
      const Eigen::VectorXd a = sources.embeddings.row(static_cast<Eigen::Index>(rows[r])).transpose();
      const Eigen::VectorXd b = targets.embeddings.row(static_cast<Eigen::Index>(g)).transpose();
      const double na = a.norm();
      const double nb = b.norm();
      CaseRow row = make_row(rows[r], g, 0, (na == 0.0 || nb == 0.0) ? 0.0 : a.dot(b) / (na * nb));
      row.is_gold = true;
      out.push_back(std::move(row));
    }
  }
  return out;
}

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      const char n = s[++i];
      out += n == 't' ? '\t' : n == 'n' ? '\n' : n;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string format_score(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_score(*v) : "n/a"; }

constexpr std::string_view kCaseHeader =
    "source\tsource_name\trank\ttarget\ttarget_name\tis_gold\ttae\tlevenshtein\tname_cosine";

double parse_score(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("case report line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_case_rows(std::ostream& out, const std::vector<CaseRow>& rows) {
  out << kCaseHeader << '\n';
  for (const auto& r : rows) {
    out << escape(r.source) << '\t' << escape(r.source_name) << '\t'
        << (r.rank == 0 ? std::string("gold") : std::to_string(r.rank)) << '\t' << escape(r.target) << '\t'
        << escape(r.target_name) << '\t' << (r.is_gold ? "yes" : "no") << '\t' << format_score(r.tae) << '\t'
        << format_optional(r.levenshtein) << '\t' << format_optional(r.name_cosine) << '\n';
  }
}

std::vector<CaseRow> read_case_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCaseHeader) throw DataError("case report: missing header");
  std::vector<CaseRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.emplace_back(std::string_view(line).substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 9) {
      throw DataError("case report line " + std::to_string(line_no) + ": expected 9 fields");
    }
    CaseRow r;
    r.source = unescape(fields[0]);
    r.source_name = unescape(fields[1]);
    if (fields[2] == "gold") {
      r.rank = 0;
    } else {
      r.rank = static_cast<std::size_t>(parse_score(fields[2], line_no));
    }
    r.target = unescape(fields[3]);
    r.target_name = unescape(fields[4]);
    if (fields[5] != "yes" && fields[5] != "no") {
      throw DataError("case report line " + std::to_string(line_no) + ": is_gold must be yes/no");
    }
    r.is_gold = fields[5] == "yes";
    r.tae = parse_score(fields[6], line_no);
    if (fields[7] != "n/a") r.levenshtein = parse_score(fields[7], line_no);
    if (fields[8] != "n/a") r.name_cosine = parse_score(fields[8], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace eventea
