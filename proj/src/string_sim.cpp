#include "eventea/string_sim.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "eventea/unicode.hpp"

namespace eventea {

SimilarityKind parse_similarity_kind(std::string_view name) {
  if (name == "lev-ratio") return SimilarityKind::LevenshteinRatio;
  if (name == "jaro") return SimilarityKind::Jaro;
  if (name == "jaro-winkler") return SimilarityKind::JaroWinkler;
  if (name == "seq") return SimilarityKind::SequenceRatio;
  throw std::invalid_argument("unknown similarity kind: " + std::string(name));
}

std::string_view to_string(SimilarityKind kind) {
  switch (kind) {
    case SimilarityKind::LevenshteinRatio: return "lev-ratio";
    case SimilarityKind::Jaro: return "jaro";
    case SimilarityKind::JaroWinkler: return "jaro-winkler";
    case SimilarityKind::SequenceRatio: return "seq";
  }
  return "";
}

namespace {

std::size_t weighted_edit_distance(std::u32string_view a, std::u32string_view b,
                                   std::size_t substitution_cost) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : substitution_cost);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b) {
  return weighted_edit_distance(a, b, 1);
}

std::size_t indel_substitution2_distance(std::u32string_view a, std::u32string_view b) {
  return weighted_edit_distance(a, b, 2);
}

double levenshtein_ratio(std::u32string_view a, std::u32string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  const std::size_t d = indel_substitution2_distance(a, b);
  return static_cast<double>(total - d) / static_cast<double>(total);
}

double jaro(std::u32string_view a, std::u32string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const std::ptrdiff_t window =
      std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::max(a.size(), b.size()) / 2) - 1);
  std::vector<bool> a_matched(a.size(), false);
  std::vector<bool> b_matched(b.size(), false);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - window));
    const std::size_t hi = std::min(b.size(), i + static_cast<std::size_t>(window) + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!b_matched[j] && a[i] == b[j]) {
        a_matched[i] = b_matched[j] = true;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;
  std::size_t out_of_order = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a_matched[i]) continue;
    while (!b_matched[j]) ++j;
    if (a[i] != b[j]) ++out_of_order;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(out_of_order) / 2.0;
  return (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;
}

double jaro_winkler(std::u32string_view a, std::u32string_view b, double prefix_scale) {
  if (!(prefix_scale >= 0.0 && prefix_scale <= 0.25)) {
    throw std::invalid_argument("jaro_winkler prefix_scale must lie in [0, 0.25]");
  }
  const double j = jaro(a, b);
  std::size_t prefix = 0;
  const std::size_t limit = std::min<std::size_t>({4, a.size(), b.size()});
  while (prefix < limit && a[prefix] == b[prefix]) ++prefix;
  return j + static_cast<double>(prefix) * prefix_scale * (1.0 - j);
}

namespace {

struct Block {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t size = 0;
};

// Longest common substring of a[alo,ahi) and b[blo,bhi). Among equally long
// blocks the one starting earliest in a wins, then earliest in b.
Block longest_match(std::u32string_view a, std::size_t alo, std::size_t ahi,
                    std::u32string_view b, std::size_t blo, std::size_t bhi,
                    std::vector<std::size_t>& prev, std::vector<std::size_t>& cur) {
  Block best{alo, blo, 0};
  std::fill(prev.begin() + static_cast<std::ptrdiff_t>(blo),
            prev.begin() + static_cast<std::ptrdiff_t>(bhi) + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    cur[blo] = 0;
    for (std::size_t j = blo; j < bhi; ++j) {
      if (a[i] == b[j]) {
        const std::size_t k = prev[j] + 1;
        cur[j + 1] = k;
        if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
      } else {
        cur[j + 1] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

std::size_t matching_block_total(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::size_t total = 0;
  struct Range {
    std::size_t alo, ahi, blo, bhi;
  };
  std::vector<Range> stack{{0, a.size(), 0, b.size()}};
  while (!stack.empty()) {
    Range r = stack.back();
    stack.pop_back();
    if (r.alo >= r.ahi || r.blo >= r.bhi) continue;
    Block m = longest_match(a, r.alo, r.ahi, b, r.blo, r.bhi, prev, cur);
    if (m.size == 0) continue;
    total += m.size;
    stack.push_back({r.alo, m.i, r.blo, m.j});
    stack.push_back({m.i + m.size, r.ahi, m.j + m.size, r.bhi});
  }
  return total;
}

double sequence_ratio(std::u32string_view a, std::u32string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(matching_block_total(a, b)) / static_cast<double>(total);
}

double quick_ratio(std::u32string_view a, std::u32string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  std::unordered_map<char32_t, std::ptrdiff_t> counts;
  for (char32_t c : b) ++counts[c];
  std::size_t common = 0;
  for (char32_t c : a) {
    auto it = counts.find(c);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(total);
}

double similarity(SimilarityKind kind, std::u32string_view a, std::u32string_view b) {
  switch (kind) {
    case SimilarityKind::LevenshteinRatio: return levenshtein_ratio(a, b);
    case SimilarityKind::Jaro: return jaro(a, b);
    case SimilarityKind::JaroWinkler: return jaro_winkler(a, b);
    case SimilarityKind::SequenceRatio: return sequence_ratio(a, b);
  }
  return 0.0;
}

RankingResult name_match_align(const std::vector<NamedEntity>& sources,
                               const std::vector<NamedEntity>& targets,
                               const std::vector<std::size_t>& gold,
                               const NameMatchOptions& options) {
  if (targets.empty()) throw std::invalid_argument("name_match_align: empty target set");
  if (options.k == 0) throw std::invalid_argument("name_match_align: k must be >= 1");
  if (!gold.empty() && gold.size() != sources.size()) {
    throw std::invalid_argument("name_match_align: gold size differs from source count");
  }

  std::vector<std::string> ids;
  std::vector<std::u32string> target_names;
  ids.reserve(targets.size());
  target_names.reserve(targets.size());
  for (const auto& t : targets) {
    ids.push_back(t.id);
    target_names.push_back(unicode::prepare(t.name, options.lowercase));
  }
  // Both ratio measures are bounded by quick_ratio, so targets whose bound is
  // below the gold score and below the current k-th best cannot affect either
  // the gold rank or the top-k list.
  const bool prunable = options.kind == SimilarityKind::LevenshteinRatio ||
                        options.kind == SimilarityKind::SequenceRatio;
  const std::size_t k = std::min(options.k, targets.size());

  RankingResult result;
  result.rows.reserve(sources.size());
  std::vector<double> scores(targets.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const std::u32string name = unicode::prepare(sources[s].name, options.lowercase);
    const std::size_t g = gold.empty() ? kNoGold : gold[s];
    const double gold_score =
        g == kNoGold ? std::numeric_limits<double>::infinity()
                     : similarity(options.kind, name, target_names[g]);
    std::priority_queue<double, std::vector<double>, std::greater<>> best;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (prunable && best.size() == k) {
        const double bound = quick_ratio(name, target_names[t]);
        if (bound < gold_score && bound < best.top()) {
          scores[t] = -std::numeric_limits<double>::infinity();
          continue;
        }
      }
      scores[t] = t == g ? gold_score : similarity(options.kind, name, target_names[t]);
      if (best.size() < k) {
        best.push(scores[t]);
      } else if (scores[t] > best.top()) {
        best.pop();
        best.push(scores[t]);
      }
    }
    result.rows.push_back(rank_scores(scores, ids, g, options.k));
  }
  return result;
}

}  // namespace eventea
