#include "eventea/ranking.hpp"

#include <algorithm>
#include <numeric>

namespace eventea {

std::vector<std::size_t> RankingResult::ranks() const {
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.gold_rank > 0) out.push_back(row.gold_rank);
  }
  return out;
}

SourceRanking rank_scores(std::span<const double> scores, std::span<const std::string> ids,
                          std::size_t gold, std::size_t k) {
  SourceRanking row;
  const std::size_t n = scores.size();
  if (gold != kNoGold) {
    const double g = scores[gold];
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (scores[j] > g || (scores[j] == g && ids[j] < ids[gold])) ++ahead;
    }
    row.gold_rank = ahead + 1;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t top = std::min(k, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t x, std::size_t y) {
                      if (scores[x] != scores[y]) return scores[x] > scores[y];
                      return ids[x] < ids[y];
                    });
  row.top.reserve(top);
  for (std::size_t i = 0; i < top; ++i) row.top.push_back({order[i], scores[order[i]]});
  return row;
}

}  // namespace eventea
