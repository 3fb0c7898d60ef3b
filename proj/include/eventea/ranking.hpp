#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace eventea {

inline constexpr std::size_t kNoGold = std::numeric_limits<std::size_t>::max();

struct Candidate {
  std::size_t target = 0;  // index into the candidate pool
  double score = 0.0;
};

struct SourceRanking {
  std::size_t gold_rank = 0;  // 1-based; 0 when the source has no gold target
  std::vector<Candidate> top;
};

/// Per-source rankings over a candidate pool. Candidates are ordered by
/// descending score, ties by ascending target identifier.
struct RankingResult {
  std::vector<SourceRanking> rows;

  /// Gold ranks of the sources that have a gold target.
  std::vector<std::size_t> ranks() const;
};

/// Ranks one source's score vector. `ids` are the pool's identifiers used for
/// tie-breaking; `gold` is the gold target's pool index or kNoGold.
SourceRanking rank_scores(std::span<const double> scores, std::span<const std::string> ids,
                          std::size_t gold, std::size_t k);

}  // namespace eventea
