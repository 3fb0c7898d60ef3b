#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eventea/ranking.hpp"

namespace eventea {

enum class SimilarityKind { LevenshteinRatio, Jaro, JaroWinkler, SequenceRatio };

/// Parses the CLI spelling: lev-ratio, jaro, jaro-winkler, seq.
SimilarityKind parse_similarity_kind(std::string_view name);
std::string_view to_string(SimilarityKind kind);

// All functions below operate on Unicode scalar values. Use
// unicode::prepare() to normalize raw UTF-8 names first.

/// Unit-cost edit distance.
std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b);

/// Edit distance with insert/delete cost 1 and substitution cost 2.
std::size_t indel_substitution2_distance(std::u32string_view a, std::u32string_view b);

/// (|a|+|b| - D2) / (|a|+|b|) with D2 the substitution-cost-2 distance;
/// 1.0 for two empty strings.
double levenshtein_ratio(std::u32string_view a, std::u32string_view b);

double jaro(std::u32string_view a, std::u32string_view b);

/// Winkler's prefix boost with the common prefix capped at 4.
/// Throws std::invalid_argument unless 0 <= prefix_scale <= 0.25.
double jaro_winkler(std::u32string_view a, std::u32string_view b, double prefix_scale = 0.1);

/// Ratcliff-Obershelp: 2M/(|a|+|b|), M the total size of the matching blocks
/// found by recursive leftmost-longest common substring splitting. No junk
/// heuristics. 1.0 for two empty strings.
double sequence_ratio(std::u32string_view a, std::u32string_view b);

/// Total size of the recursive matching blocks used by sequence_ratio.
std::size_t matching_block_total(std::u32string_view a, std::u32string_view b);

double similarity(SimilarityKind kind, std::u32string_view a, std::u32string_view b);

/// Cheap upper bound on levenshtein_ratio and sequence_ratio from the
/// character multiset intersection.
double quick_ratio(std::u32string_view a, std::u32string_view b);

struct NamedEntity {
  std::string id;
  std::string name;
};

struct NameMatchOptions {
  SimilarityKind kind = SimilarityKind::LevenshteinRatio;
  std::size_t k = 10;
  bool lowercase = true;
};

/// Ranks every target for every source by name similarity. `gold[i]` is the
/// index into `targets` of source i's gold counterpart (kNoGold if none);
/// pass an empty vector when there is no gold. Throws std::invalid_argument
/// for an empty target set or k == 0.
RankingResult name_match_align(const std::vector<NamedEntity>& sources,
                               const std::vector<NamedEntity>& targets,
                               const std::vector<std::size_t>& gold,
                               const NameMatchOptions& options);

}  // namespace eventea
