#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eventea/kg.hpp"
#include "eventea/ranking.hpp"

namespace eventea {

/// Cosine retrieval. Row i of `sources` is ranked against every row of
/// `targets`; `target_ids` break ties (ascending). `gold[i]` is the target row
/// of source i's counterpart, or kNoGold; pass an empty vector for no gold.
/// Cosine with a zero vector is 0. Throws std::invalid_argument for an empty
/// pool, k == 0 or a dimension mismatch.
RankingResult retrieve(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& targets,
                       std::span<const std::string> target_ids, const std::vector<std::size_t>& gold,
                       std::size_t k);

/// Fraction of ranks <= k. Throws std::invalid_argument on empty input.
double hits_at(std::span<const std::size_t> ranks, std::size_t k);
/// Mean reciprocal rank. Throws std::invalid_argument on empty input.
double mrr(std::span<const std::size_t> ranks);

struct TypedRecall {
  std::optional<double> event;  // nullopt when no event entity was scored
  std::optional<double> other;
  double all = 0.0;
};

/// Hits@k within the event and other categories of the source entities and
/// overall. `sources[i]` is the entity whose gold rank is `ranks[i]`.
TypedRecall recall_by_type(std::span<const std::size_t> ranks, std::span<const std::string> sources,
                           const EntityTypeMap& types, std::size_t k);

/// One line of a case-study report. `rank` is 1..3 for the top candidates and
/// 0 for the separately reported gold target of a wrong case.
struct CaseRow {
  std::string source;
  std::string source_name;
  std::size_t rank = 0;
  std::string target;
  std::string target_name;
  bool is_gold = false;
  double tae = 0.0;
  std::optional<double> levenshtein;
  std::optional<double> name_cosine;

  bool operator==(const CaseRow&) const = default;
};

/// Optional comparison scorers for case reports. Each receives
/// (source row, target row) in the respective pools.
struct CaseScorers {
  bool levenshtein = true;
  /// Name vectors (e.g. mean-pooled contextual vectors) per pool row; used
  /// for the name_cosine column when present.
  const Eigen::MatrixXd* source_name_vectors = nullptr;
  const Eigen::MatrixXd* target_name_vectors = nullptr;
};

struct CasePool {
  std::vector<std::string> ids;
  std::vector<std::string> names;
  Eigen::MatrixXd embeddings;
};

/// For each requested source id: the top-3 targets by embedding cosine with
/// each scorer's similarity; when the top-1 is not the gold target, the gold
/// target follows as an extra row. `gold[i]` indexes `targets` for source
/// row i (kNoGold when unknown). Throws DataError for an unknown entity.
std::vector<CaseRow> case_report(const std::vector<std::string>& requested, const CasePool& sources,
                                 const CasePool& targets, const std::vector<std::size_t>& gold,
                                 const CaseScorers& scorers);

void write_case_rows(std::ostream& out, const std::vector<CaseRow>& rows);
/// Parses the output of write_case_rows. Throws DataError on malformed lines.
std::vector<CaseRow> read_case_rows(std::istream& in);

}  // namespace eventea
