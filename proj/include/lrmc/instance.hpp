#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace lrmc {

/// One receiver of the delivery problem. Message indices are 0-based here;
/// the instance file uses 1-based indices.
struct Destination {
  std::vector<int> desired;
  std::vector<int> cached;

  bool operator==(const Destination&) const = default;
};

/// A caching (index-coding) instance: K messages split into streams, and a
/// list of destinations each wanting some messages and caching others.
/// Immutable once built; every invariant is checked by build().
class CachingInstance {
 public:
  /// Validates and canonicalizes (sorted, de-duplicated index sets).
  ///
  /// Throws RangeError for K < 1 or a stream count < 1, IndexError for an
  /// index outside [0, K), EmptyDesired for a destination with no desired
  /// message and OverlapError when desired and cached intersect.
  static CachingInstance build(int num_messages, std::vector<int> streams,
                               std::vector<Destination> destinations);

  int num_messages() const noexcept { return num_messages_; }
  int num_destinations() const noexcept { return static_cast<int>(destinations_.size()); }
  const std::vector<int>& streams() const noexcept { return streams_; }
  const std::vector<Destination>& destinations() const noexcept { return destinations_; }

  bool is_cached(int destination, int message) const;
  bool uniform_streams() const noexcept;
  int total_streams() const noexcept;

  bool operator==(const CachingInstance&) const = default;

 private:
  CachingInstance() = default;

  int num_messages_ = 0;
  std::vector<int> streams_;
  std::vector<Destination> destinations_;
};

inline CachingInstance build_instance(int num_messages, std::vector<int> streams,
                                      std::vector<Destination> destinations) {
  return CachingInstance::build(num_messages, std::move(streams), std::move(destinations));
}

/// Unicast instance with M_k = {k} and |V_k| = cache_size drawn uniformly
/// without replacement from the other messages. Deterministic in `seed`.
CachingInstance random_unicast_instance(int num_messages, int cache_size, int streams,
                                        std::uint64_t seed);

/// Instance file (JSON):
///   { "K": 5, "streams": [1,1,1,1,1],
///     "destinations": [ {"desired": [1], "cached": [2,5]}, ... ] }
/// Indices are 1-based. Unknown members are rejected.
CachingInstance read_instance(std::string_view text);
std::string write_instance(const CachingInstance& instance);

/// Observed-entry set in coordinate form, sorted by (row, col). Also carries
/// CSR row pointers and a column-major permutation for transpose products.
struct ObservationPattern {
  int rows = 0;
  int cols = 0;
  std::vector<int> row;
  std::vector<int> col;
  std::vector<int> row_ptr;    // size rows + 1
  std::vector<int> col_ptr;    // size cols + 1
  std::vector<int> col_order;  // entry ids grouped by column, rows ascending

  std::size_t size() const noexcept { return row.size(); }

  static ObservationPattern from_entries(int rows, int cols,
                                         std::vector<std::pair<int, int>> entries);
};

/// Scalar row range [begin, end) belonging to the block (destination, message).
struct RowBlock {
  int begin = 0;
  int end = 0;
  int destination = 0;
  int message = 0;
};

/// Scalar column range [begin, end) of a message.
struct ColBlock {
  int begin = 0;
  int end = 0;
  int message = 0;
};

/// The masked completion problem P_Omega(X) = J.
class CompletionProblem {
 public:
  /// Generic problem from explicit (row, col, value) observations. Used for
  /// hand-made test problems; block maps are left empty.
  CompletionProblem(int rows, int cols, const std::vector<std::tuple<int, int, double>>& observed);

  CompletionProblem(std::shared_ptr<const ObservationPattern> pattern, Eigen::VectorXd target,
                    std::vector<RowBlock> row_blocks, std::vector<ColBlock> col_blocks);

  int rows() const noexcept { return pattern_->rows; }
  int cols() const noexcept { return pattern_->cols; }
  std::size_t num_observed() const noexcept { return pattern_->size(); }

  const ObservationPattern& pattern() const noexcept { return *pattern_; }
  const std::shared_ptr<const ObservationPattern>& pattern_ptr() const noexcept { return pattern_; }
  /// J on Omega, aligned with the pattern's entry order.
  const Eigen::VectorXd& target() const noexcept { return target_; }
  double target_norm() const noexcept { return target_.norm(); }

  const std::vector<RowBlock>& row_blocks() const noexcept { return row_blocks_; }
  const std::vector<ColBlock>& col_blocks() const noexcept { return col_blocks_; }

  /// Dense M x Q matrix equal to J on Omega and zero elsewhere.
  Eigen::MatrixXd dense_target() const;
  /// Dense 0/1 indicator of Omega.
  Eigen::MatrixXd dense_mask() const;

 private:
  std::shared_ptr<const ObservationPattern> pattern_;
  Eigen::VectorXd target_;
  std::vector<RowBlock> row_blocks_;
  std::vector<ColBlock> col_blocks_;
};

/// Rows: destinations in order, then desired messages ascending, Q_i scalar
/// rows each. Columns: messages ascending. Omega holds block (k,i) x j for
/// every j not cached at k; J is identity on j == i and zero elsewhere.
CompletionProblem build_completion_problem(const CachingInstance& instance);

}  // namespace lrmc
