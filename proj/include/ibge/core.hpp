#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ibge {

/// Sorted, duplicate-free list of vertex indices.
using NodeSet = std::vector<int>;

/// Raised when an input object violates its invariants.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// N x n matrix of observations with column names.
///
/// Internals address variables by column index; names are only used at the
/// file boundary.
struct ObservedDataset {
  Eigen::MatrixXd values;
  std::vector<std::string> var_names;
  bool standardized = false;
  /// Columns found to have zero variance during standardization.
  std::vector<int> constant_columns;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// Binary on/off state of m intervention indicators for every observation.
struct InterventionDesign {
  int m = 0;
  int n_rows = 0;
  std::vector<std::string> labels;
  /// Row-major N x m matrix of 0/1 entries.
  std::vector<std::uint8_t> row_states;
  /// Optional target sets, one per intervention, as observed-node indices.
  std::optional<std::vector<NodeSet>> known_targets;

  int rows() const { return n_rows; }
  std::uint8_t state(int row, int j) const { return row_states[static_cast<std::size_t>(row) * m + j]; }
  bool is_active(int row, int j) const { return state(row, j) != 0; }

  /// Design with no interventions for N rows.
  static InterventionDesign observational(int n_rows);
  /// Build from a dense N x m state table.
  static InterventionDesign from_states(const std::vector<std::vector<std::uint8_t>>& states,
                                        std::vector<std::string> labels);
};

/// Throws ValidationError unless data and design are mutually consistent:
/// n >= 1, finite values, matching row counts, binary design entries and
/// in-range target indices.
void validate_dataset(const ObservedDataset& data, const InterventionDesign& design);

struct StandardizeReport {
  ObservedDataset data;
  std::vector<std::string> warnings;
};

/// Global column standardization (mean 0, sample sd 1 with N-1 denominator).
/// Zero-variance columns are only centered and reported in warnings.
StandardizeReport standardize(const ObservedDataset& data);

/// Returns a copy of data and design restricted to the given rows, in order.
ObservedDataset select_rows(const ObservedDataset& data, const std::vector<int>& rows);
InterventionDesign select_rows(const InterventionDesign& design, const std::vector<int>& rows);

/// Insert v into a sorted NodeSet (no-op if present) / remove it.
NodeSet with_node(NodeSet set, int v);
NodeSet without_node(NodeSet set, int v);

}  // namespace ibge
