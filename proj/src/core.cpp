#include "ibge/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ibge {

InterventionDesign InterventionDesign::observational(int n_rows) {
  InterventionDesign d;
  d.n_rows = n_rows;
  return d;
}

InterventionDesign InterventionDesign::from_states(
    const std::vector<std::vector<std::uint8_t>>& states, std::vector<std::string> labels) {
  InterventionDesign d;
  d.m = static_cast<int>(labels.size());
  d.n_rows = static_cast<int>(states.size());
  d.labels = std::move(labels);
  d.row_states.reserve(states.size() * d.m);
  for (const auto& row : states) {
    if (static_cast<int>(row.size()) != d.m) throw ValidationError("design row has wrong number of columns");
    d.row_states.insert(d.row_states.end(), row.begin(), row.end());
  }
  return d;
}

void validate_dataset(const ObservedDataset& data, const InterventionDesign& design) {
  if (data.cols() < 1) throw ValidationError("dataset must have at least one variable");
  if (static_cast<int>(data.var_names.size()) != data.cols()) {
    throw ValidationError("variable name count does not match column count");
  }
  for (int j = 0; j < data.cols(); ++j) {
    for (int i = 0; i < data.rows(); ++i) {
      if (!std::isfinite(data.values(i, j))) {
        std::ostringstream os;
        os << "non-finite value at row " << i << ", column " << j << " (" << data.var_names[j] << ")";
        throw ValidationError(os.str());
      }
    }
  }
  if (design.rows() != data.rows()) {
    std::ostringstream os;
    os << "row count mismatch: data has " << data.rows() << " rows, design has " << design.rows();
    throw ValidationError(os.str());
  }
  if (design.m < 0) throw ValidationError("negative intervention count");
  if (static_cast<int>(design.labels.size()) != design.m) {
    throw ValidationError("intervention label count does not match m");
  }
  if (design.row_states.size() != static_cast<std::size_t>(design.n_rows) * design.m) {
    throw ValidationError("row_states size does not equal N * m");
  }
  for (std::size_t k = 0; k < design.row_states.size(); ++k) {
    if (design.row_states[k] > 1) {
      std::ostringstream os;
      os << "non-binary design entry at row " << k / design.m << ", intervention " << k % design.m;
      throw ValidationError(os.str());
    }
  }
  if (design.known_targets) {
    if (static_cast<int>(design.known_targets->size()) != design.m) {
      throw ValidationError("known_targets must list one target set per intervention");
    }
    for (const auto& set : *design.known_targets) {
      for (int v : set) {
        if (v < 0 || v >= data.cols()) throw ValidationError("known target index out of range");
      }
    }
  }
}

StandardizeReport standardize(const ObservedDataset& data) {
  if (data.rows() < 2) throw ValidationError("standardize needs at least two rows");
  StandardizeReport out;
  out.data = data;
  out.data.constant_columns.clear();
  const double n = data.rows();
  for (int j = 0; j < data.cols(); ++j) {
    auto col = out.data.values.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double var = col.squaredNorm() / (n - 1.0);
    if (var > 0.0) {
      col /= std::sqrt(var);
    } else {
      col.setZero();
      out.data.constant_columns.push_back(j);
      out.warnings.push_back("column '" + data.var_names[j] + "' has zero variance; centered only");
    }
  }
  out.data.standardized = true;
  return out;
}

ObservedDataset select_rows(const ObservedDataset& data, const std::vector<int>& rows) {
  ObservedDataset out;
  out.var_names = data.var_names;
  out.values = data.values(rows, Eigen::all);
  return out;
}

InterventionDesign select_rows(const InterventionDesign& design, const std::vector<int>& rows) {
  InterventionDesign out;
  out.m = design.m;
  out.n_rows = static_cast<int>(rows.size());
  out.labels = design.labels;
  out.known_targets = design.known_targets;
  out.row_states.reserve(rows.size() * design.m);
  for (int r : rows) {
    for (int j = 0; j < design.m; ++j) out.row_states.push_back(design.state(r, j));
  }
  return out;
}

NodeSet with_node(NodeSet set, int v) {
  auto it = std::lower_bound(set.begin(), set.end(), v);
  if (it == set.end() || *it != v) set.insert(it, v);
  return set;
}

NodeSet without_node(NodeSet set, int v) {
  auto it = std::lower_bound(set.begin(), set.end(), v);
  if (it != set.end() && *it == v) set.erase(it);
  return set;
}

}  // namespace ibge
