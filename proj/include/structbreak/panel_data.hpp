#pragma once

// PanelDataset: a balanced panel (or a single time series when N == 1) on a
// regular time grid.  Variables are stored as N x T matrices keyed by name;
// row i is unit i, column t is period t.  Time-series data is simply N == 1.

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "structbreak/common.hpp"

namespace structbreak {

class PanelDataset {
 public:
  PanelDataset(std::vector<std::string> unit_ids,
               std::vector<long long> time_index,
               std::map<std::string, Eigen::MatrixXd> columns,
               std::vector<std::string> time_labels = {})
      : unit_ids_(std::move(unit_ids)),
        time_index_(std::move(time_index)),
        time_labels_(std::move(time_labels)),
        columns_(std::move(columns)) {
    validate();
  }

  int n_units() const { return static_cast<int>(unit_ids_.size()); }
  int n_periods() const { return static_cast<int>(time_index_.size()); }

  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  const std::vector<long long>& time_index() const { return time_index_; }
  const std::vector<std::string>& time_labels() const { return time_labels_; }

  bool has_column(const std::string& name) const {
    return columns_.count(name) != 0;
  }

  const Eigen::MatrixXd& column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end())
      throw error("unknown variable '" + name + "' in dataset");
    return it->second;
  }

  const std::map<std::string, Eigen::MatrixXd>& columns() const {
    return columns_;
  }

  // 1-based position of a time label on the grid; used when break dates are
  // given as labels ("2020w20") rather than positions.
  int position_of_label(const std::string& label) const {
    auto it = std::find(time_labels_.begin(), time_labels_.end(), label);
    if (it == time_labels_.end())
      throw error("time label '" + label + "' not found in dataset");
    return static_cast<int>(it - time_labels_.begin()) + 1;
  }

 private:
  void validate() {
    if (unit_ids_.empty()) throw error("dataset has no units");
    if (time_index_.size() < 2) throw error("dataset has fewer than 2 periods");
    for (size_t i = 1; i < time_index_.size(); ++i) {
      if (time_index_[i] <= time_index_[i - 1])
        throw error("time index must be strictly increasing");
    }
    // Regular grid: every consecutive gap must equal the first gap.
    const long long step = time_index_[1] - time_index_[0];
    for (size_t i = 1; i < time_index_.size(); ++i) {
      if (time_index_[i] - time_index_[i - 1] != step)
        throw error("time index has gaps: expected a regular grid with step " +
                    std::to_string(step));
    }
    {
      auto sorted = unit_ids_;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw error("duplicate unit id in dataset");
    }
    if (time_labels_.empty()) {
      time_labels_.reserve(time_index_.size());
      for (long long t : time_index_) time_labels_.push_back(std::to_string(t));
    } else if (time_labels_.size() != time_index_.size()) {
      throw error("time_labels length does not match the time grid");
    }
    for (const auto& [name, mat] : columns_) {
      if (mat.rows() != n_units() || mat.cols() != n_periods())
        throw error("variable '" + name + "' is " + std::to_string(mat.rows()) +
                    "x" + std::to_string(mat.cols()) + ", expected " +
                    std::to_string(n_units()) + "x" +
                    std::to_string(n_periods()) +
                    " (balanced panel required)");
    }
  }

  std::vector<std::string> unit_ids_;
  std::vector<long long> time_index_;
  std::vector<std::string> time_labels_;
  std::map<std::string, Eigen::MatrixXd> columns_;
};

}  // namespace structbreak
