#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace faast::canon {

// Node states and messages are functions of content only, never of node or
// edge numbering: per-row maps are evaluated once per distinct row, and
// every reduction across nodes/edges sums its operands in a sorted order
// derived from the values themselves. This makes model outputs bitwise
// invariant under renumbering of graph nodes.

/// Monotone total-order key for doubles (integer compare == numeric order
/// for finite values; NaNs ordered by payload, so sorting stays valid).
std::uint64_t order_key(double v);

bool row_less(const double* a, const double* b, int n);

/// Rows of X grouped by exact content. `unique` holds one row per distinct
/// content in sorted order; `group_of[i]` maps row i of X to its row in
/// `unique`.
struct RowGroups {
    Eigen::MatrixXd unique;
    std::vector<int> group_of;
};

RowGroups group_rows(const Eigen::MatrixXd& x);
RowGroups group_rows_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Y = X * W  (+ b per row), evaluated on distinct rows and broadcast back.
Eigen::MatrixXd linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                       const Eigen::RowVectorXd& b);

/// Order-canonical sum of all rows of X.
Eigen::RowVectorXd sum_rows(const Eigen::MatrixXd& x);

/// Order-canonical sum of the selected rows of X.
Eigen::RowVectorXd sum_rows_subset(const Eigen::MatrixXd& x, const std::vector<int>& rows);

/// Order-canonical sum of w[i] * X.row(i).
Eigen::RowVectorXd weighted_sum_rows(const Eigen::VectorXd& w, const Eigen::MatrixXd& x);

/// Order-canonical sum of a value list (the list is consumed).
double sum_values(std::vector<double> values);

}  // namespace faast::canon
