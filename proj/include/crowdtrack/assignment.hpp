#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <utility>
#include <vector>

namespace crowdtrack {

struct AssignmentResult {
    /// (row, col) pairs in ascending row order.
    std::vector<std::pair<std::size_t, std::size_t>> matches;
    std::vector<std::size_t> unmatched_rows;
    std::vector<std::size_t> unmatched_cols;

    /// Sum of cost(row, col) over `matches`, accumulated in row order.
    double total_cost(const Eigen::MatrixXd& cost) const;
};

/// Exact minimum-cost bipartite matching (Hungarian method).
///
/// Rectangular matrices are accepted; min(rows, cols) pairs are matched and
/// the surplus side is reported unmatched. Throws InputError on NaN/inf.
AssignmentResult solve_min_cost(const Eigen::MatrixXd& cost);

/// solve_min_cost followed by demotion of every pair whose cost exceeds
/// `gate`; both members of a demoted pair become unmatched.
AssignmentResult match_with_gate(const Eigen::MatrixXd& cost, double gate);

} // namespace crowdtrack
