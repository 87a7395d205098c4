#include "crowdtrack/assignment.hpp"

#include "crowdtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdtrack {

namespace {

// Shortest-augmenting-path Hungarian algorithm with dual potentials.
// Requires rows <= cols. Returns, for every row, its assigned column.
std::vector<std::size_t> hungarian_rows_le_cols(const Eigen::MatrixXd& a)
{
    const auto n = static_cast<std::size_t>(a.rows());
    const auto m = static_cast<std::size_t>(a.cols());
    constexpr double inf = std::numeric_limits<double>::infinity();

    // 1-based indices; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> col_owner(m + 1, 0), way(m + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        col_owner[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = col_owner[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = a(static_cast<Eigen::Index>(i0 - 1),
                                     static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (col_owner[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> row_to_col(n, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        if (col_owner[j] != 0) {
            row_to_col[col_owner[j] - 1] = j - 1;
        }
    }
    return row_to_col;
}

AssignmentResult from_pairs(std::size_t rows, std::size_t cols,
                            std::vector<std::pair<std::size_t, std::size_t>> pairs)
{
    std::sort(pairs.begin(), pairs.end());
    AssignmentResult result;
    std::vector<char> row_used(rows, 0), col_used(cols, 0);
    for (const auto& [r, c] : pairs) {
        row_used[r] = 1;
        col_used[c] = 1;
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (!row_used[r]) {
            result.unmatched_rows.push_back(r);
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (!col_used[c]) {
            result.unmatched_cols.push_back(c);
        }
    }
    result.matches = std::move(pairs);
    return result;
}

} // namespace

double AssignmentResult::total_cost(const Eigen::MatrixXd& cost) const
{
    double total = 0.0;
    for (const auto& [r, c] : matches) {
        total += cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return total;
}

AssignmentResult solve_min_cost(const Eigen::MatrixXd& cost)
{
    if (!cost.allFinite()) {
        throw InputError("solve_min_cost: cost matrix contains a non-finite entry");
    }
    const auto rows = static_cast<std::size_t>(cost.rows());
    const auto cols = static_cast<std::size_t>(cost.cols());
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (rows == 0 || cols == 0) {
        return from_pairs(rows, cols, {});
    }
    if (rows <= cols) {
        const auto assigned = hungarian_rows_le_cols(cost);
        for (std::size_t r = 0; r < rows; ++r) {
            pairs.emplace_back(r, assigned[r]);
        }
    } else {
        const Eigen::MatrixXd transposed = cost.transpose();
        const auto assigned = hungarian_rows_le_cols(transposed);
        for (std::size_t c = 0; c < cols; ++c) {
            pairs.emplace_back(assigned[c], c);
        }
    }
    return from_pairs(rows, cols, std::move(pairs));
}

AssignmentResult match_with_gate(const Eigen::MatrixXd& cost, double gate)
{
    if (!std::isfinite(gate)) {
        throw InputError("match_with_gate: gate must be finite");
    }
    const AssignmentResult full = solve_min_cost(cost);
    std::vector<std::pair<std::size_t, std::size_t>> kept;
    for (const auto& [r, c] : full.matches) {
        if (cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) <= gate) {
            kept.emplace_back(r, c);
        }
    }
    return from_pairs(static_cast<std::size_t>(cost.rows()),
                      static_cast<std::size_t>(cost.cols()), std::move(kept));
}

} // namespace crowdtrack
