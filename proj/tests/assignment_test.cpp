#include "crowdtrack/assignment.hpp"

#include "crowdtrack/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <set>

namespace crowdtrack {
namespace {

using testing::brute_force_min_cost;

void expect_well_formed(const AssignmentResult& r, std::size_t rows, std::size_t cols)
{
    std::set<std::size_t> seen_rows, seen_cols;
    for (const auto& [i, j] : r.matches) {
        EXPECT_TRUE(seen_rows.insert(i).second);
        EXPECT_TRUE(seen_cols.insert(j).second);
    }
    for (std::size_t i : r.unmatched_rows) {
        EXPECT_TRUE(seen_rows.insert(i).second);
    }
    for (std::size_t j : r.unmatched_cols) {
        EXPECT_TRUE(seen_cols.insert(j).second);
    }
    EXPECT_EQ(seen_rows.size(), rows);
    EXPECT_EQ(seen_cols.size(), cols);
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols)
{
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = dist(rng);
        }
    }
    return m;
}

TEST(SolveMinCost, ZeroDiagonal)
{
    Eigen::MatrixXd cost(2, 2);
    cost << 0, 1, 1, 0;
    const auto r = solve_min_cost(cost);
    EXPECT_EQ(r.matches, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}}));
    EXPECT_DOUBLE_EQ(r.total_cost(cost), 0.0);
}

TEST(SolveMinCost, SingleRowPicksArgmin)
{
    Eigen::MatrixXd cost(1, 3);
    cost << 5, 2, 9;
    const auto r = solve_min_cost(cost);
    EXPECT_EQ(r.matches, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}}));
    EXPECT_EQ(r.unmatched_cols, (std::vector<std::size_t>{0, 2}));
    EXPECT_TRUE(r.unmatched_rows.empty());
}

TEST(SolveMinCost, TallMatrixLeavesRowsUnmatched)
{
    Eigen::MatrixXd cost(3, 1);
    cost << 4, 1, 3;
    const auto r = solve_min_cost(cost);
    EXPECT_EQ(r.matches, (std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}}));
    EXPECT_EQ(r.unmatched_rows, (std::vector<std::size_t>{0, 2}));
}

TEST(SolveMinCost, EmptyMatrix)
{
    const auto r = solve_min_cost(Eigen::MatrixXd(0, 3));
    EXPECT_TRUE(r.matches.empty());
    EXPECT_EQ(r.unmatched_cols.size(), 3u);
}

TEST(SolveMinCost, RejectsNonFinite)
{
    Eigen::MatrixXd cost(2, 2);
    cost << 0, std::numeric_limits<double>::quiet_NaN(), 1, 0;
    EXPECT_THROW(solve_min_cost(cost), InputError);
    cost(0, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(solve_min_cost(cost), InputError);
}

TEST(SolveMinCost, FourByFourMatchesPermutationOracle)
{
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        const auto cost = random_matrix(rng, 4, 4);
        const auto r = solve_min_cost(cost);
        EXPECT_EQ(r.matches.size(), 4u);
        EXPECT_EQ(r.total_cost(cost), brute_force_min_cost(cost));
    }
}

TEST(SolveMinCost, RectangularUpToSixMatchesOracle)
{
    std::mt19937_64 rng(77);
    for (int rows = 1; rows <= 6; ++rows) {
        for (int cols = 1; cols <= 6; ++cols) {
            for (int trial = 0; trial < 20; ++trial) {
                const auto cost = random_matrix(rng, rows, cols);
                const auto r = solve_min_cost(cost);
                expect_well_formed(r, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
                EXPECT_EQ(r.matches.size(), static_cast<std::size_t>(std::min(rows, cols)));
                EXPECT_NEAR(r.total_cost(cost), brute_force_min_cost(cost), 1e-12);
            }
        }
    }
}

TEST(SolveMinCost, IntegerCostsWithTiesStayOptimalAndDeterministic)
{
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> dist(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd cost(5, 5);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                cost(i, j) = dist(rng);
            }
        }
        const auto a = solve_min_cost(cost);
        const auto b = solve_min_cost(cost);
        EXPECT_EQ(a.matches, b.matches);
        EXPECT_EQ(a.total_cost(cost), brute_force_min_cost(cost));
    }
}

TEST(MatchWithGate, BelowGateIsMatched)
{
    Eigen::MatrixXd cost(1, 1);
    cost << 0.1;
    const auto r = match_with_gate(cost, 0.5);
    EXPECT_EQ(r.matches.size(), 1u);
}

TEST(MatchWithGate, AboveGateUnmatchesBothSides)
{
    Eigen::MatrixXd cost(1, 1);
    cost << 0.9;
    const auto r = match_with_gate(cost, 0.5);
    EXPECT_TRUE(r.matches.empty());
    EXPECT_EQ(r.unmatched_rows, (std::vector<std::size_t>{0}));
    EXPECT_EQ(r.unmatched_cols, (std::vector<std::size_t>{0}));
}

TEST(MatchWithGate, GateSplitsOneOptimalPair)
{
    // Optimal assignment is the diagonal (0.1 + 0.2 + 0.8 = 1.1); the 0.8
    // pair exceeds the gate and is split.
    Eigen::MatrixXd cost(3, 3);
    cost << 0.1, 0.9, 0.9,
            0.9, 0.2, 0.9,
            0.9, 0.9, 0.8;
    const double gate = 0.5;

    // Oracle: enumerate permutations, keep the best, then gate it.
    std::vector<std::size_t> perm{0, 1, 2}, best;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        const double c = cost(0, static_cast<Eigen::Index>(perm[0])) +
                         cost(1, static_cast<Eigen::Index>(perm[1])) +
                         cost(2, static_cast<Eigen::Index>(perm[2]));
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<std::pair<std::size_t, std::size_t>> expected;
    for (std::size_t r = 0; r < 3; ++r) {
        if (cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(best[r])) <= gate) {
            expected.emplace_back(r, best[r]);
        }
    }

    const auto r = match_with_gate(cost, gate);
    EXPECT_EQ(r.matches, expected);
    EXPECT_EQ(r.unmatched_rows, (std::vector<std::size_t>{2}));
    EXPECT_EQ(r.unmatched_cols, (std::vector<std::size_t>{2}));
}

TEST(MatchWithGate, NeverReturnsPairAboveGate)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const auto cost = random_matrix(rng, 1 + trial % 6, 1 + (trial / 6) % 6);
        const auto r = match_with_gate(cost, 0.4);
        expect_well_formed(r, static_cast<std::size_t>(cost.rows()), static_cast<std::size_t>(cost.cols()));
        for (const auto& [i, j] : r.matches) {
            EXPECT_LE(cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 0.4);
        }
    }
}

TEST(MatchWithGate, RejectsNonFiniteGate)
{
    Eigen::MatrixXd cost(1, 1);
    cost << 0.0;
    EXPECT_THROW(match_with_gate(cost, std::numeric_limits<double>::infinity()), InputError);
}

} // namespace
} // namespace crowdtrack
