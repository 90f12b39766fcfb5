#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "keytrack/assignment.hpp"
#include "keytrack/rng.hpp"

using namespace keytrack;

namespace {

struct BruteResult {
    int matched = 0;
    double total = 0.0;
};

// Exhaustive gated optimum: over every injection of the smaller side into
// the larger, drop pairs above the gate, rank by (max matched, min total).
BruteResult brute_force(const CostMatrix& costs, double gate) {
    const int r = costs.rows(), c = costs.cols();
    const bool rows_small = r <= c;
    const int small = rows_small ? r : c, large = rows_small ? c : r;
    std::vector<int> perm(large);
    std::iota(perm.begin(), perm.end(), 0);

    BruteResult best;
    best.matched = -1;
    do {
        int matched = 0;
        double total = 0.0;
        for (int i = 0; i < small; ++i) {
            const double value = rows_small ? costs.at(i, perm[i]) : costs.at(perm[i], i);
            if (value <= gate) {
                ++matched;
                total += value;
            }
        }
        if (matched > best.matched || (matched == best.matched && total < best.total)) {
            best.matched = matched;
            best.total = total;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double total_cost(const CostMatrix& costs, const std::vector<std::pair<int, int>>& pairs) {
    double total = 0.0;
    for (const auto& [r, c] : pairs) total += costs.at(r, c);
    return total;
}

void check_is_matching(const CostMatrix& costs, double gate,
                       const std::vector<std::pair<int, int>>& pairs) {
    std::vector<char> row_used(costs.rows(), 0), col_used(costs.cols(), 0);
    for (const auto& [r, c] : pairs) {
        CHECK(costs.at(r, c) <= gate);
        CHECK_FALSE(row_used[r]);
        CHECK_FALSE(col_used[c]);
        row_used[r] = 1;
        col_used[c] = 1;
    }
}

} // namespace

TEST_CASE("single-pair matrices respect the gate") {
    CostMatrix one(1, 1);
    one.at(0, 0) = 0.1;
    CHECK(assign(one, 0.7, AssignStrategy::hungarian) ==
          std::vector<std::pair<int, int>>{{0, 0}});
    one.at(0, 0) = 0.9;
    CHECK(assign(one, 0.7, AssignStrategy::hungarian).empty());
    CHECK(assign(one, 0.7, AssignStrategy::greedy).empty());
}

TEST_CASE("empty matrices produce empty matchings") {
    CHECK(assign(CostMatrix(0, 0), 1.0, AssignStrategy::hungarian).empty());
    CHECK(assign(CostMatrix(3, 0), 1.0, AssignStrategy::hungarian).empty());
    CHECK(assign(CostMatrix(0, 3), 1.0, AssignStrategy::greedy).empty());
}

TEST_CASE("hungarian equals the exhaustive gated optimum up to 7x7") {
    Rng rng(0xa551u);
    for (int trial = 0; trial < 400; ++trial) {
        const int r = 1 + static_cast<int>(rng.uniform_index(7));
        const int c = 1 + static_cast<int>(rng.uniform_index(7));
        CostMatrix costs(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) costs.at(i, j) = rng.uniform();
        const double gate = rng.uniform(0.2, 1.0);

        const auto pairs = assign(costs, gate, AssignStrategy::hungarian);
        check_is_matching(costs, gate, pairs);
        const BruteResult expected = brute_force(costs, gate);
        CHECK(static_cast<int>(pairs.size()) == expected.matched);
        CHECK(total_cost(costs, pairs) == doctest::Approx(expected.total).epsilon(1e-9));
    }
}

TEST_CASE("hungarian never costs more than greedy on full 6x6 matchings") {
    Rng rng(0xa552u);
    for (int trial = 0; trial < 300; ++trial) {
        CostMatrix costs(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) costs.at(i, j) = rng.uniform();
        // Ungated: both strategies match all six pairs.
        const auto h = assign(costs, 2.0, AssignStrategy::hungarian);
        const auto g = assign(costs, 2.0, AssignStrategy::greedy);
        CHECK(h.size() == 6);
        CHECK(g.size() == 6);
        CHECK(total_cost(costs, h) <= total_cost(costs, g) + 1e-12);

        // Gated: cost comparison only binds at equal cardinality.
        const double gate = rng.uniform(0.2, 0.9);
        const auto hg = assign(costs, gate, AssignStrategy::hungarian);
        const auto gg = assign(costs, gate, AssignStrategy::greedy);
        check_is_matching(costs, gate, hg);
        check_is_matching(costs, gate, gg);
        CHECK(hg.size() >= gg.size());
        if (hg.size() == gg.size())
            CHECK(total_cost(costs, hg) <= total_cost(costs, gg) + 1e-12);
    }
}

TEST_CASE("greedy breaks ties toward the lower row, then lower column") {
    CostMatrix costs(2, 2, 0.5);
    const auto pairs = assign(costs, 1.0, AssignStrategy::greedy);
    CHECK(pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("rectangular matrices leave the surplus side unmatched") {
    CostMatrix costs(2, 4, 0.9);
    costs.at(0, 2) = 0.1;
    costs.at(1, 0) = 0.2;
    for (const auto strategy : {AssignStrategy::hungarian, AssignStrategy::greedy}) {
        const auto pairs = assign(costs, 0.7, strategy);
        CHECK(pairs == std::vector<std::pair<int, int>>{{0, 2}, {1, 0}});
    }
}
