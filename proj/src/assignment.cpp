#include "keytrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace keytrack {

namespace {

// Gated pairs become a forbidden sentinel well above any achievable real
// total, so minimizing the padded square matrix first maximizes the number
// of admissible pairs and then minimizes their cost sum.
double forbidden_cost(const CostMatrix& costs, int n) {
    double max_abs = 1.0;
    for (int r = 0; r < costs.rows(); ++r)
        for (int c = 0; c < costs.cols(); ++c)
            max_abs = std::max(max_abs, std::abs(costs.at(r, c)));
    return 2.0 * max_abs * (n + 1) + 1.0;
}

// Shortest-augmenting-path Hungarian with row/column potentials on an
// n x n matrix. Returns match[col] = row.
std::vector<int> solve_square(const std::vector<std::vector<double>>& a, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> match(n, -1);
    for (int j = 1; j <= n; ++j) match[j - 1] = p[j] - 1;
    return match;
}

std::vector<std::pair<int, int>> assign_hungarian(const CostMatrix& costs, double gate) {
    const int rows = costs.rows();
    const int cols = costs.cols();
    const int n = std::max(rows, cols);
    const double big = forbidden_cost(costs, n);

    std::vector<std::vector<double>> a(n, std::vector<double>(n, big));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (costs.at(r, c) <= gate) a[r][c] = costs.at(r, c);

    const std::vector<int> match = solve_square(a, n);

    std::vector<std::pair<int, int>> result;
    for (int c = 0; c < cols; ++c) {
        const int r = match[c];
        if (r < rows && costs.at(r, c) <= gate) result.emplace_back(r, c);
    }
    std::sort(result.begin(), result.end());
    return result;
}

std::vector<std::pair<int, int>> assign_greedy(const CostMatrix& costs, double gate) {
    std::vector<std::tuple<double, int, int>> candidates;
    for (int r = 0; r < costs.rows(); ++r)
        for (int c = 0; c < costs.cols(); ++c)
            if (costs.at(r, c) <= gate) candidates.emplace_back(costs.at(r, c), r, c);
    std::sort(candidates.begin(), candidates.end());

    std::vector<char> row_used(costs.rows(), 0), col_used(costs.cols(), 0);
    std::vector<std::pair<int, int>> result;
    for (const auto& [cost, r, c] : candidates) {
        (void)cost;
        if (row_used[r] || col_used[c]) continue;
        row_used[r] = 1;
        col_used[c] = 1;
        result.emplace_back(r, c);
    }
    std::sort(result.begin(), result.end());
    return result;
}

} // namespace

std::vector<std::pair<int, int>> assign(const CostMatrix& costs, double gate,
                                        AssignStrategy strategy) {
    if (costs.rows() == 0 || costs.cols() == 0) return {};
    return strategy == AssignStrategy::hungarian ? assign_hungarian(costs, gate)
                                                 : assign_greedy(costs, gate);
}

} // namespace keytrack
