#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace keytrack {

enum class AssignStrategy { hungarian, greedy };

// Dense row-major cost matrix. Rows are tracks, columns are detections in
// the tracking use; callers elsewhere bind their own meanings.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Matches rows to columns among pairs with cost <= gate; no row or column
// is used twice. hungarian maximizes the number of matched pairs, then
// minimizes their total cost. greedy repeatedly takes the globally cheapest
// remaining pair, ties broken by lower row index, then lower column index.
// Pairs are returned sorted by row index.
std::vector<std::pair<int, int>> assign(const CostMatrix& costs, double gate,
                                        AssignStrategy strategy);

} // namespace keytrack
