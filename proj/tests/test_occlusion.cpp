#include <doctest.h>

#include <algorithm>
#include <limits>

#include "keytrack/occlusion.hpp"
#include "keytrack/rng.hpp"

using namespace keytrack;

namespace {

Pose pose_with_confidences(const std::vector<double>& cs) {
    Pose p;
    for (const double c : cs) p.keypoints.push_back(Keypoint{0, 0, c});
    return p;
}

Pose uniform_pose(double c, int n = 15) {
    return pose_with_confidences(std::vector<double>(n, c));
}

} // namespace

TEST_CASE("all-above and all-below confidence extremes") {
    const OcclusionConfig cfg;
    CHECK(count_valid_keypoints(uniform_pose(1.0), cfg) == 15);
    CHECK(count_valid_keypoints(uniform_pose(0.0), cfg) == 0);
}

TEST_CASE("count matches an independent linear scan on random confidences") {
    const OcclusionConfig cfg;
    Rng rng(0x0cc1u);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> cs(15);
        for (double& c : cs) c = rng.uniform();
        int expected = 0;
        for (const double c : cs)
            if (c > cfg.gamma_valid) ++expected;
        CHECK(count_valid_keypoints(pose_with_confidences(cs), cfg) == expected);
    }
}

TEST_CASE("gate thresholds are strict on both sides") {
    const OcclusionConfig cfg; // gamma 0.2, theta 10
    CHECK(reid_is_valid(uniform_pose(1.0), cfg));        // count 15 > 10
    CHECK_FALSE(reid_is_valid(uniform_pose(0.0), cfg));  // count 0

    // Exactly theta_valid visible keypoints is still invalid.
    std::vector<double> cs(15, 0.0);
    std::fill(cs.begin(), cs.begin() + 10, 0.9);
    CHECK(count_valid_keypoints(pose_with_confidences(cs), cfg) == 10);
    CHECK_FALSE(reid_is_valid(pose_with_confidences(cs), cfg));

    // Confidence exactly at gamma_valid does not count.
    CHECK(count_valid_keypoints(uniform_pose(0.2), cfg) == 0);
}

TEST_CASE("non-finite confidences read as invisible") {
    const OcclusionConfig cfg;
    std::vector<double> cs(15, 0.9);
    cs[0] = std::numeric_limits<double>::quiet_NaN();
    cs[1] = std::numeric_limits<double>::infinity();
    CHECK(count_valid_keypoints(pose_with_confidences(cs), cfg) == 13);
}

TEST_CASE("raising either threshold never grows the result") {
    Rng rng(0x0cc2u);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> cs(15);
        for (double& c : cs) c = rng.uniform();
        const Pose p = pose_with_confidences(cs);

        OcclusionConfig lo, hi;
        lo.gamma_valid = rng.uniform(0.0, 0.5);
        hi.gamma_valid = lo.gamma_valid + rng.uniform(0.0, 0.5);
        CHECK(count_valid_keypoints(p, hi) <= count_valid_keypoints(p, lo));

        OcclusionConfig strict = lo;
        strict.theta_valid = lo.theta_valid + 1 + static_cast<int>(rng.uniform_index(5));
        if (reid_is_valid(p, strict)) CHECK(reid_is_valid(p, lo));
    }
}

TEST_CASE("count is invariant under keypoint permutation") {
    const OcclusionConfig cfg;
    Rng rng(0x0cc3u);
    std::vector<double> cs(15);
    for (double& c : cs) c = rng.uniform();
    const int reference = count_valid_keypoints(pose_with_confidences(cs), cfg);
    for (int trial = 0; trial < 100; ++trial) {
        for (std::size_t i = cs.size(); i > 1; --i)
            std::swap(cs[i - 1], cs[rng.uniform_index(i)]);
        CHECK(count_valid_keypoints(pose_with_confidences(cs), cfg) == reference);
    }
}
