#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "keytrack/geometry.hpp"
#include "keytrack/rng.hpp"

using namespace keytrack;

namespace {

// Independent IoU oracle: count 0.01 px cells row by row on integer-coordinate
// boxes. Discrete summation instead of the closed-form product.
double raster_iou(const Box& a, const Box& b) {
    const auto cells = [](double lo, double hi) {
        return static_cast<std::int64_t>(std::llround((hi - lo) * 100.0));
    };
    const std::int64_t ay0 = std::llround(a.y_min * 100.0), ay1 = std::llround(a.y_max * 100.0);
    const std::int64_t by0 = std::llround(b.y_min * 100.0), by1 = std::llround(b.y_max * 100.0);
    const std::int64_t ax0 = std::llround(a.x_min * 100.0), ax1 = std::llround(a.x_max * 100.0);
    const std::int64_t bx0 = std::llround(b.x_min * 100.0), bx1 = std::llround(b.x_max * 100.0);

    std::int64_t inter = 0;
    const std::int64_t y_lo = std::max(ay0, by0), y_hi = std::min(ay1, by1);
    for (std::int64_t row = y_lo; row < y_hi; ++row) {
        const std::int64_t x_lo = std::max(ax0, bx0), x_hi = std::min(ax1, bx1);
        if (x_hi > x_lo) inter += x_hi - x_lo;
    }
    const std::int64_t area_a = cells(a.x_min, a.x_max) * cells(a.y_min, a.y_max);
    const std::int64_t area_b = cells(b.x_min, b.x_max) * cells(b.y_min, b.y_max);
    const std::int64_t uni = area_a + area_b - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

Box random_int_box(Rng& rng, double span) {
    const double x0 = std::floor(rng.uniform(0.0, span));
    const double y0 = std::floor(rng.uniform(0.0, span));
    const double w = std::floor(rng.uniform(0.0, span / 2));
    const double h = std::floor(rng.uniform(0.0, span / 2));
    return {x0, y0, x0 + w, y0 + h};
}

} // namespace

TEST_CASE("iou identity and disjoint cases") {
    const Box a{0, 0, 10, 10};
    CHECK(iou(a, a) == doctest::Approx(1.0));
    CHECK(iou(a, Box{20, 20, 30, 30}) == doctest::Approx(0.0));
}

TEST_CASE("iou of half-overlapping boxes matches the rasterization oracle") {
    const Box a{0, 0, 10, 10};
    const Box b{5, 0, 15, 10};
    const double expected = raster_iou(a, b);
    CHECK(iou(a, b) == doctest::Approx(expected).epsilon(1e-3));
    CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("degenerate boxes contribute zero without being dropped") {
    const Box point{5, 5, 5, 5};
    CHECK(iou(point, point) == 0.0);
    CHECK(iou(point, Box{0, 0, 10, 10}) == 0.0);
}

TEST_CASE("iou agrees with the rasterization oracle on random integer boxes") {
    Rng rng(0x5eedu);
    for (int i = 0; i < 1000; ++i) {
        const Box a = random_int_box(rng, 60.0);
        const Box b = random_int_box(rng, 60.0);
        CHECK(std::abs(iou(a, b) - raster_iou(a, b)) <= 1e-3);
    }
}

TEST_CASE("iou is symmetric and 1 on self for non-degenerate boxes") {
    Rng rng(0xabcdu);
    for (int i = 0; i < 10000; ++i) {
        Box a{rng.uniform(0, 100), rng.uniform(0, 100), 0, 0};
        a.x_max = a.x_min + rng.uniform(0, 50);
        a.y_max = a.y_min + rng.uniform(0, 50);
        Box b{rng.uniform(0, 100), rng.uniform(0, 100), 0, 0};
        b.x_max = b.x_min + rng.uniform(0, 50);
        b.y_max = b.y_min + rng.uniform(0, 50);
        CHECK(iou(a, b) == iou(b, a));
        if (a.area() > 0.0) CHECK(iou(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("object_scale on squares, degenerate and rectangular boxes") {
    CHECK(object_scale(Box{0, 0, 16, 16}) == doctest::Approx(16.0));
    CHECK(object_scale(Box{0, 0, 0, 0}) == 0.0);
    CHECK(object_scale(Box{0, 0, 8, 32}) == doctest::Approx(16.0));
}

TEST_CASE("object_scale is linear in uniform scaling") {
    Rng rng(0x11u);
    for (int i = 0; i < 1000; ++i) {
        Box b{rng.uniform(0, 100), rng.uniform(0, 100), 0, 0};
        b.x_max = b.x_min + rng.uniform(0, 80);
        b.y_max = b.y_min + rng.uniform(0, 80);
        const double w = rng.uniform(0.1, 4.0);
        const Box scaled{b.x_min * w, b.y_min * w, b.x_max * w, b.y_max * w};
        CHECK(object_scale(scaled) ==
              doctest::Approx(w * object_scale(b)).epsilon(1e-9));
    }
}
