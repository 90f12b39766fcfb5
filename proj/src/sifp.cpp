#include "keytrack/sifp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "keytrack/errors.hpp"

namespace keytrack {

bool rescaled_valid(const Box& b, double omega, const SifpConfig& cfg) {
    const double s = omega * object_scale(b);
    return s >= cfg.s_lower && s <= cfg.s_upper;
}

int assign_fpn_level(double s, const SifpConfig& cfg) {
    if (s <= 0.0) return 1;
    const double log_s = std::log2(s);
    int best = 1;
    double best_gap = std::abs(log_s - 0.5 * std::log2(cfg.fpn_areas[0]));
    for (int i = 1; i < static_cast<int>(cfg.fpn_areas.size()); ++i) {
        const double gap = std::abs(log_s - 0.5 * std::log2(cfg.fpn_areas[i]));
        if (gap < best_gap) { // strict: ties stay with the lower level
            best_gap = gap;
            best = i + 1;
        }
    }
    return best;
}

namespace {

Box scale_box(const Box& b, double omega) {
    return {b.x_min * omega, b.y_min * omega, b.x_max * omega, b.y_max * omega};
}

bool contains(const Box& outer, const Box& inner) {
    return inner.x_min >= outer.x_min && inner.y_min >= outer.y_min &&
           inner.x_max <= outer.x_max && inner.y_max <= outer.y_max;
}

bool intersects(const Box& a, const Box& b) {
    return std::min(a.x_max, b.x_max) > std::max(a.x_min, b.x_min) &&
           std::min(a.y_max, b.y_max) > std::max(a.y_min, b.y_min);
}

// Chip top-left interval that keeps `target` fully covered while the chip
// stays inside the scaled image. Non-empty whenever the target fits.
std::pair<double, double> cover_interval(double t_min, double t_max, double chip_side,
                                         double image_side) {
    return {std::max(0.0, t_max - chip_side), std::min(t_min, image_side - chip_side)};
}

} // namespace

SifpPlan plan(double image_w, double image_h, const std::vector<Box>& objects,
              const SifpConfig& cfg) {
    SifpPlan out;
    out.image_w = image_w;
    out.image_h = image_h;
    const int n = static_cast<int>(objects.size());

    for (const double omega : cfg.omegas) {
        SifpLevelPlan level;
        level.omega = omega;
        level.fpn_level.assign(n, 0);

        std::vector<Box> scaled(n);
        std::vector<char> valid(n, 0);
        for (int i = 0; i < n; ++i) {
            scaled[i] = scale_box(objects[i], omega);
            valid[i] = rescaled_valid(objects[i], omega, cfg) ? 1 : 0;
            if (valid[i])
                level.fpn_level[i] = assign_fpn_level(omega * object_scale(objects[i]), cfg);
        }

        const double sw = image_w * omega;
        const double sh = image_h * omega;

        if (omega <= 1.0) {
            // Low-resolution level: the whole scaled image padded back to
            // the original size is one chip.
            SifpChip chip;
            chip.rect = {0.0, 0.0, image_w, image_h};
            for (int i = 0; i < n; ++i)
                (valid[i] ? chip.included : chip.excluded).push_back(i);
            level.chips.push_back(std::move(chip));
            out.levels.push_back(std::move(level));
            continue;
        }

        for (int i = 0; i < n; ++i) {
            if (!valid[i]) continue;
            if (scaled[i].width() > image_w || scaled[i].height() > image_h) {
                throw PlanError("sifp: object " + std::to_string(i) + " (" +
                                std::to_string(scaled[i].width()) + "x" +
                                std::to_string(scaled[i].height()) + " at omega " +
                                std::to_string(omega) + ") exceeds the chip size " +
                                std::to_string(image_w) + "x" + std::to_string(image_h));
            }
        }

        // Greedy cover: seed each chip on the valid object whose centered
        // window would pick up the most uncovered neighbours, then clamp
        // the window so the seed stays fully inside.
        std::vector<char> covered(n, 0);
        while (true) {
            int seed = -1;
            int seed_score = -1;
            for (int i = 0; i < n; ++i) {
                if (!valid[i] || covered[i]) continue;
                const double cx = 0.5 * (scaled[i].x_min + scaled[i].x_max);
                const double cy = 0.5 * (scaled[i].y_min + scaled[i].y_max);
                Box window{cx - image_w / 2, cy - image_h / 2, cx + image_w / 2,
                           cy + image_h / 2};
                int score = 0;
                for (int j = 0; j < n; ++j) {
                    if (!valid[j] || covered[j]) continue;
                    const double jx = 0.5 * (scaled[j].x_min + scaled[j].x_max);
                    const double jy = 0.5 * (scaled[j].y_min + scaled[j].y_max);
                    if (jx >= window.x_min && jx <= window.x_max && jy >= window.y_min &&
                        jy <= window.y_max)
                        ++score;
                }
                if (score > seed_score) {
                    seed_score = score;
                    seed = i;
                }
            }
            if (seed < 0) break;

            const double cx = 0.5 * (scaled[seed].x_min + scaled[seed].x_max);
            const double cy = 0.5 * (scaled[seed].y_min + scaled[seed].y_max);
            const auto [x_lo, x_hi] =
                cover_interval(scaled[seed].x_min, scaled[seed].x_max, image_w, sw);
            const auto [y_lo, y_hi] =
                cover_interval(scaled[seed].y_min, scaled[seed].y_max, image_h, sh);
            const double tx = std::clamp(cx - image_w / 2, x_lo, x_hi);
            const double ty = std::clamp(cy - image_h / 2, y_lo, y_hi);

            SifpChip chip;
            chip.rect = {tx, ty, tx + image_w, ty + image_h};
            for (int j = 0; j < n; ++j) {
                if (valid[j] && contains(chip.rect, scaled[j])) {
                    chip.included.push_back(j);
                    covered[j] = 1;
                } else if (intersects(chip.rect, scaled[j])) {
                    chip.excluded.push_back(j);
                }
            }
            level.chips.push_back(std::move(chip));
        }

        out.levels.push_back(std::move(level));
    }
    return out;
}

} // namespace keytrack
