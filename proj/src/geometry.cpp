#include "crowdtrack/geometry.hpp"

#include "crowdtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crowdtrack {

bool Box::valid() const
{
    return std::isfinite(left) && std::isfinite(top) && std::isfinite(width) &&
           std::isfinite(height) && width > 0.0 && height > 0.0;
}

double intersection_area(const Box& a, const Box& b)
{
    const double w = std::min(a.right(), b.right()) - std::max(a.left, b.left);
    const double h = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
    if (w <= 0.0 || h <= 0.0) {
        return 0.0;
    }
    return w * h;
}

double iou(const Box& a, const Box& b)
{
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) {
        return 0.0;
    }
    // Corner-form areas so that iou(a, a) is exactly 1.
    const double area_a = (a.right() - a.left) * (a.bottom() - a.top);
    const double area_b = (b.right() - b.left) * (b.bottom() - b.top);
    const double uni = area_a + area_b - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double containment(const Box& inner, const Box& outer)
{
    const double area = inner.area();
    if (area <= 0.0) {
        return 0.0;
    }
    return std::clamp(intersection_area(inner, outer) / area, 0.0, 1.0);
}

std::vector<std::size_t> nms(std::span<const ScoredBox> dets, double iou_threshold)
{
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw InputError("nms: iou_threshold must lie in (0, 1]");
    }
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });

    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
            return iou(dets[idx].box, dets[k].box) > iou_threshold;
        });
        if (!suppressed) {
            kept.push_back(idx);
        }
    }
    return kept;
}

Eigen::MatrixXd iou_cost_matrix(std::span<const Box> rows, std::span<const Box> cols)
{
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                1.0 - iou(rows[i], cols[j]);
        }
    }
    return cost;
}

} // namespace crowdtrack
