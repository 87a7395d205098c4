#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace crowdtrack {

/// Axis-aligned rectangle in pixel coordinates, stored as in MOT files:
/// top-left corner plus extent.
struct Box {
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;

    double right() const { return left + width; }
    double bottom() const { return top + height; }
    double center_x() const { return left + 0.5 * width; }
    double center_y() const { return top + 0.5 * height; }
    double area() const { return width * height; }

    /// Finite coordinates and strictly positive extent.
    bool valid() const;

    friend bool operator==(const Box&, const Box&) = default;
};

struct ScoredBox {
    Box box;
    double score = 0.0;
};

/// Area shared by two boxes; boxes touching only along an edge share 0.
double intersection_area(const Box& a, const Box& b);

/// Intersection over union, in [0, 1].
double iou(const Box& a, const Box& b);

/// Fraction of `inner` covered by `outer`: area(inner ∩ outer) / area(inner).
double containment(const Box& inner, const Box& outer);

/// Greedy non-maximum suppression.
///
/// Boxes are visited by descending score (equal scores: lower index first).
/// A box is dropped when its IoU with any already kept box is strictly
/// greater than `iou_threshold`. Returns kept indices in visiting order.
std::vector<std::size_t> nms(std::span<const ScoredBox> dets, double iou_threshold);

/// Matrix of 1 - IoU between every row box and every column box.
Eigen::MatrixXd iou_cost_matrix(std::span<const Box> rows, std::span<const Box> cols);

} // namespace crowdtrack
