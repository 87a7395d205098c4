#pragma once

#include "crowdtrack/geometry.hpp"

#include <Eigen/Core>

#include <map>
#include <span>
#include <vector>

namespace crowdtrack {

/// Lower/upper clamp applied to every probability before taking logs.
inline constexpr double kProbabilityEps = 1e-7;
/// IoU floor inside -ln(IoU) regression costs.
inline constexpr double kIouFloor = 1e-8;

/// One anchor-free prediction: a grid cell of a feature level regressing a
/// head box and a body box.
struct GridPrediction {
    int grid_x = 0;
    int grid_y = 0;
    int stride = 8;
    Box pred_head;
    Box pred_body;
    double cls_prob = 0.5;
    double obj_prob = 0.5;

    double center_x() const { return (grid_x + 0.5) * stride; }
    double center_y() const { return (grid_y + 0.5) * stride; }
};

/// A ground-truth person: head and body annotation sharing an id.
struct GtPair {
    int id = 0;
    Box head;
    Box body;
};

struct SimotaConfig {
    double lambda1 = 3.0;      ///< head regression weight in the cost
    double lambda2 = 3.0;      ///< body regression weight in the cost
    double center_radius = 2.5; ///< half-side of the center square, in strides
    int topq = 10;             ///< IoU pool size for dynamic k

    void validate() const;
};

struct AssignmentOutcome {
    /// grid index -> GtPair id of the ground truth it is positive for.
    std::map<std::size_t, int> positives;
    /// cost(g, p) for every ground truth g and prediction p.
    Eigen::MatrixXd costs;
    /// candidate(g, p): p lies in g's head box or center square.
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> candidates;
    /// Dynamic k per ground truth (0 when it has no candidates).
    std::vector<int> dynamic_k;
    /// Ids of ground truths that had candidates but lost every selected grid
    /// to lower-cost ground truths.
    std::vector<int> starved_gts;
};

/// Candidate mask for one ground truth: the grid center lies strictly inside
/// the head box, or strictly within center_radius * stride of the head center
/// along both axes.
std::vector<bool> candidate_grids(std::span<const GridPrediction> grids, const GtPair& gt,
                                  const SimotaConfig& cfg);

/// Joint matching cost: BCE(cls*obj, 1) + lambda1 * -ln IoU(head) +
/// lambda2 * -ln IoU(body).
double pair_cost(const GtPair& gt, const GridPrediction& pred, const SimotaConfig& cfg);

/// max(1, floor(sum of the topq largest IoUs)), capped at the candidate count.
int dynamic_k(std::span<const double> head_ious, int topq);

AssignmentOutcome assign(std::span<const GtPair> gts, std::span<const GridPrediction> grids,
                         const SimotaConfig& cfg);

struct LossBreakdown {
    double cls = 0.0;
    double obj = 0.0;
    double head = 0.0;
    double body = 0.0;
    double l1 = 0.0;
    double total = 0.0;
};

/// Training objective over an assignment. `alpha1`/`alpha2` weight the head
/// and body (1 - IoU) terms; `use_l1` adds the mean absolute box-parameter
/// error over positives with unit weight.
LossBreakdown compute_loss(const AssignmentOutcome& outcome, std::span<const GtPair> gts,
                           std::span<const GridPrediction> grids, double alpha1 = 5.0,
                           double alpha2 = 5.0, bool use_l1 = false);

} // namespace crowdtrack
