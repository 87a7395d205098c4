#pragma once

#include "crowdtrack/geometry.hpp"

#include <map>
#include <optional>
#include <vector>

namespace crowdtrack {

struct IdBox {
    int id = 0;
    Box box;
};

/// frame -> identities present in that frame.
using IdFrames = std::map<int, std::vector<IdBox>>;

struct MetricReport {
    double mota = 0.0;
    double idf1 = 0.0;
    long fp = 0;
    long fn = 0;
    long idsw = 0;
    long total_gt = 0;
    long total_pred = 0;
    long matches = 0;
    long idtp = 0;
    long idfp = 0;
    long idfn = 0;
    std::optional<double> ap;
    std::optional<double> mr2;
};

/// CLEAR-MOT counts. Correspondences from earlier frames are kept while
/// their IoU stays >= iou_threshold; the rest are Hungarian-matched on
/// 1 - IoU. MOTA is NaN when the ground truth is empty.
/// Throws InputError on duplicate ids inside one frame.
MetricReport clear_mot(const IdFrames& gt, const IdFrames& pred, double iou_threshold = 0.5);

struct IdentityScore {
    long idtp = 0;
    long idfp = 0;
    long idfn = 0;
    double idf1 = 0.0;
};

/// Identity F1 under the id-to-id mapping that maximizes IDTP. NaN when
/// both sides are empty.
IdentityScore identity_score(const IdFrames& gt, const IdFrames& pred, double iou_threshold = 0.5);

inline double idf1(const IdFrames& gt, const IdFrames& pred, double iou_threshold = 0.5)
{
    return identity_score(gt, pred, iou_threshold).idf1;
}

/// clear_mot and identity_score combined into one report.
MetricReport evaluate_tracking(const IdFrames& gt, const IdFrames& pred, double iou_threshold = 0.5);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double fppi = 0.0;
};

struct DetectionReport {
    double ap = 0.0;
    double mr2 = 1.0;
    /// One point per distinct score, descending.
    std::vector<PrPoint> pr_curve;
};

/// Floor applied to miss rates before the log-average.
inline constexpr double kMissRateFloor = 1e-10;

/// Average precision (all-point interpolation) and log-average miss rate
/// over nine FPPI references log-spaced in [1e-2, 1]. Detections are matched
/// greedily per frame in descending score order; every ground truth can be
/// claimed once. Throws InputError when there is no ground truth.
DetectionReport detection_eval(const std::map<int, std::vector<Box>>& gt,
                               const std::map<int, std::vector<ScoredBox>>& dets,
                               double iou_threshold = 0.5);

} // namespace crowdtrack
