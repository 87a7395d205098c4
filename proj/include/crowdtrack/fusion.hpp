#pragma once

#include "crowdtrack/geometry.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace crowdtrack {

/// Output of the joint head-body detector: one head with its body.
struct JointDetection {
    Box head;
    Box body;
    double score = 0.0;
};

/// Output of the supplementary body-only detector.
struct BodyDetection {
    Box body;
    double score = 0.0;
};

enum class Provenance { matched, head_only, body_only };
enum class Tier { high, low };

std::string_view to_string(Provenance p);

struct FusedDetection {
    Box body;
    std::optional<Box> head;
    double score = 0.0;
    Provenance provenance = Provenance::body_only;
    Tier tier = Tier::low;
};

struct FusionConfig {
    /// Minimum body IoU for a joint/body pair to be merged.
    double match_iou_gate = 0.5;
    double high_score_threshold = 0.6;

    void validate() const;
};

/// Merge one frame of joint and body detections.
///
/// Pairs are found by Hungarian matching on 1 - IoU between body boxes and
/// kept when IoU >= match_iou_gate. A matched pair keeps the body detector's
/// box, the joint detector's head and the larger of the two scores. Output
/// order: matched (by joint index), head-only, body-only.
std::vector<FusedDetection> fuse_frame(std::span<const JointDetection> joint,
                                       std::span<const BodyDetection> body,
                                       const FusionConfig& cfg);

/// Wrap body-only detections (single-detector pipelines) as fused detections.
std::vector<FusedDetection> body_only_frame(std::span<const BodyDetection> body,
                                            double high_score_threshold);

struct ScorePartition {
    std::vector<FusedDetection> high;
    std::vector<FusedDetection> low;
};

/// Matched detections are always first class; the rest go high iff
/// score >= threshold.
ScorePartition partition_by_score(std::span<const FusedDetection> dets, double threshold);

} // namespace crowdtrack
