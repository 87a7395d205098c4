#pragma once

#include "crowdtrack/config.hpp"
#include "crowdtrack/fusion.hpp"
#include "crowdtrack/metrics.hpp"
#include "crowdtrack/simota.hpp"
#include "crowdtrack/tracker.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace crowdtrack {

using FusedFrames = std::map<int, std::vector<FusedDetection>>;

std::vector<JointDetection> nms_joint(std::span<const JointDetection> dets, double head_threshold);
std::vector<BodyDetection> nms_body(std::span<const BodyDetection> dets, double body_threshold);

/// Per-frame fusion over the union of frames, with NMS on both detectors
/// first when cfg.nms_enabled.
FusedFrames fuse_sequence(const std::map<int, std::vector<JointDetection>>& joint,
                          const std::map<int, std::vector<BodyDetection>>& body, const RunConfig& cfg);

/// Track frames 1..last frame present; frames without detections still
/// advance the tracker.
std::vector<Tracklet> track_sequence(const FusedFrames& frames, const RunConfig& cfg);

IdFrames to_id_frames(std::span<const Tracklet> tracklets);

struct BenchReport {
    std::uint64_t seed = 0;
    int agents = 0;
    int frames = 0;
    MetricReport body_only;
    MetricReport fused;
};

/// Simulate a scene, then track it twice (body detector alone, and fused
/// joint + body detections) against the same ground truth.
BenchReport run_bench(const RunConfig& cfg, std::uint64_t seed);

/// Synthetic anchor-free predictions for a grid_w x grid_h feature map.
/// Each cell regresses a jittered copy of the nearest ground truth (by head
/// center); jitter grows and confidence shrinks with distance.
std::vector<GridPrediction> synthesize_grid_predictions(std::span<const GtPair> gts, int grid_w,
                                                        int grid_h, int stride, std::uint64_t seed);

/// `metric=value` lines followed by a comma-separated table.
std::string format_report(const MetricReport& report, const std::string& name);
std::string format_bench(const BenchReport& report);

} // namespace crowdtrack
