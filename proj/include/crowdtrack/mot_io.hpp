#pragma once

#include "crowdtrack/fusion.hpp"
#include "crowdtrack/geometry.hpp"
#include "crowdtrack/tracker.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace crowdtrack {

/// One line of a MOTChallenge file:
/// frame,id,left,top,width,height,conf,x,y,z
struct MotRow {
    int frame = 1;
    int id = -1;
    Box box;
    double conf = 1.0;
    std::array<double, 3> extra{-1.0, -1.0, -1.0};
};

/// Rows grouped by frame, file order preserved inside a frame.
using MotFrames = std::map<int, std::vector<MotRow>>;

/// Parse MOT rows. Lines need 7 to 10 comma-separated fields; missing
/// trailing fields default to -1. Blank lines and lines starting with '#'
/// are skipped. Errors name `source` and the 1-based line number.
MotFrames parse_mot(std::istream& in, const std::string& source = "<input>");
MotFrames parse_mot_file(const std::filesystem::path& path);

/// Tracking result text: one row per (track, frame) sorted by frame then
/// id, coordinates with two decimals, conf fixed to 1.
std::string write_mot(std::span<const Tracklet> tracklets);

/// Detection file text (id -1, conf = score).
std::string write_detections(const std::map<int, std::vector<BodyDetection>>& frames);

std::map<int, std::vector<BodyDetection>> to_body_detections(const MotFrames& frames);

/// Joint detection file: frame,id,hl,ht,hw,hh,bl,bt,bw,bh,score.
std::map<int, std::vector<JointDetection>> parse_joint_detections(std::istream& in,
                                                                  const std::string& source = "<input>");
std::map<int, std::vector<JointDetection>> parse_joint_detections_file(const std::filesystem::path& path);
std::string write_joint_detections(const std::map<int, std::vector<JointDetection>>& frames);

/// Fused detections as MOT detection rows; the first trailing field holds
/// the provenance code (0 matched, 1 head only, 2 body only).
std::string write_fused_detections(const std::map<int, std::vector<FusedDetection>>& frames);

/// Inverse of write_fused_detections. Rows whose provenance field is not a
/// known code (plain detection files) are read as body-only.
std::map<int, std::vector<FusedDetection>> to_fused_detections(const MotFrames& frames,
                                                               double high_score_threshold);

/// Ground truth row after head/body label merging.
struct MergedGtRow {
    int frame = 1;
    int id = 0;
    std::optional<Box> head;
    std::optional<Box> body;
};

/// frame,id,hleft,htop,hwidth,hheight,bleft,btop,bwidth,bheight with
/// -1,-1,-1,-1 for an absent box.
std::string write_merged_gt(std::span<const MergedGtRow> rows);
std::vector<MergedGtRow> parse_merged_gt(std::istream& in, const std::string& source = "<input>");
std::vector<MergedGtRow> parse_merged_gt_file(const std::filesystem::path& path);

/// Minimum head-in-body containment for a head label to join a body label.
inline constexpr double kHeadBodyContainmentGate = 0.9;

/// Pair head labels with body labels per frame. Heads are shifted by
/// (dx, dy) first, then matched by Hungarian assignment on
/// 1 - containment(head, body); pairs below the containment gate are split.
/// Matched rows take the body's id; unmatched labels are kept with their own id.
std::vector<MergedGtRow> merge_head_body_labels(const MotFrames& heads, const MotFrames& bodies,
                                                double dx = 0.0, double dy = 0.0);

/// Write `text` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace crowdtrack
