#pragma once

#include "crowdtrack/fusion.hpp"
#include "crowdtrack/kalman.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace crowdtrack {

enum class TrackStatus { tracked, lost, removed };

struct Track {
    int id = 0;
    KalmanState state;
    TrackStatus status = TrackStatus::tracked;
    double score = 0.0;
    int last_update_frame = 0;
    int start_frame = 0;
    /// Posterior box for every frame the track was updated.
    std::vector<std::pair<int, Box>> history;

    int frames_since_update(int frame) const { return frame - last_update_frame; }
};

struct TrackerConfig {
    /// Score split between first and second class detections.
    double high_score_threshold = 0.6;
    /// Minimum IoU for the first (high score) association.
    double association_iou_gate_first = 0.3;
    /// Minimum IoU for the second (low score) association.
    double association_iou_gate_second = 0.5;
    double new_track_min_score = 0.7;
    int max_lost_frames = 30;

    void validate() const;
};

/// One tracked box reported for a frame.
struct TrackOutput {
    int id = 0;
    Box box;
    double score = 0.0;
};

/// A complete identity trajectory.
struct Tracklet {
    int id = 0;
    std::vector<std::pair<int, Box>> boxes;
};

/// Online two-stage association tracker. Not thread-safe; use one instance
/// per sequence.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg = {}, MotionParams motion = {});

    /// Process one frame. `frame_index` must increase strictly between calls
    /// (UsageError otherwise). Returns the tracks confirmed at this frame,
    /// ordered by id.
    std::vector<TrackOutput> step(int frame_index, std::span<const FusedDetection> dets);

    /// Every track ever created, removed ones included, in creation order.
    const std::vector<Track>& tracks() const { return tracks_; }

    std::vector<Tracklet> tracklets() const;

private:
    TrackerConfig cfg_;
    KalmanFilter filter_;
    std::vector<Track> tracks_;
    int next_id_ = 1;
    std::optional<int> last_frame_;

    void start_track(int frame_index, const FusedDetection& det);
    void apply_update(Track& track, int frame_index, const FusedDetection& det);
};

/// Run a fresh tracker over frames numbered 1..frames.size().
std::vector<Tracklet> run_sequence(std::span<const std::vector<FusedDetection>> frames,
                                   const TrackerConfig& cfg, const MotionParams& motion = {});

} // namespace crowdtrack
