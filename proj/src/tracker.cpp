#include "crowdtrack/tracker.hpp"

#include "crowdtrack/assignment.hpp"
#include "crowdtrack/error.hpp"

#include <algorithm>
#include <string>

namespace crowdtrack {

namespace {

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

// 1 - IoU between each track's predicted box and each detection body.
// Tracks whose state no longer describes a valid box cost 1 everywhere.
Eigen::MatrixXd association_cost(const std::vector<Track*>& pool,
                                 const std::vector<const FusedDetection*>& dets)
{
    Eigen::MatrixXd cost = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(pool.size()),
                                                 static_cast<Eigen::Index>(dets.size()));
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto predicted = try_project_to_box(pool[i]->state);
        if (!predicted) {
            continue;
        }
        for (std::size_t j = 0; j < dets.size(); ++j) {
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                1.0 - iou(*predicted, dets[j]->body);
        }
    }
    return cost;
}

} // namespace

void TrackerConfig::validate() const
{
    if (!in_open_unit(high_score_threshold)) {
        throw InputError("TrackerConfig: high_score_threshold must lie in (0, 1)");
    }
    if (!in_open_unit(association_iou_gate_first) || !in_open_unit(association_iou_gate_second)) {
        throw InputError("TrackerConfig: association gates must lie in (0, 1)");
    }
    if (!in_open_unit(new_track_min_score)) {
        throw InputError("TrackerConfig: new_track_min_score must lie in (0, 1)");
    }
    if (max_lost_frames < 0) {
        throw InputError("TrackerConfig: max_lost_frames must be >= 0");
    }
}

Tracker::Tracker(TrackerConfig cfg, MotionParams motion)
    : cfg_(cfg)
    , filter_(motion)
{
    cfg_.validate();
}

void Tracker::start_track(int frame_index, const FusedDetection& det)
{
    Track t;
    t.id = next_id_++;
    t.state = filter_.initiate(det.body);
    t.status = TrackStatus::tracked;
    t.score = det.score;
    t.last_update_frame = frame_index;
    t.start_frame = frame_index;
    t.history.emplace_back(frame_index, det.body);
    tracks_.push_back(std::move(t));
}

void Tracker::apply_update(Track& track, int frame_index, const FusedDetection& det)
{
    track.state = filter_.update(track.state, det.body);
    track.status = TrackStatus::tracked;
    track.score = det.score;
    track.last_update_frame = frame_index;
    track.history.emplace_back(frame_index, try_project_to_box(track.state).value_or(det.body));
}

std::vector<TrackOutput> Tracker::step(int frame_index, std::span<const FusedDetection> dets)
{
    if (last_frame_ && frame_index <= *last_frame_) {
        throw UsageError("Tracker::step: frame index " + std::to_string(frame_index) +
                         " does not follow " + std::to_string(*last_frame_));
    }
    last_frame_ = frame_index;

    const ScorePartition parts = partition_by_score(dets, cfg_.high_score_threshold);

    // Predict every live track; lost tracks keep their height fixed.
    std::vector<Track*> pool;
    std::vector<char> was_tracked;
    for (auto& t : tracks_) {
        if (t.status == TrackStatus::removed) {
            continue;
        }
        if (t.status != TrackStatus::tracked) {
            t.state.mean(7) = 0.0;
        }
        t.state = filter_.predict(t.state);
        pool.push_back(&t);
        was_tracked.push_back(t.status == TrackStatus::tracked ? 1 : 0);
    }

    // First class association: high tier vs all live tracks.
    std::vector<const FusedDetection*> high;
    for (const auto& d : parts.high) {
        high.push_back(&d);
    }
    const AssignmentResult first =
        match_with_gate(association_cost(pool, high), 1.0 - cfg_.association_iou_gate_first);
    for (const auto& [ti, di] : first.matches) {
        apply_update(*pool[ti], frame_index, *high[di]);
    }

    // Second class association: previously tracked leftovers vs low tier.
    std::vector<Track*> remain;
    for (std::size_t ti : first.unmatched_rows) {
        if (was_tracked[ti]) {
            remain.push_back(pool[ti]);
        }
    }
    std::vector<const FusedDetection*> low;
    for (const auto& d : parts.low) {
        low.push_back(&d);
    }
    const AssignmentResult second =
        match_with_gate(association_cost(remain, low), 1.0 - cfg_.association_iou_gate_second);
    for (const auto& [ti, di] : second.matches) {
        apply_update(*remain[ti], frame_index, *low[di]);
    }

    for (Track* t : pool) {
        if (t->last_update_frame == frame_index) {
            continue;
        }
        t->status = TrackStatus::lost;
        if (t->frames_since_update(frame_index) > cfg_.max_lost_frames) {
            t->status = TrackStatus::removed;
        }
    }

    for (std::size_t di : first.unmatched_cols) {
        if (high[di]->score >= cfg_.new_track_min_score) {
            start_track(frame_index, *high[di]);
        }
    }

    std::vector<TrackOutput> out;
    for (const auto& t : tracks_) {
        if (t.status == TrackStatus::tracked && t.last_update_frame == frame_index) {
            out.push_back({t.id, t.history.back().second, t.score});
        }
    }
    return out;
}

std::vector<Tracklet> Tracker::tracklets() const
{
    std::vector<Tracklet> out;
    out.reserve(tracks_.size());
    for (const auto& t : tracks_) {
        out.push_back({t.id, t.history});
    }
    return out;
}

std::vector<Tracklet> run_sequence(std::span<const std::vector<FusedDetection>> frames,
                                   const TrackerConfig& cfg, const MotionParams& motion)
{
    Tracker tracker(cfg, motion);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        tracker.step(static_cast<int>(i) + 1, frames[i]);
    }
    return tracker.tracklets();
}

} // namespace crowdtrack
