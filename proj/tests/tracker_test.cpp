#include "crowdtrack/tracker.hpp"

#include "crowdtrack/error.hpp"
#include "crowdtrack/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace crowdtrack {
namespace {

FusedDetection det(const Box& body, double score, Provenance p = Provenance::body_only)
{
    FusedDetection d;
    d.body = body;
    d.score = score;
    d.provenance = p;
    d.tier = score >= 0.6 ? Tier::high : Tier::low;
    if (p != Provenance::body_only) {
        d.head = Box{body.left + body.width / 4, body.top, body.width / 2, body.height / 6};
    }
    return d;
}

TEST(Tracker, FirstHighDetectionStartsTrackOne)
{
    Tracker tracker;
    const std::vector<FusedDetection> dets{det({10, 10, 40, 100}, 0.9)};
    const auto out = tracker.step(1, dets);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].id, 1);
}

TEST(Tracker, StationaryBoxKeepsItsId)
{
    Tracker tracker;
    const std::vector<FusedDetection> dets{det({10, 10, 40, 100}, 0.9)};
    for (int f = 1; f <= 3; ++f) {
        const auto out = tracker.step(f, dets);
        ASSERT_EQ(out.size(), 1u);
        EXPECT_EQ(out[0].id, 1);
    }
    EXPECT_EQ(tracker.tracks().size(), 1u);
}

TEST(Tracker, LowScoreFrameIsBridgedBySecondAssociation)
{
    Tracker tracker;
    const Box b{10, 10, 40, 100};
    const double scores[] = {0.9, 0.3, 0.9};
    for (int f = 1; f <= 3; ++f) {
        const std::vector<FusedDetection> dets{det(b, scores[f - 1])};
        const auto out = tracker.step(f, dets);
        ASSERT_EQ(out.size(), 1u) << "frame " << f;
        EXPECT_EQ(out[0].id, 1);
    }
    ASSERT_EQ(tracker.tracklets().size(), 1u);
    EXPECT_EQ(tracker.tracklets()[0].boxes.size(), 3u);
}

TEST(Tracker, LowScoreDetectionsNeverStartTracks)
{
    Tracker tracker;
    const std::vector<FusedDetection> dets{det({10, 10, 40, 100}, 0.3)};
    EXPECT_TRUE(tracker.step(1, dets).empty());
    EXPECT_TRUE(tracker.tracks().empty());
}

TEST(Tracker, HighButBelowNewTrackScoreDoesNotStartTrack)
{
    Tracker tracker;
    const std::vector<FusedDetection> dets{det({10, 10, 40, 100}, 0.65)};
    EXPECT_TRUE(tracker.step(1, dets).empty());
}

TEST(Tracker, MatchedLowScoreDetectionIsFirstClass)
{
    Tracker tracker;
    const Box b{10, 10, 40, 100};
    const std::vector<FusedDetection> first{det(b, 0.9, Provenance::matched)};
    tracker.step(1, first);
    tracker.step(2, {});
    // Track is lost now; a matched detection still reaches it through the first stage.
    const std::vector<FusedDetection> again{det(b, 0.3, Provenance::matched)};
    const auto out = tracker.step(3, again);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].id, 1);
}

TEST(Tracker, LostTracksIgnoreLowScoreDetections)
{
    Tracker tracker;
    const Box b{10, 10, 40, 100};
    const std::vector<FusedDetection> high{det(b, 0.9)};
    const std::vector<FusedDetection> low{det(b, 0.3)};
    tracker.step(1, high);
    tracker.step(2, {});
    EXPECT_TRUE(tracker.step(3, low).empty());
    EXPECT_EQ(tracker.tracks()[0].status, TrackStatus::lost);
    const auto out = tracker.step(4, high);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].id, 1);
}

TEST(Tracker, LostTrackIsRemovedAfterMaxLostFrames)
{
    TrackerConfig cfg;
    cfg.max_lost_frames = 2;
    Tracker tracker(cfg);
    const std::vector<FusedDetection> dets{det({10, 10, 40, 100}, 0.9)};
    tracker.step(1, dets);
    tracker.step(2, {});
    tracker.step(3, {});
    EXPECT_EQ(tracker.tracks()[0].status, TrackStatus::lost);
    tracker.step(4, {});
    EXPECT_EQ(tracker.tracks()[0].status, TrackStatus::removed);
    const auto out = tracker.step(5, dets);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].id, 2);
}

TEST(Tracker, RejectsNonIncreasingFrames)
{
    Tracker tracker;
    tracker.step(5, {});
    EXPECT_THROW(tracker.step(5, {}), UsageError);
    EXPECT_THROW(tracker.step(3, {}), UsageError);
}

TEST(Tracker, IdsIncreaseAndAreUniquePerFrame)
{
    Tracker tracker;
    std::set<int> seen;
    int last_new = 0;
    for (int f = 1; f <= 20; ++f) {
        std::vector<FusedDetection> dets;
        for (int k = 0; k < (f % 4) + 1; ++k) {
            dets.push_back(det({10.0 + 80 * k + (f % 3) * 30, 10, 40, 100}, 0.9));
        }
        const auto out = tracker.step(f, dets);
        std::set<int> here;
        for (const auto& o : out) {
            EXPECT_TRUE(here.insert(o.id).second);
            if (!seen.count(o.id)) {
                EXPECT_GT(o.id, last_new);
                last_new = o.id;
                seen.insert(o.id);
            }
        }
    }
    for (std::size_t i = 1; i < tracker.tracks().size(); ++i) {
        EXPECT_GT(tracker.tracks()[i].id, tracker.tracks()[i - 1].id);
    }
}

TEST(RunSequence, EmptySequence)
{
    EXPECT_TRUE(run_sequence({}, {}).empty());
}

TEST(RunSequence, TwoDisjointStationaryBoxes)
{
    const std::vector<FusedDetection> frame{det({10, 10, 40, 100}, 0.9), det({300, 10, 40, 100}, 0.8)};
    const std::vector<std::vector<FusedDetection>> frames(10, frame);
    const auto tracklets = run_sequence(frames, {});
    ASSERT_EQ(tracklets.size(), 2u);
    for (const auto& t : tracklets) {
        EXPECT_EQ(t.boxes.size(), 10u);
        EXPECT_EQ(t.boxes.front().first, 1);
        EXPECT_EQ(t.boxes.back().first, 10);
    }
}

IdFrames as_id_frames(const std::vector<Tracklet>& tracklets)
{
    IdFrames out;
    for (const auto& t : tracklets) {
        for (const auto& [f, b] : t.boxes) {
            out[f].push_back({t.id, b});
        }
    }
    return out;
}

TEST(RunSequence, PerfectDetectionsGivePerfectMota)
{
    // Three pedestrians walking on separate lanes.
    IdFrames gt;
    std::vector<std::vector<FusedDetection>> frames;
    for (int f = 1; f <= 60; ++f) {
        std::vector<FusedDetection> dets;
        for (int k = 0; k < 3; ++k) {
            const Box b{20.0 + 1.5 * f, 10.0 + 150.0 * k + 0.5 * f * (k - 1), 40, 110};
            gt[f].push_back({k + 1, b});
            dets.push_back(det(b, 0.95));
        }
        frames.push_back(dets);
    }
    const auto report = evaluate_tracking(gt, as_id_frames(run_sequence(frames, {})));
    EXPECT_EQ(report.mota, 1.0);
    EXPECT_EQ(report.idsw, 0);
    EXPECT_EQ(report.idf1, 1.0);
}

TEST(RunSequence, IdentitySurvivesShortFullOcclusion)
{
    // Constant-velocity walker hidden for frames 20-22.
    std::vector<std::vector<FusedDetection>> frames;
    IdFrames gt;
    for (int f = 1; f <= 40; ++f) {
        const Box b{30.0 + 2.0 * f, 50.0 + 0.5 * f, 45, 120};
        gt[f].push_back({1, b});
        if (f >= 20 && f <= 22) {
            frames.emplace_back();
        } else {
            frames.push_back({det(b, 0.9)});
        }
    }
    const auto tracklets = run_sequence(frames, {});
    ASSERT_EQ(tracklets.size(), 1u);
    EXPECT_EQ(tracklets[0].boxes.size(), 37u);
    EXPECT_EQ(clear_mot(gt, as_id_frames(tracklets)).idsw, 0);
}

TEST(TrackerConfig, Validation)
{
    TrackerConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.association_iou_gate_first = 0.0;
    EXPECT_THROW(cfg.validate(), std::exception);
    cfg = {};
    cfg.max_lost_frames = -1;
    EXPECT_THROW(cfg.validate(), std::exception);
}

} // namespace
} // namespace crowdtrack
