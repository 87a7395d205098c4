#include "crowdtrack/fusion.hpp"

#include "crowdtrack/assignment.hpp"
#include "crowdtrack/error.hpp"

#include <algorithm>

namespace crowdtrack {

namespace {

Tier tier_for(double score, double threshold)
{
    return score >= threshold ? Tier::high : Tier::low;
}

} // namespace

std::string_view to_string(Provenance p)
{
    switch (p) {
    case Provenance::matched:
        return "matched";
    case Provenance::head_only:
        return "head_only";
    case Provenance::body_only:
        return "body_only";
    }
    return "unknown";
}

void FusionConfig::validate() const
{
    if (!(match_iou_gate > 0.0 && match_iou_gate < 1.0)) {
        throw InputError("FusionConfig: match_iou_gate must lie in (0, 1)");
    }
    if (!(high_score_threshold > 0.0 && high_score_threshold < 1.0)) {
        throw InputError("FusionConfig: high_score_threshold must lie in (0, 1)");
    }
}

std::vector<FusedDetection> fuse_frame(std::span<const JointDetection> joint,
                                       std::span<const BodyDetection> body,
                                       const FusionConfig& cfg)
{
    cfg.validate();

    std::vector<Box> joint_bodies;
    joint_bodies.reserve(joint.size());
    for (const auto& j : joint) {
        joint_bodies.push_back(j.body);
    }
    std::vector<Box> body_boxes;
    body_boxes.reserve(body.size());
    for (const auto& b : body) {
        body_boxes.push_back(b.body);
    }

    const Eigen::MatrixXd cost = iou_cost_matrix(joint_bodies, body_boxes);
    const AssignmentResult result = match_with_gate(cost, 1.0 - cfg.match_iou_gate);

    std::vector<FusedDetection> out;
    out.reserve(joint.size() + body.size());
    for (const auto& [ji, bi] : result.matches) {
        FusedDetection d;
        d.body = body[bi].body;
        d.head = joint[ji].head;
        d.score = std::max(joint[ji].score, body[bi].score);
        d.provenance = Provenance::matched;
        d.tier = tier_for(d.score, cfg.high_score_threshold);
        out.push_back(d);
    }
    for (std::size_t ji : result.unmatched_rows) {
        FusedDetection d;
        d.body = joint[ji].body;
        d.head = joint[ji].head;
        d.score = joint[ji].score;
        d.provenance = Provenance::head_only;
        d.tier = tier_for(d.score, cfg.high_score_threshold);
        out.push_back(d);
    }
    for (std::size_t bi : result.unmatched_cols) {
        FusedDetection d;
        d.body = body[bi].body;
        d.score = body[bi].score;
        d.provenance = Provenance::body_only;
        d.tier = tier_for(d.score, cfg.high_score_threshold);
        out.push_back(d);
    }
    return out;
}

std::vector<FusedDetection> body_only_frame(std::span<const BodyDetection> body,
                                            double high_score_threshold)
{
    std::vector<FusedDetection> out;
    out.reserve(body.size());
    for (const auto& b : body) {
        FusedDetection d;
        d.body = b.body;
        d.score = b.score;
        d.provenance = Provenance::body_only;
        d.tier = tier_for(d.score, high_score_threshold);
        out.push_back(d);
    }
    return out;
}

ScorePartition partition_by_score(std::span<const FusedDetection> dets, double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw InputError("partition_by_score: threshold must lie in (0, 1)");
    }
    ScorePartition parts;
    for (const auto& d : dets) {
        if (d.provenance == Provenance::matched || d.score >= threshold) {
            parts.high.push_back(d);
        } else {
            parts.low.push_back(d);
        }
    }
    return parts;
}

} // namespace crowdtrack
