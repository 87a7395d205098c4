#include "crowdtrack/pipeline.hpp"

#include "crowdtrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <set>

namespace crowdtrack {

namespace {

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string table_header()
{
    return "name,mota,idf1,fp,fn,idsw,num_gt,num_pred\n";
}

std::string table_row(const std::string& name, const MetricReport& r)
{
    return name + "," + num(r.mota) + "," + num(r.idf1) + "," + std::to_string(r.fp) + "," +
           std::to_string(r.fn) + "," + std::to_string(r.idsw) + "," + std::to_string(r.total_gt) +
           "," + std::to_string(r.total_pred) + "\n";
}

std::string metric_lines(const std::string& prefix, const MetricReport& r)
{
    std::string out;
    out += prefix + "mota=" + num(r.mota) + "\n";
    out += prefix + "idf1=" + num(r.idf1) + "\n";
    out += prefix + "fp=" + std::to_string(r.fp) + "\n";
    out += prefix + "fn=" + std::to_string(r.fn) + "\n";
    out += prefix + "idsw=" + std::to_string(r.idsw) + "\n";
    out += prefix + "num_gt=" + std::to_string(r.total_gt) + "\n";
    out += prefix + "num_pred=" + std::to_string(r.total_pred) + "\n";
    out += prefix + "idtp=" + std::to_string(r.idtp) + "\n";
    out += prefix + "idfp=" + std::to_string(r.idfp) + "\n";
    out += prefix + "idfn=" + std::to_string(r.idfn) + "\n";
    if (r.ap) {
        out += prefix + "ap=" + num(*r.ap) + "\n";
    }
    if (r.mr2) {
        out += prefix + "mr2=" + num(*r.mr2) + "\n";
    }
    return out;
}

} // namespace

std::vector<JointDetection> nms_joint(std::span<const JointDetection> dets, double head_threshold)
{
    std::vector<ScoredBox> heads;
    heads.reserve(dets.size());
    for (const auto& d : dets) {
        heads.push_back({d.head, d.score});
    }
    std::vector<JointDetection> out;
    for (std::size_t i : nms(heads, head_threshold)) {
        out.push_back(dets[i]);
    }
    return out;
}

std::vector<BodyDetection> nms_body(std::span<const BodyDetection> dets, double body_threshold)
{
    std::vector<ScoredBox> bodies;
    bodies.reserve(dets.size());
    for (const auto& d : dets) {
        bodies.push_back({d.body, d.score});
    }
    std::vector<BodyDetection> out;
    for (std::size_t i : nms(bodies, body_threshold)) {
        out.push_back(dets[i]);
    }
    return out;
}

FusedFrames fuse_sequence(const std::map<int, std::vector<JointDetection>>& joint,
                          const std::map<int, std::vector<BodyDetection>>& body, const RunConfig& cfg)
{
    std::set<int> frames;
    for (const auto& [f, _] : joint) {
        frames.insert(f);
    }
    for (const auto& [f, _] : body) {
        frames.insert(f);
    }
    static const std::vector<JointDetection> no_joint;
    static const std::vector<BodyDetection> no_body;

    FusedFrames out;
    for (int f : frames) {
        const auto jit = joint.find(f);
        const auto bit = body.find(f);
        const auto& j = jit == joint.end() ? no_joint : jit->second;
        const auto& b = bit == body.end() ? no_body : bit->second;
        if (cfg.nms_enabled) {
            out[f] = fuse_frame(nms_joint(j, cfg.nms_head_threshold), nms_body(b, cfg.nms_body_threshold), cfg.fusion);
        } else {
            out[f] = fuse_frame(j, b, cfg.fusion);
        }
    }
    return out;
}

std::vector<Tracklet> track_sequence(const FusedFrames& frames, const RunConfig& cfg)
{
    Tracker tracker(cfg.tracker, cfg.motion);
    if (frames.empty()) {
        return {};
    }
    const int last = frames.rbegin()->first;
    static const std::vector<FusedDetection> none;
    for (int f = 1; f <= last; ++f) {
        const auto it = frames.find(f);
        tracker.step(f, it == frames.end() ? none : it->second);
    }
    return tracker.tracklets();
}

IdFrames to_id_frames(std::span<const Tracklet> tracklets)
{
    IdFrames out;
    for (const auto& t : tracklets) {
        for (const auto& [frame, box] : t.boxes) {
            out[frame].push_back({t.id, box});
        }
    }
    return out;
}

BenchReport run_bench(const RunConfig& cfg, std::uint64_t seed)
{
    SceneConfig scene_cfg = cfg.scene;
    scene_cfg.seed = seed;
    const Scene scene = generate_scene(scene_cfg);
    const auto detections = render_detections(scene, cfg.noise, mix_seed(seed));
    const IdFrames truth = scene_body_truth(scene);

    FusedFrames body_only;
    std::map<int, std::vector<JointDetection>> joint;
    std::map<int, std::vector<BodyDetection>> body;
    for (const auto& fd : detections) {
        body_only[fd.frame] = body_only_frame(cfg.nms_enabled ? nms_body(fd.body, cfg.nms_body_threshold) : fd.body,
                                              cfg.fusion.high_score_threshold);
        joint[fd.frame] = fd.joint;
        body[fd.frame] = fd.body;
    }
    const FusedFrames fused = fuse_sequence(joint, body, cfg);

    BenchReport report;
    report.seed = seed;
    report.agents = scene_cfg.num_agents;
    report.frames = scene_cfg.num_frames;
    report.body_only = evaluate_tracking(truth, to_id_frames(track_sequence(body_only, cfg)),
                                         cfg.eval_iou_threshold);
    report.fused = evaluate_tracking(truth, to_id_frames(track_sequence(fused, cfg)),
                                     cfg.eval_iou_threshold);
    return report;
}

std::vector<GridPrediction> synthesize_grid_predictions(std::span<const GtPair> gts, int grid_w,
                                                        int grid_h, int stride, std::uint64_t seed)
{
    std::vector<GridPrediction> grids;
    if (gts.empty()) {
        return grids;
    }
    Rng rng(mix_seed(seed));
    const auto perturb = [&rng](const Box& b, double sigma) {
        return Box{b.left + rng.normal() * sigma, b.top + rng.normal() * sigma,
                   std::max(1.0, b.width + rng.normal() * sigma),
                   std::max(1.0, b.height + rng.normal() * sigma)};
    };
    for (int y = 0; y < grid_h; ++y) {
        for (int x = 0; x < grid_w; ++x) {
            GridPrediction g;
            g.grid_x = x;
            g.grid_y = y;
            g.stride = stride;
            const GtPair* nearest = &gts.front();
            double best = std::numeric_limits<double>::infinity();
            for (const auto& gt : gts) {
                const double d = std::hypot(g.center_x() - gt.head.center_x(),
                                            g.center_y() - gt.head.center_y());
                if (d < best) {
                    best = d;
                    nearest = &gt;
                }
            }
            const double quality = std::exp(-best / (4.0 * stride));
            const double spread = 1.0 - quality + 0.05;
            g.pred_head = perturb(nearest->head, spread * 0.5 * nearest->head.height);
            g.pred_body = perturb(nearest->body, spread * 0.3 * nearest->body.height);
            g.cls_prob = std::clamp(quality * rng.uniform(0.6, 1.0), 0.01, 0.99);
            g.obj_prob = std::clamp(quality * rng.uniform(0.6, 1.0), 0.01, 0.99);
            grids.push_back(g);
        }
    }
    return grids;
}

std::string format_report(const MetricReport& report, const std::string& name)
{
    return metric_lines("", report) + "\n" + table_header() + table_row(name, report);
}

std::string format_bench(const BenchReport& r)
{
    std::string out;
    out += "seed=" + std::to_string(r.seed) + "\n";
    out += "agents=" + std::to_string(r.agents) + "\n";
    out += "frames=" + std::to_string(r.frames) + "\n";
    out += metric_lines("body_only.", r.body_only);
    out += metric_lines("fused.", r.fused);
    out += "mota_gain_points=" + num(100.0 * (r.fused.mota - r.body_only.mota)) + "\n";
    out += "fn_reduction=" + std::to_string(r.body_only.fn - r.fused.fn) + "\n";
    out += "\n" + table_header() + table_row("body_only", r.body_only) + table_row("fused", r.fused);
    return out;
}

} // namespace crowdtrack
