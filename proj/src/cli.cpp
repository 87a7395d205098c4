#include "crowdtrack/cli.hpp"

#include "crowdtrack/config.hpp"
#include "crowdtrack/error.hpp"
#include "crowdtrack/metrics.hpp"
#include "crowdtrack/mot_io.hpp"
#include "crowdtrack/pipeline.hpp"
#include "crowdtrack/simota.hpp"
#include "crowdtrack/simulator.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace crowdtrack {

namespace {

namespace fs = std::filesystem;

RunConfig load_config(const std::string& path)
{
    RunConfig cfg;
    if (!path.empty()) {
        cfg.apply_file(path);
    }
    return cfg;
}

void emit(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << text;
    } else {
        write_file_atomic(path, text);
    }
}

IdFrames merged_body_frames(const std::vector<MergedGtRow>& rows)
{
    IdFrames out;
    for (const auto& r : rows) {
        if (r.body) {
            out[r.frame].push_back({r.id, *r.body});
        }
    }
    return out;
}

// MOT ground truth rows flagged with conf 0 are "do not consider" entries.
IdFrames mot_frames(const MotFrames& frames, bool skip_ignored)
{
    IdFrames out;
    for (const auto& [frame, rows] : frames) {
        auto& dst = out[frame];
        for (const auto& r : rows) {
            if (skip_ignored && r.conf == 0.0) {
                continue;
            }
            dst.push_back({r.id, r.box});
        }
    }
    return out;
}

std::pair<double, double> parse_offset(const std::string& text)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw InputError("--offset expects DX,DY, got '" + text + "'");
    }
    try {
        std::size_t used = 0;
        const std::string xs = text.substr(0, comma);
        const std::string ys = text.substr(comma + 1);
        const double dx = std::stod(xs, &used);
        if (used != xs.size()) {
            throw std::invalid_argument("dx");
        }
        const double dy = std::stod(ys, &used);
        if (used != ys.size()) {
            throw std::invalid_argument("dy");
        }
        return {dx, dy};
    } catch (const std::logic_error&) {
        throw InputError("--offset expects DX,DY, got '" + text + "'");
    }
}

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Head-body detection fusion, two-stage tracking and evaluation toolkit", "crowdtrack"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output;

    // fuse
    auto* fuse = app.add_subcommand("fuse", "Merge joint head-body and body detections");
    std::string joint_path, body_path;
    fuse->add_option("--joint", joint_path, "Joint detection file")->required()->check(CLI::ExistingFile);
    fuse->add_option("--body", body_path, "Body detection file (MOT format)")->required()->check(CLI::ExistingFile);
    fuse->add_option("-o,--output", output, "Fused detection file (stdout when omitted)");
    fuse->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    // track
    auto* track = app.add_subcommand("track", "Run the two-stage tracker on detections");
    std::string det_path;
    auto* det_opt = track->add_option("--det", det_path, "Fused or plain MOT detection file")
                        ->check(CLI::ExistingFile);
    auto* joint_opt = track->add_option("--joint", joint_path, "Joint detection file")->check(CLI::ExistingFile);
    auto* body_opt = track->add_option("--body", body_path, "Body detection file")->check(CLI::ExistingFile);
    det_opt->excludes(joint_opt)->excludes(body_opt);
    joint_opt->needs(body_opt);
    body_opt->needs(joint_opt);
    track->add_option("-o,--output", output, "Tracking result file (stdout when omitted)");
    track->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    // merge-labels
    auto* merge = app.add_subcommand("merge-labels", "Pair head labels with body labels");
    std::string heads_path, bodies_path, offset_text = "0,0";
    merge->add_option("--heads", heads_path, "Head ground truth (MOT format)")->required()->check(CLI::ExistingFile);
    merge->add_option("--bodies", bodies_path, "Body ground truth (MOT format)")->required()->check(CLI::ExistingFile);
    merge->add_option("--offset", offset_text, "Pixel offset DX,DY added to head boxes");
    merge->add_option("-o,--output", output, "Merged ground truth file (stdout when omitted)");

    // eval
    auto* eval = app.add_subcommand("eval", "Score a tracking result against ground truth");
    std::string gt_path, result_path, gt_format = "mot", eval_det_path;
    double eval_iou = -1.0;
    eval->add_option("--gt", gt_path, "Ground truth file")->required()->check(CLI::ExistingFile);
    eval->add_option("--result", result_path, "Tracking result file")->required()->check(CLI::ExistingFile);
    eval->add_option("--gt-format", gt_format, "mot or merged")->check(CLI::IsMember({"mot", "merged"}));
    eval->add_option("--detections", eval_det_path, "Scored detections for AP and MR-2")
        ->check(CLI::ExistingFile);
    eval->add_option("--iou", eval_iou, "IoU threshold (default from config)");
    eval->add_option("-o,--output", output, "Report file (stdout when omitted)");
    eval->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic crowd with detections");
    std::uint64_t seed = 0;
    std::string out_dir;
    simulate->add_option("--seed", seed, "Random seed")->required();
    simulate->add_option("--out-dir", out_dir, "Output directory")->required();
    simulate->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    // assign-demo
    auto* demo = app.add_subcommand("assign-demo", "Run label assignment on synthetic grid predictions");
    std::string pairs_path, grid_text;
    demo->add_option("--gt-pairs", pairs_path, "Ground truth pairs (merged format)")->required()->check(CLI::ExistingFile);
    demo->add_option("--grid", grid_text, "Feature map as W,H,STRIDE")->required();
    demo->add_option("--seed", seed, "Random seed")->required();
    demo->add_option("-o,--output", output, "Assignment dump (stdout when omitted)");
    demo->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    // bench
    auto* bench = app.add_subcommand("bench", "Simulate, fuse, track and compare against body-only tracking");
    bench->add_option("--seed", seed, "Random seed")->required();
    bench->add_option("-o,--output", output, "Report file (stdout when omitted)");
    bench->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    // config
    auto* show = app.add_subcommand("config", "Print every configuration key with its value");
    show->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("crowdtrack");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) {
        argv.push_back(a.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        const RunConfig cfg = load_config(config_path);

        if (*fuse) {
            const auto joint = parse_joint_detections_file(joint_path);
            const auto body = to_body_detections(parse_mot_file(body_path));
            emit(write_fused_detections(fuse_sequence(joint, body, cfg)), output, out);
        } else if (*track) {
            FusedFrames frames;
            if (!det_path.empty()) {
                frames = to_fused_detections(parse_mot_file(det_path), cfg.tracker.high_score_threshold);
            } else if (!joint_path.empty()) {
                frames = fuse_sequence(parse_joint_detections_file(joint_path),
                                       to_body_detections(parse_mot_file(body_path)), cfg);
            } else {
                throw InputError("track needs --det or both --joint and --body");
            }
            emit(write_mot(track_sequence(frames, cfg)), output, out);
        } else if (*merge) {
            const auto [dx, dy] = parse_offset(offset_text);
            const auto rows = merge_head_body_labels(parse_mot_file(heads_path), parse_mot_file(bodies_path), dx, dy);
            emit(write_merged_gt(rows), output, out);
        } else if (*eval) {
            const double thr = eval_iou > 0.0 ? eval_iou : cfg.eval_iou_threshold;
            const IdFrames gt = gt_format == "merged" ? merged_body_frames(parse_merged_gt_file(gt_path))
                                                      : mot_frames(parse_mot_file(gt_path), true);
            const IdFrames pred = mot_frames(parse_mot_file(result_path), false);
            MetricReport report = evaluate_tracking(gt, pred, thr);
            if (!eval_det_path.empty()) {
                std::map<int, std::vector<Box>> gt_boxes;
                for (const auto& [frame, boxes] : gt) {
                    auto& dst = gt_boxes[frame];
                    for (const auto& b : boxes) {
                        dst.push_back(b.box);
                    }
                }
                std::map<int, std::vector<ScoredBox>> dets;
                for (const auto& [frame, rows] : parse_mot_file(eval_det_path)) {
                    auto& dst = dets[frame];
                    for (const auto& r : rows) {
                        dst.push_back({r.box, r.conf});
                    }
                }
                const DetectionReport det = detection_eval(gt_boxes, dets, thr);
                report.ap = det.ap;
                report.mr2 = det.mr2;
            }
            emit(format_report(report, "result"), output, out);
        } else if (*simulate) {
            SceneConfig scene_cfg = cfg.scene;
            scene_cfg.seed = seed;
            const Scene scene = generate_scene(scene_cfg);
            const auto dets = render_detections(scene, cfg.noise, mix_seed(seed));
            std::map<int, std::vector<JointDetection>> joint;
            std::map<int, std::vector<BodyDetection>> body;
            for (const auto& fd : dets) {
                joint[fd.frame] = fd.joint;
                body[fd.frame] = fd.body;
            }
            const fs::path dir(out_dir);
            const auto merged = scene_merged_truth(scene);
            write_file_atomic(dir / "gt.txt", write_merged_gt(merged));
            std::vector<Tracklet> body_truth;
            for (const auto& agent : scene.agents) {
                Tracklet t{agent.id, {}};
                for (std::size_t f = 0; f < agent.bodies.size(); ++f) {
                    t.boxes.emplace_back(static_cast<int>(f) + 1, agent.bodies[f]);
                }
                body_truth.push_back(std::move(t));
            }
            write_file_atomic(dir / "gt_body.txt", write_mot(body_truth));
            write_file_atomic(dir / "det_joint.txt", write_joint_detections(joint));
            write_file_atomic(dir / "det_body.txt", write_detections(body));
            out << "agents=" << scene_cfg.num_agents << "\nframes=" << scene_cfg.num_frames
                << "\nout_dir=" << dir.string() << "\n";
        } else if (*demo) {
            int gw = 0, gh = 0, stride = 0;
            if (std::sscanf(grid_text.c_str(), "%d,%d,%d", &gw, &gh, &stride) != 3 || gw <= 0 || gh <= 0 ||
                stride <= 0) {
                throw InputError("--grid expects positive W,H,STRIDE, got '" + grid_text + "'");
            }
            const auto rows = parse_merged_gt_file(pairs_path);
            std::vector<GtPair> gts;
            for (const auto& r : rows) {
                if (r.frame == rows.front().frame && r.head && r.body) {
                    gts.push_back({r.id, *r.head, *r.body});
                }
            }
            if (gts.empty()) {
                throw InputError(pairs_path + ": no row with both a head and a body box");
            }
            const auto grids = synthesize_grid_predictions(gts, gw, gh, stride, seed);
            const AssignmentOutcome outcome = assign(gts, grids, cfg.simota);
            std::string dump = "grid_index,gt_id,cost,positive\n";
            for (std::size_t g = 0; g < gts.size(); ++g) {
                for (std::size_t p = 0; p < grids.size(); ++p) {
                    const auto gi = static_cast<Eigen::Index>(g);
                    const auto pi = static_cast<Eigen::Index>(p);
                    if (!outcome.candidates(gi, pi)) {
                        continue;
                    }
                    const auto pos = outcome.positives.find(p);
                    const bool positive = pos != outcome.positives.end() && pos->second == gts[g].id;
                    dump += std::to_string(p) + "," + std::to_string(gts[g].id) + "," +
                            fixed6(outcome.costs(gi, pi)) + "," + (positive ? "1" : "0") + "\n";
                }
            }
            emit(dump, output, out);
            const LossBreakdown loss =
                compute_loss(outcome, gts, grids, cfg.loss_alpha1, cfg.loss_alpha2, cfg.loss_use_l1);
            std::ostream& summary = output.empty() ? err : out;
            summary << "positives=" << outcome.positives.size() << "\n"
                    << "starved_gts=" << outcome.starved_gts.size() << "\n"
                    << "loss.cls=" << fixed6(loss.cls) << "\nloss.obj=" << fixed6(loss.obj)
                    << "\nloss.head=" << fixed6(loss.head) << "\nloss.body=" << fixed6(loss.body)
                    << "\nloss.l1=" << fixed6(loss.l1) << "\nloss.total=" << fixed6(loss.total) << "\n";
        } else if (*bench) {
            emit(format_bench(run_bench(cfg, seed)), output, out);
        } else if (*show) {
            out << cfg.to_text();
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace crowdtrack
