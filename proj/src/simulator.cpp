#include "crowdtrack/simulator.hpp"

#include "crowdtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crowdtrack {

Rng::Rng(std::uint64_t seed)
    : engine_(seed)
{
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::poisson(double mean)
{
    if (!(mean > 0.0)) {
        return 0;
    }
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
        ++k;
        prod *= uniform();
    }
    return k;
}

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void SceneConfig::validate() const
{
    if (num_agents < 0) {
        throw InputError("SceneConfig: num_agents must be >= 0");
    }
    if (num_frames < 1) {
        throw InputError("SceneConfig: num_frames must be >= 1");
    }
    if (!(arena_width > 0.0) || !(arena_height > 0.0)) {
        throw InputError("SceneConfig: arena must be positive");
    }
    if (!(speed_min >= 0.0) || !(speed_max >= speed_min)) {
        throw InputError("SceneConfig: speed range must satisfy 0 <= min <= max");
    }
    if (!(head_ratio_min > 0.0) || !(head_ratio_max >= head_ratio_min) || !(head_ratio_max < 1.0)) {
        throw InputError("SceneConfig: head ratio range must satisfy 0 < min <= max < 1");
    }
    if (!(camera_tilt >= 0.0 && camera_tilt <= 1.0)) {
        throw InputError("SceneConfig: camera_tilt must lie in [0, 1]");
    }
    if (!(body_height_min > 0.0) || !(body_height_max >= body_height_min)) {
        throw InputError("SceneConfig: body height range must satisfy 0 < min <= max");
    }
    if (!(body_aspect > 0.0)) {
        throw InputError("SceneConfig: body_aspect must be > 0");
    }
    if (body_height_max >= arena_height || body_height_max * body_aspect >= arena_width) {
        throw InputError("SceneConfig: bodies must fit inside the arena");
    }
}

void DetectorNoiseModel::validate() const
{
    for (double v : {body_miss_base, body_miss_occlusion_gain, head_miss_base, head_miss_occlusion_gain}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InputError("DetectorNoiseModel: miss parameters must lie in [0, 1]");
        }
    }
    if (!(localization_sigma >= 0.0) || !(score_noise_sigma >= 0.0)) {
        throw InputError("DetectorNoiseModel: noise sigmas must be >= 0");
    }
    if (!(false_positive_rate >= 0.0)) {
        throw InputError("DetectorNoiseModel: false_positive_rate must be >= 0");
    }
    if (!(false_positive_score_min > 0.0) || !(false_positive_score_max >= false_positive_score_min) ||
        !(false_positive_score_max < 1.0)) {
        throw InputError("DetectorNoiseModel: false positive score range must lie in (0, 1)");
    }
}

double DetectorNoiseModel::body_miss_probability(double occlusion) const
{
    return std::clamp(body_miss_base + body_miss_occlusion_gain * occlusion, 0.0, 1.0);
}

double DetectorNoiseModel::head_miss_probability(double occlusion) const
{
    return std::clamp(head_miss_base + head_miss_occlusion_gain * occlusion, 0.0, 1.0);
}

namespace {

struct PixelSpan {
    long x0, x1, y0, y1; // half-open
};

PixelSpan pixels_of(const Box& b)
{
    return {static_cast<long>(std::ceil(b.left - 0.5)), static_cast<long>(std::ceil(b.right() - 0.5)),
            static_cast<long>(std::ceil(b.top - 0.5)), static_cast<long>(std::ceil(b.bottom() - 0.5))};
}

void reflect(double& pos, double& vel, double extent, double limit)
{
    if (pos < 0.0) {
        pos = -pos;
        vel = -vel;
    } else if (pos + extent > limit) {
        pos = 2.0 * (limit - extent) - pos;
        vel = -vel;
    }
    pos = std::clamp(pos, 0.0, limit - extent);
}

Box jitter(const Box& b, double sigma, Rng& rng)
{
    const double dl = rng.normal() * sigma;
    const double dt = rng.normal() * sigma;
    const double dw = rng.normal() * sigma;
    const double dh = rng.normal() * sigma;
    return {b.left + dl, b.top + dt, std::max(1.0, b.width + dw), std::max(1.0, b.height + dh)};
}

double detection_score(double miss_probability, double sigma, Rng& rng)
{
    return std::clamp(1.0 - miss_probability + rng.normal() * sigma, 1e-3, 1.0 - 1e-3);
}

Box random_body(const SceneConfig& cfg, Rng& rng)
{
    const double h = rng.uniform(cfg.body_height_min, cfg.body_height_max);
    const double w = cfg.body_aspect * h;
    return {rng.uniform(0.0, cfg.arena_width - w), rng.uniform(0.0, cfg.arena_height - h), w, h};
}

} // namespace

double occlusion_fraction(const Box& target, std::span<const Box> occluders)
{
    const PixelSpan t = pixels_of(target);
    const long total = std::max(0L, t.x1 - t.x0) * std::max(0L, t.y1 - t.y0);
    if (total == 0) {
        return 0.0;
    }
    std::vector<PixelSpan> relevant;
    for (const auto& o : occluders) {
        PixelSpan s = pixels_of(o);
        s.x0 = std::max(s.x0, t.x0);
        s.x1 = std::min(s.x1, t.x1);
        s.y0 = std::max(s.y0, t.y0);
        s.y1 = std::min(s.y1, t.y1);
        if (s.x0 < s.x1 && s.y0 < s.y1) {
            relevant.push_back(s);
        }
    }
    if (relevant.empty()) {
        return 0.0;
    }

    long covered = 0;
    std::vector<std::pair<long, long>> row;
    for (long y = t.y0; y < t.y1; ++y) {
        row.clear();
        for (const auto& s : relevant) {
            if (y >= s.y0 && y < s.y1) {
                row.emplace_back(s.x0, s.x1);
            }
        }
        std::sort(row.begin(), row.end());
        long reach = t.x0;
        for (const auto& [a, b] : row) {
            const long start = std::max(a, reach);
            if (b > start) {
                covered += b - start;
                reach = b;
            }
        }
    }
    return std::clamp(static_cast<double>(covered) / static_cast<double>(total), 0.0, 1.0);
}

Scene generate_scene(const SceneConfig& cfg)
{
    cfg.validate();
    Scene scene;
    scene.config = cfg;
    Rng rng(mix_seed(cfg.seed));
    const auto frames = static_cast<std::size_t>(cfg.num_frames);

    for (int a = 0; a < cfg.num_agents; ++a) {
        Agent agent;
        agent.id = a + 1;
        Box body = random_body(cfg, rng);
        const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        double vx = speed * std::cos(angle);
        double vy = speed * std::sin(angle);
        const double ratio = rng.uniform(cfg.head_ratio_min, cfg.head_ratio_max);

        agent.bodies.reserve(frames);
        agent.heads.reserve(frames);
        for (std::size_t f = 0; f < frames; ++f) {
            agent.bodies.push_back(body);
            const double head_h = ratio * body.height;
            const double head_w = std::min(0.75 * head_h, body.width);
            agent.heads.push_back({body.center_x() - 0.5 * head_w,
                                   body.top + cfg.camera_tilt * 0.15 * body.height, head_w, head_h});
            body.left += vx;
            body.top += vy;
            reflect(body.left, vx, body.width, cfg.arena_width);
            reflect(body.top, vy, body.height, cfg.arena_height);
        }
        scene.agents.push_back(std::move(agent));
    }

    std::vector<Box> nearer;
    for (std::size_t f = 0; f < frames; ++f) {
        nearer.clear();
        for (auto& agent : scene.agents) {
            agent.occlusion.push_back(occlusion_fraction(agent.bodies[f], nearer));
            nearer.push_back(agent.bodies[f]);
        }
    }
    return scene;
}

std::vector<FrameDetections> render_detections(const Scene& scene, const DetectorNoiseModel& noise,
                                               std::uint64_t seed)
{
    noise.validate();
    Rng body_rng(mix_seed(seed ^ 0x1ULL));
    Rng joint_rng(mix_seed(seed ^ 0x2ULL));
    Rng body_fp_rng(mix_seed(seed ^ 0x3ULL));
    Rng joint_fp_rng(mix_seed(seed ^ 0x4ULL));
    const SceneConfig& cfg = scene.config;

    std::vector<FrameDetections> out;
    out.reserve(static_cast<std::size_t>(cfg.num_frames));
    for (int f = 0; f < cfg.num_frames; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        FrameDetections frame;
        frame.frame = f + 1;
        for (const auto& agent : scene.agents) {
            const double occ = agent.occlusion[fi];

            // Every agent consumes the same number of draws whether or not it
            // is detected, so streams stay aligned across noise settings.
            const double body_miss = noise.body_miss_probability(occ);
            const bool body_hit = body_rng.uniform() >= body_miss;
            const Box body_box = jitter(agent.bodies[fi], noise.localization_sigma, body_rng);
            const double body_score = detection_score(body_miss, noise.score_noise_sigma, body_rng);
            if (body_hit) {
                frame.body.push_back({body_box, body_score});
            }

            const double head_miss = noise.head_miss_probability(occ);
            const bool joint_hit = joint_rng.uniform() >= head_miss;
            const Box head_box = jitter(agent.heads[fi], noise.localization_sigma, joint_rng);
            const Box joint_body = jitter(agent.bodies[fi], noise.localization_sigma, joint_rng);
            const double joint_score = detection_score(head_miss, noise.score_noise_sigma, joint_rng);
            if (joint_hit) {
                frame.joint.push_back({head_box, joint_body, joint_score});
            }
        }

        const int body_fps = body_fp_rng.poisson(noise.false_positive_rate);
        for (int k = 0; k < body_fps; ++k) {
            const Box b = random_body(cfg, body_fp_rng);
            frame.body.push_back({b, body_fp_rng.uniform(noise.false_positive_score_min,
                                                         noise.false_positive_score_max)});
        }
        const int joint_fps = joint_fp_rng.poisson(noise.false_positive_rate);
        for (int k = 0; k < joint_fps; ++k) {
            const Box b = random_body(cfg, joint_fp_rng);
            const double ratio = joint_fp_rng.uniform(cfg.head_ratio_min, cfg.head_ratio_max);
            const double head_h = ratio * b.height;
            const double head_w = std::min(0.75 * head_h, b.width);
            const Box head{b.center_x() - 0.5 * head_w, b.top, head_w, head_h};
            frame.joint.push_back({head, b, joint_fp_rng.uniform(noise.false_positive_score_min,
                                                                 noise.false_positive_score_max)});
        }
        out.push_back(std::move(frame));
    }
    return out;
}

IdFrames scene_body_truth(const Scene& scene)
{
    IdFrames gt;
    for (int f = 0; f < scene.config.num_frames; ++f) {
        auto& boxes = gt[f + 1];
        for (const auto& agent : scene.agents) {
            boxes.push_back({agent.id, agent.bodies[static_cast<std::size_t>(f)]});
        }
    }
    return gt;
}

std::vector<MergedGtRow> scene_merged_truth(const Scene& scene)
{
    std::vector<MergedGtRow> rows;
    for (int f = 0; f < scene.config.num_frames; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        for (const auto& agent : scene.agents) {
            rows.push_back({f + 1, agent.id, agent.heads[fi], agent.bodies[fi]});
        }
    }
    return rows;
}

} // namespace crowdtrack
