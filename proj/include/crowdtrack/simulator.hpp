#pragma once

#include "crowdtrack/fusion.hpp"
#include "crowdtrack/geometry.hpp"
#include "crowdtrack/metrics.hpp"
#include "crowdtrack/mot_io.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace crowdtrack {

/// Seeded random source with implementation-independent sampling: the raw
/// engine is mt19937_64 and every transform is written out here, so equal
/// seeds give equal draws on any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller (one draw per call).
    double normal();
    /// Poisson by Knuth's product method.
    int poisson(double mean);

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

struct SceneConfig {
    std::uint64_t seed = 0;
    int num_agents = 40;
    int num_frames = 300;
    double arena_width = 960.0;
    double arena_height = 540.0;
    double speed_min = 0.5; ///< pixels per frame
    double speed_max = 2.5;
    double head_ratio_min = 0.12; ///< head height / body height
    double head_ratio_max = 0.20;
    /// 0 puts the head at the top edge of the body box; 1 lowers it by 15%
    /// of the body height.
    double camera_tilt = 0.3;
    double body_height_min = 80.0;
    double body_height_max = 160.0;
    double body_aspect = 0.4; ///< body width / height

    void validate() const;
};

struct Agent {
    int id = 0;
    std::vector<Box> bodies; ///< one per frame
    std::vector<Box> heads;
    /// Share of the body covered by nearer agents, per frame.
    std::vector<double> occlusion;
};

struct Scene {
    SceneConfig config;
    /// Ordered near to far: agent k is occluded only by agents before it.
    std::vector<Agent> agents;
};

struct DetectorNoiseModel {
    double body_miss_base = 0.05;
    double body_miss_occlusion_gain = 0.8;
    double head_miss_base = 0.05;
    double head_miss_occlusion_gain = 0.2;
    double localization_sigma = 2.0;
    /// Expected false positives per frame for each detector.
    double false_positive_rate = 0.5;
    double false_positive_score_min = 0.1;
    double false_positive_score_max = 0.9;
    double score_noise_sigma = 0.05;

    void validate() const;

    double body_miss_probability(double occlusion) const;
    double head_miss_probability(double occlusion) const;
};

struct FrameDetections {
    int frame = 1;
    std::vector<JointDetection> joint;
    std::vector<BodyDetection> body;
};

/// Covered share of `target` at one-pixel resolution: pixel (x, y) belongs to
/// a box when its center (x + 0.5, y + 0.5) lies in [left, right) x [top, bottom).
double occlusion_fraction(const Box& target, std::span<const Box> occluders);

/// Constant-velocity agents reflecting off the arena walls.
Scene generate_scene(const SceneConfig& cfg);

/// Sample both detectors over every frame of the scene.
std::vector<FrameDetections> render_detections(const Scene& scene, const DetectorNoiseModel& noise,
                                               std::uint64_t seed);

/// Ground truth body boxes keyed by frame (1-based) for evaluation.
IdFrames scene_body_truth(const Scene& scene);

/// Ground truth in merged head/body form.
std::vector<MergedGtRow> scene_merged_truth(const Scene& scene);

} // namespace crowdtrack
