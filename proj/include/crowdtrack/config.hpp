#pragma once

#include "crowdtrack/fusion.hpp"
#include "crowdtrack/kalman.hpp"
#include "crowdtrack/simota.hpp"
#include "crowdtrack/simulator.hpp"
#include "crowdtrack/tracker.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace crowdtrack {

/// Every tunable of the pipeline. Loaded from `key = value` text where keys
/// are `section.field` (for example `tracker.max_lost_frames = 30`).
struct RunConfig {
    FusionConfig fusion;
    TrackerConfig tracker;
    MotionParams motion;
    SimotaConfig simota;
    SceneConfig scene;
    DetectorNoiseModel noise;
    /// Suppress duplicates in detection inputs before fusion. Off for
    /// detector files that are already post-NMS.
    bool nms_enabled = false;
    double nms_head_threshold = 0.45;
    double nms_body_threshold = 0.7;
    double eval_iou_threshold = 0.5;
    double loss_alpha1 = 5.0;
    double loss_alpha2 = 5.0;
    bool loss_use_l1 = false;

    /// Apply `key = value` lines on top of the current values. Unknown keys,
    /// malformed numbers and out-of-range values throw InputError naming the
    /// source line and key.
    void apply(std::istream& in, const std::string& source = "<config>");
    void apply_file(const std::filesystem::path& path);

    /// Set one key from its textual value. Range checks are left to validate().
    void set(const std::string& key, const std::string& value);

    void validate() const;

    /// All recognized keys, in documentation order.
    static std::vector<std::string> keys();

    /// The configuration rendered back as `key = value` lines.
    std::string to_text() const;
};

} // namespace crowdtrack
