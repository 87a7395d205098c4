#include "crowdtrack/config.hpp"

#include "crowdtrack/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>

namespace crowdtrack {

namespace {

double to_double(const std::string& key, const std::string& text)
{
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw InputError("key '" + key + "': '" + text + "' is not a finite number");
    }
    return v;
}

int to_int(const std::string& key, const std::string& text)
{
    const double v = to_double(key, text);
    if (v != std::floor(v) || std::abs(v) > 2.0e9) {
        throw InputError("key '" + key + "': '" + text + "' is not an integer");
    }
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw InputError("key '" + key + "': '" + text + "' is not a boolean");
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

void check_unit_upper_closed(const std::string& key, double v)
{
    if (!(v > 0.0 && v <= 1.0)) {
        throw InputError("key '" + key + "': must lie in (0, 1]");
    }
}

struct Field {
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define CT_DOUBLE(KEY, MEMBER)                                                                     \
    Field{KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = to_double(KEY, v); },             \
          [](const RunConfig& c) { return fmt(c.MEMBER); }}
#define CT_INT(KEY, MEMBER)                                                                        \
    Field{KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = to_int(KEY, v); },                \
          [](const RunConfig& c) { return std::to_string(c.MEMBER); }}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        CT_DOUBLE("fusion.match_iou_gate", fusion.match_iou_gate),
        CT_DOUBLE("fusion.high_score_threshold", fusion.high_score_threshold),
        CT_DOUBLE("tracker.high_score_threshold", tracker.high_score_threshold),
        CT_DOUBLE("tracker.association_iou_gate_first", tracker.association_iou_gate_first),
        CT_DOUBLE("tracker.association_iou_gate_second", tracker.association_iou_gate_second),
        CT_DOUBLE("tracker.new_track_min_score", tracker.new_track_min_score),
        CT_INT("tracker.max_lost_frames", tracker.max_lost_frames),
        CT_DOUBLE("motion.position_noise_weight", motion.position_noise_weight),
        CT_DOUBLE("motion.velocity_noise_weight", motion.velocity_noise_weight),
        CT_DOUBLE("simota.lambda1", simota.lambda1),
        CT_DOUBLE("simota.lambda2", simota.lambda2),
        CT_DOUBLE("simota.center_radius", simota.center_radius),
        CT_INT("simota.topq", simota.topq),
        CT_DOUBLE("loss.alpha1", loss_alpha1),
        CT_DOUBLE("loss.alpha2", loss_alpha2),
        Field{"loss.use_l1",
              [](RunConfig& c, const std::string& v) { c.loss_use_l1 = to_bool("loss.use_l1", v); },
              [](const RunConfig& c) { return std::string(c.loss_use_l1 ? "true" : "false"); }},
        CT_INT("scene.num_agents", scene.num_agents),
        CT_INT("scene.num_frames", scene.num_frames),
        CT_DOUBLE("scene.arena_width", scene.arena_width),
        CT_DOUBLE("scene.arena_height", scene.arena_height),
        CT_DOUBLE("scene.speed_min", scene.speed_min),
        CT_DOUBLE("scene.speed_max", scene.speed_max),
        CT_DOUBLE("scene.head_ratio_min", scene.head_ratio_min),
        CT_DOUBLE("scene.head_ratio_max", scene.head_ratio_max),
        CT_DOUBLE("scene.camera_tilt", scene.camera_tilt),
        CT_DOUBLE("scene.body_height_min", scene.body_height_min),
        CT_DOUBLE("scene.body_height_max", scene.body_height_max),
        CT_DOUBLE("scene.body_aspect", scene.body_aspect),
        CT_DOUBLE("noise.body_miss_base", noise.body_miss_base),
        CT_DOUBLE("noise.body_miss_occlusion_gain", noise.body_miss_occlusion_gain),
        CT_DOUBLE("noise.head_miss_base", noise.head_miss_base),
        CT_DOUBLE("noise.head_miss_occlusion_gain", noise.head_miss_occlusion_gain),
        CT_DOUBLE("noise.localization_sigma", noise.localization_sigma),
        CT_DOUBLE("noise.false_positive_rate", noise.false_positive_rate),
        CT_DOUBLE("noise.false_positive_score_min", noise.false_positive_score_min),
        CT_DOUBLE("noise.false_positive_score_max", noise.false_positive_score_max),
        CT_DOUBLE("noise.score_noise_sigma", noise.score_noise_sigma),
        Field{"nms.enabled",
              [](RunConfig& c, const std::string& v) { c.nms_enabled = to_bool("nms.enabled", v); },
              [](const RunConfig& c) { return std::string(c.nms_enabled ? "true" : "false"); }},
        CT_DOUBLE("nms.head_threshold", nms_head_threshold),
        CT_DOUBLE("nms.body_threshold", nms_body_threshold),
        CT_DOUBLE("eval.iou_threshold", eval_iou_threshold),
    };
    return table;
}

#undef CT_DOUBLE
#undef CT_INT

} // namespace

void RunConfig::set(const std::string& key, const std::string& value)
{
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(*this, value);
            return;
        }
    }
    throw InputError("unknown key '" + key + "'");
}

void RunConfig::apply(std::istream& in, const std::string& source)
{
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const InputError& e) {
            throw InputError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        validate();
    } catch (const InputError& e) {
        throw InputError(source + ": invalid configuration: " + e.what());
    }
}

void RunConfig::apply_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config '" + path.string() + "'");
    }
    apply(in, path.string());
}

void RunConfig::validate() const
{
    fusion.validate();
    tracker.validate();
    motion.validate();
    simota.validate();
    scene.validate();
    noise.validate();
    check_unit_upper_closed("nms.head_threshold", nms_head_threshold);
    check_unit_upper_closed("nms.body_threshold", nms_body_threshold);
    if (!(eval_iou_threshold > 0.0 && eval_iou_threshold < 1.0)) {
        throw InputError("key 'eval.iou_threshold': must lie in (0, 1)");
    }
    if (!(loss_alpha1 >= 0.0) || !(loss_alpha2 >= 0.0)) {
        throw InputError("loss weights must be >= 0");
    }
}

std::vector<std::string> RunConfig::keys()
{
    std::vector<std::string> out;
    for (const auto& f : fields()) {
        out.emplace_back(f.key);
    }
    return out;
}

std::string RunConfig::to_text() const
{
    std::string out;
    for (const auto& f : fields()) {
        out += std::string(f.key) + " = " + f.get(*this) + "\n";
    }
    return out;
}

} // namespace crowdtrack
