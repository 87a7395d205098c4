#include "crowdtrack/mot_io.hpp"

#include "crowdtrack/assignment.hpp"
#include "crowdtrack/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string_view>
#include <tuple>

namespace crowdtrack {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string where(const std::string& source, std::size_t line)
{
    return source + ":" + std::to_string(line) + ": ";
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view field, const std::string& source, std::size_t line,
                    std::size_t column)
{
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw InputError(where(source, line) + "field " + std::to_string(column) +
                         " is not a finite number: '" + std::string(field) + "'");
    }
    return value;
}

int parse_int(std::string_view field, const std::string& source, std::size_t line, std::size_t column)
{
    const double v = parse_double(field, source, line, column);
    if (v != std::floor(v) || std::abs(v) > 2.0e9) {
        throw InputError(where(source, line) + "field " + std::to_string(column) +
                         " is not an integer: '" + std::string(field) + "'");
    }
    return static_cast<int>(v);
}

Box parse_box(const std::vector<std::string_view>& f, std::size_t offset, const std::string& source,
              std::size_t line)
{
    return Box{parse_double(f[offset], source, line, offset + 1),
               parse_double(f[offset + 1], source, line, offset + 2),
               parse_double(f[offset + 2], source, line, offset + 3),
               parse_double(f[offset + 3], source, line, offset + 4)};
}

void require_valid(const Box& box, const std::string& source, std::size_t line)
{
    if (!box.valid()) {
        throw InputError(where(source, line) + "box width and height must be > 0");
    }
}

// Calls `fn(fields, line_number)` for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn)
{
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        fn(split_fields(line), line_no);
    }
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    return in;
}

std::string fixed(double v, int precision)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

void append_box(std::string& out, const std::optional<Box>& box)
{
    if (!box) {
        out += "-1,-1,-1,-1";
        return;
    }
    out += fixed(box->left, 2) + "," + fixed(box->top, 2) + "," + fixed(box->width, 2) + "," +
           fixed(box->height, 2);
}

std::optional<Box> parse_optional_box(const std::vector<std::string_view>& f, std::size_t offset,
                                      const std::string& source, std::size_t line)
{
    const Box b = parse_box(f, offset, source, line);
    if (b.left == -1.0 && b.top == -1.0 && b.width == -1.0 && b.height == -1.0) {
        return std::nullopt;
    }
    require_valid(b, source, line);
    return b;
}

} // namespace

MotFrames parse_mot(std::istream& in, const std::string& source)
{
    MotFrames frames;
    for_each_record(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
        if (f.size() < 7 || f.size() > 10) {
            throw InputError(where(source, line) + "expected 7 to 10 comma-separated fields, got " +
                             std::to_string(f.size()));
        }
        MotRow row;
        row.frame = parse_int(f[0], source, line, 1);
        if (row.frame < 1) {
            throw InputError(where(source, line) + "frame must be >= 1");
        }
        row.id = parse_int(f[1], source, line, 2);
        row.box = parse_box(f, 2, source, line);
        require_valid(row.box, source, line);
        row.conf = parse_double(f[6], source, line, 7);
        for (std::size_t i = 7; i < f.size(); ++i) {
            row.extra[i - 7] = parse_double(f[i], source, line, i + 1);
        }
        frames[row.frame].push_back(row);
    });
    return frames;
}

MotFrames parse_mot_file(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_mot(in, path.string());
}

std::string write_mot(std::span<const Tracklet> tracklets)
{
    std::vector<std::tuple<int, int, Box>> rows;
    for (const auto& t : tracklets) {
        for (const auto& [frame, box] : t.boxes) {
            rows.emplace_back(frame, t.id, box);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::string out;
    for (const auto& [frame, id, box] : rows) {
        out += std::to_string(frame) + "," + std::to_string(id) + ",";
        append_box(out, box);
        out += ",1,-1,-1,-1\n";
    }
    return out;
}

std::string write_detections(const std::map<int, std::vector<BodyDetection>>& frames)
{
    std::string out;
    for (const auto& [frame, dets] : frames) {
        for (const auto& d : dets) {
            out += std::to_string(frame) + ",-1,";
            append_box(out, d.body);
            out += "," + fixed(d.score, 6) + ",-1,-1,-1\n";
        }
    }
    return out;
}

std::map<int, std::vector<BodyDetection>> to_body_detections(const MotFrames& frames)
{
    std::map<int, std::vector<BodyDetection>> out;
    for (const auto& [frame, rows] : frames) {
        auto& dst = out[frame];
        for (const auto& r : rows) {
            dst.push_back({r.box, r.conf});
        }
    }
    return out;
}

std::map<int, std::vector<JointDetection>> parse_joint_detections(std::istream& in,
                                                                  const std::string& source)
{
    std::map<int, std::vector<JointDetection>> frames;
    for_each_record(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
        if (f.size() != 11) {
            throw InputError(where(source, line) + "expected 11 comma-separated fields, got " +
                             std::to_string(f.size()));
        }
        const int frame = parse_int(f[0], source, line, 1);
        if (frame < 1) {
            throw InputError(where(source, line) + "frame must be >= 1");
        }
        JointDetection d;
        d.head = parse_box(f, 2, source, line);
        d.body = parse_box(f, 6, source, line);
        require_valid(d.head, source, line);
        require_valid(d.body, source, line);
        d.score = parse_double(f[10], source, line, 11);
        frames[frame].push_back(d);
    });
    return frames;
}

std::map<int, std::vector<JointDetection>> parse_joint_detections_file(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_joint_detections(in, path.string());
}

std::string write_joint_detections(const std::map<int, std::vector<JointDetection>>& frames)
{
    std::string out;
    for (const auto& [frame, dets] : frames) {
        for (const auto& d : dets) {
            out += std::to_string(frame) + ",-1,";
            append_box(out, d.head);
            out += ",";
            append_box(out, d.body);
            out += "," + fixed(d.score, 6) + "\n";
        }
    }
    return out;
}

std::string write_fused_detections(const std::map<int, std::vector<FusedDetection>>& frames)
{
    std::string out;
    for (const auto& [frame, dets] : frames) {
        for (const auto& d : dets) {
            out += std::to_string(frame) + ",-1,";
            append_box(out, d.body);
            out += "," + fixed(d.score, 6) + "," +
                   std::to_string(static_cast<int>(d.provenance)) + ",-1,-1\n";
        }
    }
    return out;
}

std::map<int, std::vector<FusedDetection>> to_fused_detections(const MotFrames& frames,
                                                               double high_score_threshold)
{
    std::map<int, std::vector<FusedDetection>> out;
    for (const auto& [frame, rows] : frames) {
        auto& dst = out[frame];
        for (const auto& r : rows) {
            FusedDetection d;
            d.body = r.box;
            d.score = r.conf;
            const double code = r.extra[0];
            if (code == 0.0) {
                d.provenance = Provenance::matched;
            } else if (code == 1.0) {
                d.provenance = Provenance::head_only;
            } else {
                d.provenance = Provenance::body_only;
            }
            d.tier = d.score >= high_score_threshold ? Tier::high : Tier::low;
            dst.push_back(d);
        }
    }
    return out;
}

std::string write_merged_gt(std::span<const MergedGtRow> rows)
{
    std::string out;
    for (const auto& r : rows) {
        out += std::to_string(r.frame) + "," + std::to_string(r.id) + ",";
        append_box(out, r.head);
        out += ",";
        append_box(out, r.body);
        out += "\n";
    }
    return out;
}

std::vector<MergedGtRow> parse_merged_gt(std::istream& in, const std::string& source)
{
    std::vector<MergedGtRow> rows;
    for_each_record(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
        if (f.size() != 10) {
            throw InputError(where(source, line) + "expected 10 comma-separated fields, got " +
                             std::to_string(f.size()));
        }
        MergedGtRow r;
        r.frame = parse_int(f[0], source, line, 1);
        if (r.frame < 1) {
            throw InputError(where(source, line) + "frame must be >= 1");
        }
        r.id = parse_int(f[1], source, line, 2);
        r.head = parse_optional_box(f, 2, source, line);
        r.body = parse_optional_box(f, 6, source, line);
        if (!r.head && !r.body) {
            throw InputError(where(source, line) + "row has neither a head nor a body box");
        }
        rows.push_back(r);
    });
    return rows;
}

std::vector<MergedGtRow> parse_merged_gt_file(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_merged_gt(in, path.string());
}

std::vector<MergedGtRow> merge_head_body_labels(const MotFrames& heads, const MotFrames& bodies,
                                                double dx, double dy)
{
    std::vector<int> frame_keys;
    for (const auto& [f, _] : heads) {
        frame_keys.push_back(f);
    }
    for (const auto& [f, _] : bodies) {
        frame_keys.push_back(f);
    }
    std::sort(frame_keys.begin(), frame_keys.end());
    frame_keys.erase(std::unique(frame_keys.begin(), frame_keys.end()), frame_keys.end());

    static const std::vector<MotRow> none;
    std::vector<MergedGtRow> out;
    for (int frame : frame_keys) {
        const auto hit = heads.find(frame);
        const auto bit = bodies.find(frame);
        const auto& h = hit == heads.end() ? none : hit->second;
        const auto& b = bit == bodies.end() ? none : bit->second;

        std::vector<Box> shifted;
        shifted.reserve(h.size());
        for (const auto& row : h) {
            shifted.push_back({row.box.left + dx, row.box.top + dy, row.box.width, row.box.height});
        }

        Eigen::MatrixXd cost(static_cast<Eigen::Index>(h.size()), static_cast<Eigen::Index>(b.size()));
        for (std::size_t i = 0; i < h.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    1.0 - containment(shifted[i], b[j].box);
            }
        }
        const AssignmentResult result = solve_min_cost(cost);

        std::vector<char> head_used(h.size(), 0), body_used(b.size(), 0);
        for (const auto& [i, j] : result.matches) {
            if (containment(shifted[i], b[j].box) < kHeadBodyContainmentGate) {
                continue;
            }
            head_used[i] = body_used[j] = 1;
            out.push_back({frame, b[j].id, shifted[i], b[j].box});
        }
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (!head_used[i]) {
                out.push_back({frame, h[i].id, shifted[i], std::nullopt});
            }
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!body_used[j]) {
                out.push_back({frame, b[j].id, std::nullopt, b[j].box});
            }
        }
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write '" + tmp.string() + "'");
        }
        out << text;
        if (!out) {
            throw InputError("failed writing '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace crowdtrack
