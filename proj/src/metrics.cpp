#include "crowdtrack/metrics.hpp"

#include "crowdtrack/assignment.hpp"
#include "crowdtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

namespace crowdtrack {

namespace {

constexpr double kForbidden = 1e6;
const std::vector<IdBox> kNoBoxes;

void check_threshold(double t)
{
    if (!(t > 0.0 && t < 1.0)) {
        throw InputError("iou_threshold must lie in (0, 1)");
    }
}

void check_unique_ids(const IdFrames& frames, const char* side)
{
    for (const auto& [frame, boxes] : frames) {
        std::set<int> seen;
        for (const auto& b : boxes) {
            if (!seen.insert(b.id).second) {
                throw InputError(std::string(side) + ": duplicate id " + std::to_string(b.id) +
                                 " in frame " + std::to_string(frame));
            }
        }
    }
}

std::vector<int> frame_union(const IdFrames& a, const IdFrames& b)
{
    std::set<int> keys;
    for (const auto& [f, _] : a) {
        keys.insert(f);
    }
    for (const auto& [f, _] : b) {
        keys.insert(f);
    }
    return {keys.begin(), keys.end()};
}

const std::vector<IdBox>& at(const IdFrames& frames, int frame)
{
    const auto it = frames.find(frame);
    return it == frames.end() ? kNoBoxes : it->second;
}

} // namespace

MetricReport clear_mot(const IdFrames& gt, const IdFrames& pred, double iou_threshold)
{
    check_threshold(iou_threshold);
    check_unique_ids(gt, "ground truth");
    check_unique_ids(pred, "prediction");

    MetricReport report;
    std::unordered_map<int, int> last_match; // gt id -> pred id

    for (int frame : frame_union(gt, pred)) {
        const auto& g = at(gt, frame);
        const auto& p = at(pred, frame);
        report.total_gt += static_cast<long>(g.size());
        report.total_pred += static_cast<long>(p.size());

        std::vector<int> g_match(g.size(), -1), p_match(p.size(), -1);

        // Keep still-valid correspondences.
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto prev = last_match.find(g[i].id);
            if (prev == last_match.end()) {
                continue;
            }
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (p[j].id == prev->second && p_match[j] < 0 &&
                    iou(g[i].box, p[j].box) >= iou_threshold) {
                    g_match[i] = static_cast<int>(j);
                    p_match[j] = static_cast<int>(i);
                    break;
                }
            }
        }

        std::vector<std::size_t> free_g, free_p;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g_match[i] < 0) {
                free_g.push_back(i);
            }
        }
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (p_match[j] < 0) {
                free_p.push_back(j);
            }
        }
        Eigen::MatrixXd cost(static_cast<Eigen::Index>(free_g.size()),
                             static_cast<Eigen::Index>(free_p.size()));
        for (std::size_t a = 0; a < free_g.size(); ++a) {
            for (std::size_t b = 0; b < free_p.size(); ++b) {
                const double overlap = iou(g[free_g[a]].box, p[free_p[b]].box);
                cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    overlap >= iou_threshold ? 1.0 - overlap : kForbidden;
            }
        }
        for (const auto& [a, b] : solve_min_cost(cost).matches) {
            if (cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) >= kForbidden) {
                continue;
            }
            const std::size_t i = free_g[a];
            const std::size_t j = free_p[b];
            g_match[i] = static_cast<int>(j);
            p_match[j] = static_cast<int>(i);
            const auto prev = last_match.find(g[i].id);
            if (prev != last_match.end() && prev->second != p[j].id) {
                ++report.idsw;
            }
        }

        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g_match[i] >= 0) {
                ++report.matches;
                last_match[g[i].id] = p[static_cast<std::size_t>(g_match[i])].id;
            } else {
                ++report.fn;
            }
        }
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (p_match[j] < 0) {
                ++report.fp;
            }
        }
    }

    report.mota = report.total_gt > 0
                      ? 1.0 - static_cast<double>(report.fp + report.fn + report.idsw) /
                                  static_cast<double>(report.total_gt)
                      : std::numeric_limits<double>::quiet_NaN();
    return report;
}

IdentityScore identity_score(const IdFrames& gt, const IdFrames& pred, double iou_threshold)
{
    check_threshold(iou_threshold);
    check_unique_ids(gt, "ground truth");
    check_unique_ids(pred, "prediction");

    std::map<int, Eigen::Index> gt_index, pred_index;
    long total_gt = 0, total_pred = 0;
    for (const auto& [_, boxes] : gt) {
        for (const auto& b : boxes) {
            gt_index.emplace(b.id, 0);
        }
        total_gt += static_cast<long>(boxes.size());
    }
    for (const auto& [_, boxes] : pred) {
        for (const auto& b : boxes) {
            pred_index.emplace(b.id, 0);
        }
        total_pred += static_cast<long>(boxes.size());
    }
    Eigen::Index next = 0;
    for (auto& [_, idx] : gt_index) {
        idx = next++;
    }
    next = 0;
    for (auto& [_, idx] : pred_index) {
        idx = next++;
    }

    // overlap(g, p): frames where identity g and identity p coincide.
    Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt_index.size()),
                                                    static_cast<Eigen::Index>(pred_index.size()));
    for (int frame : frame_union(gt, pred)) {
        for (const auto& g : at(gt, frame)) {
            for (const auto& p : at(pred, frame)) {
                if (iou(g.box, p.box) >= iou_threshold) {
                    overlap(gt_index.at(g.id), pred_index.at(p.id)) += 1.0;
                }
            }
        }
    }

    IdentityScore score;
    const Eigen::MatrixXd neg = -overlap;
    for (const auto& [r, c] : solve_min_cost(neg).matches) {
        score.idtp += static_cast<long>(overlap(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    score.idfn = total_gt - score.idtp;
    score.idfp = total_pred - score.idtp;
    const long denom = total_gt + total_pred;
    score.idf1 = denom > 0 ? 2.0 * static_cast<double>(score.idtp) / static_cast<double>(denom)
                           : std::numeric_limits<double>::quiet_NaN();
    return score;
}

MetricReport evaluate_tracking(const IdFrames& gt, const IdFrames& pred, double iou_threshold)
{
    MetricReport report = clear_mot(gt, pred, iou_threshold);
    const IdentityScore id = identity_score(gt, pred, iou_threshold);
    report.idf1 = id.idf1;
    report.idtp = id.idtp;
    report.idfp = id.idfp;
    report.idfn = id.idfn;
    return report;
}

DetectionReport detection_eval(const std::map<int, std::vector<Box>>& gt,
                               const std::map<int, std::vector<ScoredBox>>& dets,
                               double iou_threshold)
{
    check_threshold(iou_threshold);
    long total_gt = 0;
    for (const auto& [_, boxes] : gt) {
        total_gt += static_cast<long>(boxes.size());
    }
    if (total_gt == 0) {
        throw InputError("detection_eval: no ground truth boxes; AP is undefined");
    }
    std::set<int> frames;
    for (const auto& [f, _] : gt) {
        frames.insert(f);
    }
    for (const auto& [f, _] : dets) {
        frames.insert(f);
    }

    // (score, is true positive) for every detection.
    std::vector<std::pair<double, bool>> outcomes;
    for (const auto& [frame, frame_dets] : dets) {
        const auto git = gt.find(frame);
        static const std::vector<Box> empty;
        const auto& g = git == gt.end() ? empty : git->second;
        std::vector<std::size_t> order(frame_dets.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return frame_dets[a].score > frame_dets[b].score;
        });
        std::vector<char> taken(g.size(), 0);
        for (std::size_t d : order) {
            double best = -1.0;
            std::size_t best_idx = 0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (taken[k]) {
                    continue;
                }
                const double overlap = iou(frame_dets[d].box, g[k]);
                if (overlap > best) {
                    best = overlap;
                    best_idx = k;
                }
            }
            const bool tp = best >= iou_threshold;
            if (tp) {
                taken[best_idx] = 1;
            }
            outcomes.emplace_back(frame_dets[d].score, tp);
        }
    }
    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    DetectionReport report;
    const double num_frames = static_cast<double>(std::max<std::size_t>(frames.size(), 1));
    long tp = 0, fp = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        outcomes[i].second ? ++tp : ++fp;
        const bool last_of_group = i + 1 == outcomes.size() || outcomes[i + 1].first != outcomes[i].first;
        if (last_of_group) {
            report.pr_curve.push_back({outcomes[i].first,
                                       static_cast<double>(tp) / static_cast<double>(tp + fp),
                                       static_cast<double>(tp) / static_cast<double>(total_gt),
                                       static_cast<double>(fp) / num_frames});
        }
    }

    // All-point interpolated AP over the precision envelope.
    std::vector<double> envelope(report.pr_curve.size());
    double running = 0.0;
    for (std::size_t i = report.pr_curve.size(); i-- > 0;) {
        running = std::max(running, report.pr_curve[i].precision);
        envelope[i] = running;
    }
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < report.pr_curve.size(); ++i) {
        report.ap += (report.pr_curve[i].recall - prev_recall) * envelope[i];
        prev_recall = report.pr_curve[i].recall;
    }

    // Log-average miss rate over 9 FPPI references.
    double log_sum = 0.0;
    for (int r = 0; r < 9; ++r) {
        const double ref = std::pow(10.0, -2.0 + 0.25 * r);
        double miss = 1.0;
        if (!report.pr_curve.empty()) {
            miss = 1.0 - report.pr_curve.front().recall;
            for (const auto& pt : report.pr_curve) {
                if (pt.fppi <= ref) {
                    miss = 1.0 - pt.recall;
                }
            }
        }
        log_sum += std::log(std::max(miss, kMissRateFloor));
    }
    report.mr2 = std::exp(log_sum / 9.0);
    return report;
}

} // namespace crowdtrack
