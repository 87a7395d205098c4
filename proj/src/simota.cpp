#include "crowdtrack/simota.hpp"

#include "crowdtrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace crowdtrack {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbabilityEps, 1.0 - kProbabilityEps); }

double bce(double p, double target)
{
    const double q = clamp_prob(p);
    return -(target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
}

double box_l1(const Box& a, const Box& b)
{
    return std::abs(a.left - b.left) + std::abs(a.top - b.top) + std::abs(a.width - b.width) +
           std::abs(a.height - b.height);
}

} // namespace

void SimotaConfig::validate() const
{
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
        throw InputError("SimotaConfig: lambda1 and lambda2 must be >= 0");
    }
    if (!(center_radius > 0.0)) {
        throw InputError("SimotaConfig: center_radius must be > 0");
    }
    if (topq < 1) {
        throw InputError("SimotaConfig: topq must be >= 1");
    }
}

std::vector<bool> candidate_grids(std::span<const GridPrediction> grids, const GtPair& gt,
                                  const SimotaConfig& cfg)
{
    const Box& head = gt.head;
    std::vector<bool> mask(grids.size(), false);
    for (std::size_t i = 0; i < grids.size(); ++i) {
        const double px = grids[i].center_x();
        const double py = grids[i].center_y();
        const bool in_box = px > head.left && px < head.right() && py > head.top && py < head.bottom();
        const double reach = cfg.center_radius * grids[i].stride;
        const bool in_center = std::abs(px - head.center_x()) < reach &&
                               std::abs(py - head.center_y()) < reach;
        mask[i] = in_box || in_center;
    }
    return mask;
}

double pair_cost(const GtPair& gt, const GridPrediction& pred, const SimotaConfig& cfg)
{
    const double cls = bce(pred.cls_prob * pred.obj_prob, 1.0);
    const double head = -std::log(std::max(iou(pred.pred_head, gt.head), kIouFloor));
    const double body = -std::log(std::max(iou(pred.pred_body, gt.body), kIouFloor));
    return cls + cfg.lambda1 * head + cfg.lambda2 * body;
}

int dynamic_k(std::span<const double> head_ious, int topq)
{
    const auto n = static_cast<int>(head_ious.size());
    if (n == 0) {
        return 0;
    }
    std::vector<double> sorted(head_ious.begin(), head_ious.end());
    const int take = std::min(std::max(topq, 1), n);
    std::partial_sort(sorted.begin(), sorted.begin() + take, sorted.end(), std::greater<>());
    const double sum = std::accumulate(sorted.begin(), sorted.begin() + take, 0.0);
    const int k = std::max(1, static_cast<int>(std::floor(sum)));
    return std::min(k, n);
}

AssignmentOutcome assign(std::span<const GtPair> gts, std::span<const GridPrediction> grids,
                         const SimotaConfig& cfg)
{
    cfg.validate();
    const auto num_gt = static_cast<Eigen::Index>(gts.size());
    const auto num_grid = static_cast<Eigen::Index>(grids.size());

    AssignmentOutcome out;
    out.costs.resize(num_gt, num_grid);
    out.candidates.resize(num_gt, num_grid);
    out.dynamic_k.assign(gts.size(), 0);

    // grid -> (gt index, cost) of every ground truth that selected it.
    std::vector<std::vector<std::pair<std::size_t, double>>> claims(grids.size());

    for (std::size_t g = 0; g < gts.size(); ++g) {
        const auto mask = candidate_grids(grids, gts[g], cfg);
        std::vector<std::size_t> cand;
        std::vector<double> head_ious;
        for (std::size_t p = 0; p < grids.size(); ++p) {
            const auto gi = static_cast<Eigen::Index>(g);
            const auto pi = static_cast<Eigen::Index>(p);
            out.costs(gi, pi) = pair_cost(gts[g], grids[p], cfg);
            out.candidates(gi, pi) = mask[p];
            if (mask[p]) {
                cand.push_back(p);
                head_ious.push_back(iou(grids[p].pred_head, gts[g].head));
            }
        }
        const int k = dynamic_k(head_ious, cfg.topq);
        out.dynamic_k[g] = k;

        const auto row = static_cast<Eigen::Index>(g);
        std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            return out.costs(row, static_cast<Eigen::Index>(a)) <
                   out.costs(row, static_cast<Eigen::Index>(b));
        });
        for (int i = 0; i < k; ++i) {
            const std::size_t p = cand[static_cast<std::size_t>(i)];
            claims[p].emplace_back(g, out.costs(row, static_cast<Eigen::Index>(p)));
        }
    }

    // A grid claimed by several ground truths stays with the cheapest one
    // (lower index on equal cost); losers are not refilled.
    std::vector<int> kept_per_gt(gts.size(), 0);
    for (std::size_t p = 0; p < grids.size(); ++p) {
        if (claims[p].empty()) {
            continue;
        }
        const auto best = std::min_element(claims[p].begin(), claims[p].end(),
                                           [](const auto& a, const auto& b) {
                                               return a.second < b.second;
                                           });
        out.positives.emplace(p, gts[best->first].id);
        ++kept_per_gt[best->first];
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (out.dynamic_k[g] > 0 && kept_per_gt[g] == 0) {
            out.starved_gts.push_back(gts[g].id);
        }
    }
    return out;
}

LossBreakdown compute_loss(const AssignmentOutcome& outcome, std::span<const GtPair> gts,
                           std::span<const GridPrediction> grids, double alpha1, double alpha2,
                           bool use_l1)
{
    std::unordered_map<int, const GtPair*> by_id;
    for (const auto& g : gts) {
        by_id.emplace(g.id, &g);
    }

    LossBreakdown loss;
    if (!grids.empty()) {
        double obj = 0.0;
        for (std::size_t p = 0; p < grids.size(); ++p) {
            obj += bce(grids[p].obj_prob, outcome.positives.contains(p) ? 1.0 : 0.0);
        }
        loss.obj = obj / static_cast<double>(grids.size());
    }

    if (!outcome.positives.empty()) {
        double cls = 0.0, head = 0.0, body = 0.0, l1 = 0.0;
        for (const auto& [p, gt_id] : outcome.positives) {
            if (p >= grids.size()) {
                throw InputError("compute_loss: positive grid index out of range");
            }
            const auto it = by_id.find(gt_id);
            if (it == by_id.end()) {
                throw InputError("compute_loss: positive refers to unknown ground truth id " +
                                 std::to_string(gt_id));
            }
            const GridPrediction& pred = grids[p];
            const GtPair& gt = *it->second;
            cls += bce(pred.cls_prob, 1.0);
            head += 1.0 - iou(pred.pred_head, gt.head);
            body += 1.0 - iou(pred.pred_body, gt.body);
            l1 += (box_l1(pred.pred_head, gt.head) + box_l1(pred.pred_body, gt.body)) / 8.0;
        }
        const auto n = static_cast<double>(outcome.positives.size());
        loss.cls = cls / n;
        loss.head = head / n;
        loss.body = body / n;
        loss.l1 = use_l1 ? l1 / n : 0.0;
    }
    loss.total = loss.cls + loss.obj + alpha1 * loss.head + alpha2 * loss.body + loss.l1;
    return loss;
}

} // namespace crowdtrack
