#include "swarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace swarm {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw SwarmError(ErrorCode::ShapeMismatch, "roc_auc: scores/labels length mismatch");
    }
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += (l == 1);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw SwarmError(ErrorCode::DegenerateLabels, "roc_auc: need both classes present");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tie groups; sum ranks of positives.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        }
        i = j;
    }
    const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ConfusionCounts confusion_at_threshold(const std::vector<double>& scores,
                                       const std::vector<int>& labels, double tau) {
    if (scores.size() != labels.size()) {
        throw SwarmError(ErrorCode::ShapeMismatch, "confusion: scores/labels length mismatch");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= tau;
        if (labels[i] == 1) {
            pred ? ++c.tp : ++c.fn;
        } else {
            pred ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

MetricsReport classification_report(const std::vector<double>& scores,
                                    const std::vector<int>& labels, double tau) {
    const ConfusionCounts c = confusion_at_threshold(scores, labels, tau);
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    MetricsReport r;
    r.auc = roc_auc(scores, labels);
    r.sensitivity = ratio(c.tp, c.tp + c.fn);
    r.specificity = ratio(c.tn, c.tn + c.fp);
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = r.sensitivity;
    const double pr = r.precision + r.recall;
    r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
    return r;
}

double davies_bouldin(const std::vector<double>& points, std::size_t d,
                      const std::vector<int>& cluster_ids) {
    if (d == 0 || cluster_ids.empty() || points.size() != cluster_ids.size() * d) {
        throw SwarmError(ErrorCode::ShapeMismatch, "davies_bouldin: bad matrix dimensions");
    }
    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < cluster_ids.size(); ++i) {
        clusters[cluster_ids[i]].push_back(i);
    }
    if (clusters.size() < 2) {
        throw SwarmError(ErrorCode::DegenerateClusters, "davies_bouldin: need >= 2 clusters");
    }

    const std::size_t k = clusters.size();
    std::vector<std::vector<double>> centroids(k, std::vector<double>(d, 0.0));
    std::vector<double> scatter(k, 0.0);
    std::size_t ci = 0;
    for (const auto& [id, idx] : clusters) {
        for (std::size_t i : idx) {
            for (std::size_t j = 0; j < d; ++j) centroids[ci][j] += points[i * d + j];
        }
        for (std::size_t j = 0; j < d; ++j) centroids[ci][j] /= static_cast<double>(idx.size());
        for (std::size_t i : idx) {
            double sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = points[i * d + j] - centroids[ci][j];
                sq += diff * diff;
            }
            scatter[ci] += std::sqrt(sq);
        }
        scatter[ci] /= static_cast<double>(idx.size());
        ++ci;
    }

    double dbi = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        double worst = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            double sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = centroids[a][j] - centroids[b][j];
                sq += diff * diff;
            }
            const double dist = std::sqrt(sq);
            if (dist == 0.0) {
                throw SwarmError(ErrorCode::CoincidentCentroids,
                                 "davies_bouldin: coincident centroids");
            }
            worst = std::max(worst, (scatter[a] + scatter[b]) / dist);
        }
        dbi += worst;
    }
    return dbi / static_cast<double>(k);
}

}  // namespace swarm
