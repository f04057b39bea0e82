#pragma once

#include <cstddef>
#include <vector>

#include "swarm/error.hpp"

namespace swarm {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

struct MetricsReport {
    double auc = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double gap = 0.0;  // train AUC - validation AUC, filled by callers
};

// Mann-Whitney AUC via average ranks, O(N log N). Ties count 0.5.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Predicted positive iff score >= tau.
ConfusionCounts confusion_at_threshold(const std::vector<double>& scores,
                                       const std::vector<int>& labels, double tau);

MetricsReport classification_report(const std::vector<double>& scores,
                                    const std::vector<int>& labels, double tau = 0.5);

// Davies-Bouldin index over labelled points (row-major, d columns).
double davies_bouldin(const std::vector<double>& points, std::size_t d,
                      const std::vector<int>& cluster_ids);

}  // namespace swarm
