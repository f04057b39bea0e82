#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarm/error.hpp"

namespace swarm {

// Row-major feature matrix with binary labels. Immutable once built.
struct Dataset {
    std::vector<double> features;  // rows * cols, row-major
    std::vector<int> labels;       // {0,1}, one per row
    std::size_t cols = 0;
    std::int64_t seed = 0;  // provenance

    std::size_t rows() const { return labels.size(); }
    const double* row(std::size_t i) const { return features.data() + i * cols; }
};

struct PartitionPlan {
    std::vector<double> fractions;                  // per node, each in (0,1]
    std::optional<std::vector<double>> class_bias;  // per-node positive proportion target
    std::int64_t seed = 0;
};

struct NodeShard {
    Dataset train;
    Dataset validation;
    int node_id = 0;

    std::size_t sample_count() const { return train.rows(); }
};

// Two-class Gaussian mixture: class 0 has mean -class_sep/2 on every axis,
// class 1 has +class_sep/2, unit variance. Exactly round(n*positive_frac)
// positive labels. Bit-identical output for identical arguments.
Dataset synth_dataset(std::size_t n, std::size_t d, double class_sep,
                      double positive_frac, std::int64_t seed);

// Stratified disjoint train/val/test split; the remainder after
// train_frac + val_frac is the test set.
struct SplitResult {
    Dataset train;
    Dataset validation;
    Dataset test;
};
SplitResult split(const Dataset& ds, double train_frac, double val_frac,
                  std::int64_t seed);

// Partition into per-node shards. Node k gets round(fractions[k]*N) samples;
// class_bias, when present, pins each node's positive proportion to within
// one sample of its target. val_frac of each node's allocation becomes its
// local validation split.
std::vector<NodeShard> partition(const Dataset& ds, const PartitionPlan& plan,
                                 double val_frac = 0.125);

// Concatenate rows from several datasets (same column count).
Dataset concat(const std::vector<Dataset>& parts);

Dataset load_csv(const std::string& path);
void write_csv(const Dataset& ds, const std::string& path);

}  // namespace swarm
