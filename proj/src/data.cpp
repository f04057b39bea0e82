#include "swarm/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace swarm {

namespace {

// RNG helpers pinned to mt19937_64 output so datasets are bit-identical
// across standard libraries (std::normal_distribution is not portable).
double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_gaussian(std::mt19937_64& rng) {
    double u1 = next_unit(rng);
    while (u1 <= 0.0) u1 = next_unit(rng);
    const double u2 = next_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.cols = ds.cols;
    out.seed = ds.seed;
    out.features.reserve(idx.size() * ds.cols);
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) {
        const double* r = ds.row(i);
        out.features.insert(out.features.end(), r, r + ds.cols);
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

std::vector<std::size_t> class_indices(const Dataset& ds, int label) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (ds.labels[i] == label) idx.push_back(i);
    }
    return idx;
}

}  // namespace

Dataset synth_dataset(std::size_t n, std::size_t d, double class_sep,
                      double positive_frac, std::int64_t seed) {
    if (positive_frac <= 0.0 || positive_frac >= 1.0) {
        throw SwarmError(ErrorCode::InvalidFraction,
                         "positive_frac must be in (0,1)");
    }
    if (n < 2 || d < 1) {
        throw SwarmError(ErrorCode::InvalidConfig, "synth_dataset: n >= 2 and d >= 1 required");
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));

    const std::size_t n_pos = round_half_up(static_cast<double>(n) * positive_frac);
    std::vector<int> labels(n, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
    std::shuffle(labels.begin(), labels.end(), rng);

    Dataset ds;
    ds.cols = d;
    ds.seed = seed;
    ds.labels = std::move(labels);
    ds.features.resize(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = (ds.labels[i] == 1 ? 0.5 : -0.5) * class_sep;
        for (std::size_t j = 0; j < d; ++j) {
            ds.features[i * d + j] = mean + next_gaussian(rng);
        }
    }
    return ds;
}

SplitResult split(const Dataset& ds, double train_frac, double val_frac,
                  std::int64_t seed) {
    if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac >= 1.0) {
        throw SwarmError(ErrorCode::InvalidFraction,
                         "split: need 0 < train_frac, 0 <= val_frac, train+val < 1");
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::vector<std::size_t> train_idx, val_idx, test_idx;
    for (int label : {0, 1}) {
        std::vector<std::size_t> pool = class_indices(ds, label);
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::size_t n_train = round_half_up(pool.size() * train_frac);
        const std::size_t n_val = round_half_up(pool.size() * val_frac);
        if (n_train + n_val > pool.size()) {
            throw SwarmError(ErrorCode::InvalidFraction, "split: fractions exhaust a class");
        }
        train_idx.insert(train_idx.end(), pool.begin(), pool.begin() + n_train);
        val_idx.insert(val_idx.end(), pool.begin() + n_train, pool.begin() + n_train + n_val);
        test_idx.insert(test_idx.end(), pool.begin() + n_train + n_val, pool.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {take_rows(ds, train_idx), take_rows(ds, val_idx), take_rows(ds, test_idx)};
}

std::vector<NodeShard> partition(const Dataset& ds, const PartitionPlan& plan,
                                 double val_frac) {
    if (plan.fractions.empty()) {
        throw SwarmError(ErrorCode::EmptyInput, "partition: no fractions");
    }
    double frac_sum = 0.0;
    for (double f : plan.fractions) {
        if (f <= 0.0 || f > 1.0) {
            throw SwarmError(ErrorCode::InvalidFraction, "partition: fraction outside (0,1]");
        }
        frac_sum += f;
    }
    if (frac_sum > 1.0 + 1e-9) {
        throw SwarmError(ErrorCode::InvalidFraction, "partition: fractions sum above 1");
    }
    if (plan.class_bias && plan.class_bias->size() != plan.fractions.size()) {
        throw SwarmError(ErrorCode::InvalidConfig, "partition: class_bias length mismatch");
    }

    std::mt19937_64 rng(static_cast<std::uint64_t>(plan.seed));
    std::vector<std::size_t> pos_pool = class_indices(ds, 1);
    std::vector<std::size_t> neg_pool = class_indices(ds, 0);
    std::shuffle(pos_pool.begin(), pos_pool.end(), rng);
    std::shuffle(neg_pool.begin(), neg_pool.end(), rng);
    const double global_pos_rate =
        ds.rows() == 0 ? 0.0 : static_cast<double>(pos_pool.size()) / ds.rows();

    std::size_t pos_used = 0, neg_used = 0;
    std::vector<NodeShard> shards;
    for (std::size_t k = 0; k < plan.fractions.size(); ++k) {
        const std::size_t count = round_half_up(plan.fractions[k] * ds.rows());
        if (count < 2) {
            throw SwarmError(ErrorCode::InsufficientData,
                             "partition: node " + std::to_string(k) + " would get < 2 samples");
        }
        const double target = plan.class_bias ? (*plan.class_bias)[k] : global_pos_rate;
        if (target < 0.0 || target > 1.0) {
            throw SwarmError(ErrorCode::InvalidFraction, "partition: class bias outside [0,1]");
        }
        std::size_t n_pos = round_half_up(count * target);
        std::size_t n_neg = count - n_pos;
        // Round-half-up can oversubscribe a pool by up to one sample per
        // node when the fractions sum to ~1; absorb that slack instead of
        // failing.
        const std::size_t slack = plan.fractions.size();
        const std::size_t pos_left = pos_pool.size() - pos_used;
        const std::size_t neg_left = neg_pool.size() - neg_used;
        if (n_pos > pos_left + slack || n_neg > neg_left + slack) {
            throw SwarmError(ErrorCode::InsufficientData,
                             "partition: class pool exhausted at node " + std::to_string(k));
        }
        n_pos = std::min(n_pos, pos_left);
        n_neg = std::min(n_neg, neg_left);
        std::vector<std::size_t> idx(pos_pool.begin() + pos_used,
                                     pos_pool.begin() + pos_used + n_pos);
        idx.insert(idx.end(), neg_pool.begin() + neg_used, neg_pool.begin() + neg_used + n_neg);
        pos_used += n_pos;
        neg_used += n_neg;
        std::sort(idx.begin(), idx.end());
        Dataset shard_all = take_rows(ds, idx);

        // Local train/validation split, seeded per node.
        SplitResult sr = split(shard_all, 1.0 - val_frac - 1e-12, val_frac,
                               plan.seed * 1000003 + static_cast<std::int64_t>(k));
        NodeShard shard;
        shard.node_id = static_cast<int>(k);
        shard.train = std::move(sr.train);
        shard.validation = std::move(sr.validation);
        // sr.test is empty by construction (train+val cover the shard).
        shard.train.features.insert(shard.train.features.end(), sr.test.features.begin(),
                                    sr.test.features.end());
        shard.train.labels.insert(shard.train.labels.end(), sr.test.labels.begin(),
                                  sr.test.labels.end());
        shards.push_back(std::move(shard));
    }
    return shards;
}

Dataset concat(const std::vector<Dataset>& parts) {
    if (parts.empty()) {
        throw SwarmError(ErrorCode::EmptyInput, "concat: no datasets");
    }
    Dataset out;
    out.cols = parts.front().cols;
    out.seed = parts.front().seed;
    for (const auto& p : parts) {
        if (p.cols != out.cols) {
            throw SwarmError(ErrorCode::ShapeMismatch, "concat: column count mismatch");
        }
        out.features.insert(out.features.end(), p.features.begin(), p.features.end());
        out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    }
    return out;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SwarmError(ErrorCode::IoError, "load_csv: cannot open " + path);
    }
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool first_data_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2) {
            throw SwarmError(ErrorCode::ParseError,
                             "load_csv: line " + std::to_string(line_no) + ": need >= 2 columns");
        }
        std::vector<double> row;
        bool numeric = true;
        for (const auto& c : cells) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(c, &pos));
                while (pos < c.size() && std::isspace(static_cast<unsigned char>(c[pos]))) ++pos;
                if (pos != c.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
            if (!numeric) break;
        }
        if (!numeric) {
            // Non-numeric first row is a header; anywhere else it is an error.
            if (line_no == 1) continue;
            throw SwarmError(ErrorCode::ParseError,
                             "load_csv: line " + std::to_string(line_no) + ": non-numeric cell");
        }
        if (first_data_row) {
            ds.cols = cells.size() - 1;
            first_data_row = false;
        } else if (cells.size() - 1 != ds.cols) {
            throw SwarmError(ErrorCode::ParseError,
                             "load_csv: line " + std::to_string(line_no) + ": column count varies");
        }
        const double lab = row.back();
        if (lab != 0.0 && lab != 1.0) {
            throw SwarmError(ErrorCode::LabelError,
                             "load_csv: line " + std::to_string(line_no) + ": label must be 0 or 1");
        }
        ds.features.insert(ds.features.end(), row.begin(), row.end() - 1);
        ds.labels.push_back(static_cast<int>(lab));
    }
    if (ds.rows() == 0) {
        throw SwarmError(ErrorCode::ParseError, "load_csv: no data rows in " + path);
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw SwarmError(ErrorCode::IoError, "write_csv: cannot open " + path);
    }
    char buf[64];
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < ds.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.row(i)[j]);
            out << buf << ',';
        }
        out << ds.labels[i] << '\n';
    }
    if (!out) {
        throw SwarmError(ErrorCode::IoError, "write_csv: write failed for " + path);
    }
}

}  // namespace swarm
