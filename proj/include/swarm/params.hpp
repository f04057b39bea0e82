#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "swarm/error.hpp"

namespace swarm {

// Declared tensor layout of a flattened parameter vector. A bias is a
// (len, 1) entry.
struct ShapeSpec {
    std::vector<std::pair<std::size_t, std::size_t>> tensors;

    std::size_t total_len() const {
        std::size_t n = 0;
        for (const auto& [r, c] : tensors) n += r * c;
        return n;
    }

    bool operator==(const ShapeSpec&) const = default;
};

// Flat ordered model parameters. Values are validated finite at
// construction and immutable afterwards.
class WeightVector {
public:
    WeightVector(std::vector<double> values, ShapeSpec shape);

    const std::vector<double>& values() const { return values_; }
    const ShapeSpec& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const WeightVector&) const = default;

private:
    std::vector<double> values_;
    ShapeSpec shape_;
};

// Σ coeffs[k]·vectors[k] / Σ coeffs, element-wise. Coefficients must be
// nonnegative with positive sum. Per-coordinate summation uses pairwise
// (tree) order over the input index so permuting inputs changes nothing
// beyond that canonical order.
WeightVector linear_combine(const std::vector<WeightVector>& vectors,
                            const std::vector<double>& coeffs);

double l2_distance(const WeightVector& a, const WeightVector& b);

// Pairwise (tree) summation over a span, ascending index.
double pairwise_sum(std::span<const double> xs);

}  // namespace swarm
