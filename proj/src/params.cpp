#include "swarm/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swarm {

WeightVector::WeightVector(std::vector<double> values, ShapeSpec shape)
    : values_(std::move(values)), shape_(std::move(shape)) {
    if (shape_.total_len() == 0) {
        throw SwarmError(ErrorCode::ShapeMismatch, "ShapeSpec.total_len must be > 0");
    }
    if (values_.size() != shape_.total_len()) {
        throw SwarmError(ErrorCode::ShapeMismatch,
                         "value count " + std::to_string(values_.size()) +
                             " != shape total_len " + std::to_string(shape_.total_len()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw SwarmError(ErrorCode::NonFinite, "non-finite weight value");
        }
    }
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    if (xs.size() == 1) return xs[0];
    if (xs.size() == 2) return xs[0] + xs[1];
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

WeightVector linear_combine(const std::vector<WeightVector>& vectors,
                            const std::vector<double>& coeffs) {
    if (vectors.empty()) {
        throw SwarmError(ErrorCode::EmptyInput, "linear_combine: no vectors");
    }
    if (coeffs.size() != vectors.size()) {
        throw SwarmError(ErrorCode::ShapeMismatch,
                         "linear_combine: coeffs/vectors length mismatch");
    }
    const ShapeSpec& shape = vectors.front().shape();
    for (const auto& v : vectors) {
        if (v.shape() != shape) {
            throw SwarmError(ErrorCode::ShapeMismatch, "linear_combine: shape mismatch");
        }
    }
    for (double c : coeffs) {
        if (!std::isfinite(c)) {
            throw SwarmError(ErrorCode::NonFinite, "linear_combine: non-finite coefficient");
        }
        if (c < 0.0) {
            throw SwarmError(ErrorCode::NonFinite, "linear_combine: negative coefficient");
        }
    }
    std::vector<double> sorted_coeffs = coeffs;
    std::sort(sorted_coeffs.begin(), sorted_coeffs.end());
    const double coeff_sum = pairwise_sum(sorted_coeffs);
    if (!(coeff_sum > 0.0)) {
        throw SwarmError(ErrorCode::EmptyInput, "linear_combine: sum of coefficients is 0");
    }
    // Single input: identity must hold bit-exactly, so skip the arithmetic.
    if (vectors.size() == 1) return vectors.front();

    const std::size_t n = shape.total_len();
    const std::size_t k = vectors.size();
    std::vector<double> out(n);
    std::vector<double> terms(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            terms[j] = coeffs[j] * vectors[j][i];
        }
        // Canonical ascending order makes the result independent of the
        // order the inputs were supplied in.
        std::sort(terms.begin(), terms.end());
        out[i] = pairwise_sum(terms) / coeff_sum;
    }
    return WeightVector(std::move(out), shape);
}

double l2_distance(const WeightVector& a, const WeightVector& b) {
    if (a.shape() != b.shape()) {
        throw SwarmError(ErrorCode::ShapeMismatch, "l2_distance: shape mismatch");
    }
    std::vector<double> sq(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq[i] = d * d;
    }
    return std::sqrt(pairwise_sum(sq));
}

}  // namespace swarm
