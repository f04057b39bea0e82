#include "swarm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "swarm/metrics.hpp"

namespace swarm {

namespace {

constexpr double kProbClamp = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_prob(double p) {
    return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Layout offsets into the flat weight vector.
struct Layout {
    std::size_t w1, b1, w2, b2;  // w2/b2 unused for logistic regression
    std::size_t in, hid;
};

Layout layout_of(const ModelSpec& spec) {
    Layout l{};
    l.in = spec.input_dim;
    l.hid = spec.hidden_dim;
    if (spec.hidden_dim == 0) {
        l.w1 = 0;
        l.b1 = spec.input_dim;
    } else {
        l.w1 = 0;
        l.b1 = spec.hidden_dim * spec.input_dim;
        l.w2 = l.b1 + spec.hidden_dim;
        l.b2 = l.w2 + spec.hidden_dim;
    }
    return l;
}

void check_input(const ModelSpec& spec, const Dataset& data) {
    if (data.cols != spec.input_dim) {
        throw SwarmError(ErrorCode::ShapeMismatch, "forward: feature width != input_dim");
    }
}

}  // namespace

ShapeSpec ModelSpec::shape() const {
    if (hidden_dim == 0) {
        return ShapeSpec{{{1, input_dim}, {1, 1}}};
    }
    return ShapeSpec{{{hidden_dim, input_dim}, {hidden_dim, 1}, {1, hidden_dim}, {1, 1}}};
}

void TrainConfig::validate() const {
    if (epochs < 1 || batch_size < 1 || patience < 1 || !(lr_initial > lr_min) || lr_min < 0.0) {
        throw SwarmError(ErrorCode::InvalidConfig, "TrainConfig: invalid field");
    }
}

WeightVector init_model(const ModelSpec& spec, std::int64_t seed) {
    if (spec.input_dim < 1) {
        throw SwarmError(ErrorCode::InvalidConfig, "init_model: input_dim >= 1 required");
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const ShapeSpec shape = spec.shape();
    std::vector<double> w(shape.total_len(), 0.0);
    const Layout l = layout_of(spec);
    auto fill_uniform = [&](std::size_t off, std::size_t count, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) {
            w[off + i] = (2.0 * next_unit(rng) - 1.0) * bound;
        }
    };
    if (spec.hidden_dim == 0) {
        fill_uniform(l.w1, spec.input_dim, spec.input_dim);
    } else {
        fill_uniform(l.w1, spec.hidden_dim * spec.input_dim, spec.input_dim);
        fill_uniform(l.w2, spec.hidden_dim, spec.hidden_dim);
    }
    return WeightVector(std::move(w), shape);
}

std::vector<double> forward(const ModelSpec& spec, const WeightVector& weights,
                            const Dataset& data) {
    check_input(spec, data);
    if (weights.shape() != spec.shape()) {
        throw SwarmError(ErrorCode::ShapeMismatch, "forward: weight shape != model shape");
    }
    const Layout l = layout_of(spec);
    const auto& w = weights.values();
    std::vector<double> probs(data.rows());
    std::vector<double> hidden(l.hid);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const double* x = data.row(i);
        double z;
        if (l.hid == 0) {
            z = w[l.b1];
            for (std::size_t j = 0; j < l.in; ++j) z += w[l.w1 + j] * x[j];
        } else {
            for (std::size_t h = 0; h < l.hid; ++h) {
                double a = w[l.b1 + h];
                for (std::size_t j = 0; j < l.in; ++j) a += w[l.w1 + h * l.in + j] * x[j];
                hidden[h] = a > 0.0 ? a : 0.0;
            }
            z = w[l.b2];
            for (std::size_t h = 0; h < l.hid; ++h) z += w[l.w2 + h] * hidden[h];
        }
        probs[i] = sigmoid(z);
    }
    return probs;
}

std::vector<double> hidden_activations(const ModelSpec& spec, const WeightVector& weights,
                                       const Dataset& data, std::size_t& out_dim) {
    check_input(spec, data);
    const Layout l = layout_of(spec);
    if (l.hid == 0) {
        out_dim = data.cols;
        return data.features;
    }
    const auto& w = weights.values();
    out_dim = l.hid;
    std::vector<double> acts(data.rows() * l.hid);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const double* x = data.row(i);
        for (std::size_t h = 0; h < l.hid; ++h) {
            double a = w[l.b1 + h];
            for (std::size_t j = 0; j < l.in; ++j) a += w[l.w1 + h * l.in + j] * x[j];
            acts[i * l.hid + h] = a > 0.0 ? a : 0.0;
        }
    }
    return acts;
}

std::pair<double, WeightVector> loss_and_gradient(const ModelSpec& spec,
                                                  const WeightVector& weights,
                                                  const Dataset& data,
                                                  const std::vector<std::size_t>& batch_idx) {
    check_input(spec, data);
    std::vector<std::size_t> all;
    const std::vector<std::size_t>* idx = &batch_idx;
    if (batch_idx.empty()) {
        all.resize(data.rows());
        std::iota(all.begin(), all.end(), 0);
        idx = &all;
    }
    if (idx->empty()) {
        throw SwarmError(ErrorCode::EmptyInput, "loss_and_gradient: empty batch");
    }
    const Layout l = layout_of(spec);
    const auto& w = weights.values();
    std::vector<double> grad(w.size(), 0.0);
    std::vector<double> hidden(l.hid);
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(idx->size());

    for (std::size_t i : *idx) {
        const double* x = data.row(i);
        const double y = static_cast<double>(data.labels[i]);
        double z;
        if (l.hid == 0) {
            z = w[l.b1];
            for (std::size_t j = 0; j < l.in; ++j) z += w[l.w1 + j] * x[j];
        } else {
            for (std::size_t h = 0; h < l.hid; ++h) {
                double a = w[l.b1 + h];
                for (std::size_t j = 0; j < l.in; ++j) a += w[l.w1 + h * l.in + j] * x[j];
                hidden[h] = a > 0.0 ? a : 0.0;
            }
            z = w[l.b2];
            for (std::size_t h = 0; h < l.hid; ++h) z += w[l.w2 + h] * hidden[h];
        }
        const double p = clamp_prob(sigmoid(z));
        loss += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p)) * inv_b;

        const double dz = (p - y) * inv_b;
        if (l.hid == 0) {
            for (std::size_t j = 0; j < l.in; ++j) grad[l.w1 + j] += dz * x[j];
            grad[l.b1] += dz;
        } else {
            for (std::size_t h = 0; h < l.hid; ++h) {
                grad[l.w2 + h] += dz * hidden[h];
                if (hidden[h] > 0.0) {
                    const double dh = dz * w[l.w2 + h];
                    for (std::size_t j = 0; j < l.in; ++j) {
                        grad[l.w1 + h * l.in + j] += dh * x[j];
                    }
                    grad[l.b1 + h] += dh;
                }
            }
            grad[l.b2] += dz;
        }
    }
    return {loss, WeightVector(std::move(grad), weights.shape())};
}

std::pair<WeightVector, OptimizerState> adamw_step(const WeightVector& weights,
                                                   const WeightVector& grad,
                                                   OptimizerState state, double lr) {
    if (weights.shape() != grad.shape()) {
        throw SwarmError(ErrorCode::ShapeMismatch, "adamw_step: weight/grad shape mismatch");
    }
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw SwarmError(ErrorCode::NonFinite, "adamw_step: lr must be positive and finite");
    }
    const std::size_t n = weights.size();
    if (state.first_moment.empty()) state.first_moment.assign(n, 0.0);
    if (state.second_moment.empty()) state.second_moment.assign(n, 0.0);
    if (state.first_moment.size() != n || state.second_moment.size() != n) {
        throw SwarmError(ErrorCode::ShapeMismatch, "adamw_step: moment size mismatch");
    }

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * g;
        state.second_moment[i] =
            state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        // Decoupled weight decay, then the Adam step.
        double w = weights[i] * (1.0 - lr * state.weight_decay);
        w -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        out[i] = w;
    }
    return {WeightVector(std::move(out), weights.shape()), std::move(state)};
}

double cosine_lr(std::size_t t, std::size_t total_epochs, double lr0, double lr_min) {
    if (total_epochs < 1 || t > total_epochs) {
        throw SwarmError(ErrorCode::RangeError, "cosine_lr: t outside [0, T]");
    }
    const double frac = static_cast<double>(t) / static_cast<double>(total_epochs);
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(M_PI * frac));
}

Trainer::Trainer(ModelSpec spec, TrainConfig cfg, WeightVector initial)
    : spec_(spec), cfg_(cfg), weights_(std::move(initial)), best_weights_(weights_) {
    cfg_.validate();
    if (weights_.shape() != spec_.shape()) {
        throw SwarmError(ErrorCode::ShapeMismatch, "Trainer: initial weights wrong shape");
    }
}

void Trainer::observe_validation(double val_auc, const WeightVector& weights,
                                 bool counts_toward_patience) {
    if (val_auc > best_val_auc_ + 1e-4) {
        best_val_auc_ = val_auc;
        best_weights_ = weights;
        since_improve_ = 0;
    } else if (counts_toward_patience) {
        ++since_improve_;
        if (since_improve_ >= cfg_.patience) stopped_ = true;
    }
}

void Trainer::adopt_weights(const WeightVector& w) {
    if (w.shape() != spec_.shape()) {
        throw SwarmError(ErrorCode::ShapeMismatch, "adopt_weights: shape mismatch");
    }
    weights_ = w;
    // Adoption starts a fresh trajectory; give it a full patience window to
    // improve on the best-so-far before early stopping can fire.
    since_improve_ = 0;
    stopped_ = false;
}

bool Trainer::run_epochs(const NodeShard& shard, std::size_t budget) {
    if (budget < 1) {
        throw SwarmError(ErrorCode::InvalidConfig, "run_epochs: budget >= 1 required");
    }
    if (shard.train.rows() == 0) {
        throw SwarmError(ErrorCode::EmptyInput, "run_epochs: empty training shard");
    }
    const std::size_t n = shard.train.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t e = 0; e < budget && !stopped_ && epoch_ < cfg_.epochs; ++e) {
        const double lr = cosine_lr(epoch_, cfg_.epochs, cfg_.lr_initial, cfg_.lr_min);
        // Shuffle seeded by (seed, global epoch) so the stream is identical
        // whether epochs run in one call or split across rounds.
        std::mt19937_64 rng(static_cast<std::uint64_t>(cfg_.seed) * 0x9e3779b97f4a7c15ULL +
                            static_cast<std::uint64_t>(epoch_) + 1);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
            const std::size_t end = std::min(n, start + cfg_.batch_size);
            std::vector<std::size_t> batch(order.begin() + start, order.begin() + end);
            auto [loss, grad] = loss_and_gradient(spec_, weights_, shard.train, batch);
            auto [w2, s2] = adamw_step(weights_, grad, std::move(opt_), lr);
            weights_ = std::move(w2);
            opt_ = std::move(s2);
            loss_sum += loss;
            ++batches;
        }

        EpochRecord rec;
        rec.epoch = epoch_;
        rec.lr_used = lr;
        rec.train_loss = loss_sum / static_cast<double>(batches);
        rec.train_auc = roc_auc(forward(spec_, weights_, shard.train), shard.train.labels);
        rec.val_auc = shard.validation.rows() > 0
                          ? roc_auc(forward(spec_, weights_, shard.validation),
                                    shard.validation.labels)
                          : rec.train_auc;
        history_.push_back(rec);
        ++epoch_;
        observe_validation(rec.val_auc, weights_);
    }
    return stopped_;
}

void Trainer::restore(WeightVector weights, WeightVector best, double best_auc,
                      OptimizerState opt, std::size_t epoch, std::size_t since_improve,
                      bool stopped, EpochHistory history) {
    weights_ = std::move(weights);
    best_weights_ = std::move(best);
    best_val_auc_ = best_auc;
    opt_ = std::move(opt);
    epoch_ = epoch;
    since_improve_ = since_improve;
    stopped_ = stopped;
    history_ = std::move(history);
}

TrainOutcome train_epochs(const NodeShard& shard, const WeightVector& weights,
                          const TrainConfig& cfg, std::size_t epoch_budget,
                          const ModelSpec& spec) {
    Trainer t(spec, cfg, weights);
    const bool stopped = t.run_epochs(shard, epoch_budget);
    return {t.best_weights(), t.history(), stopped};
}

}  // namespace swarm
