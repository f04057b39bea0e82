#pragma once

#include <cstdint>
#include <vector>

#include "swarm/data.hpp"
#include "swarm/params.hpp"

namespace swarm {

// Desk-scale classifier: optional ReLU hidden layer, single sigmoid output.
// hidden_dim == 0 means plain logistic regression.
struct ModelSpec {
    std::size_t input_dim = 1;
    std::size_t hidden_dim = 0;

    ShapeSpec shape() const;
};

struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::size_t step_count = 0;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    double lr_initial = 1e-4;
    double lr_min = 0.0;
    std::size_t patience = 5;
    std::int64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // global epoch index, 0-based
    double train_auc = 0.0;
    double val_auc = 0.0;
    double train_loss = 0.0;
    double lr_used = 0.0;
};
using EpochHistory = std::vector<EpochRecord>;

WeightVector init_model(const ModelSpec& spec, std::int64_t seed);

// One probability per feature row.
std::vector<double> forward(const ModelSpec& spec, const WeightVector& weights,
                            const Dataset& data);

// Hidden-layer activations (penultimate features); raw features when
// hidden_dim == 0.
std::vector<double> hidden_activations(const ModelSpec& spec, const WeightVector& weights,
                                       const Dataset& data, std::size_t& out_dim);

// Mean binary cross-entropy and its gradient over the batch rows given by
// `batch_idx` (all rows when empty).
std::pair<double, WeightVector> loss_and_gradient(const ModelSpec& spec,
                                                  const WeightVector& weights,
                                                  const Dataset& data,
                                                  const std::vector<std::size_t>& batch_idx = {});

std::pair<WeightVector, OptimizerState> adamw_step(const WeightVector& weights,
                                                   const WeightVector& grad,
                                                   OptimizerState state, double lr);

double cosine_lr(std::size_t t, std::size_t total_epochs, double lr0, double lr_min);

// Carries weights, optimizer moments, the global epoch counter, and the
// early-stopping tracker across rounds so a swarm node's epoch stream is
// bit-identical to an uninterrupted standalone run.
class Trainer {
public:
    Trainer(ModelSpec spec, TrainConfig cfg, WeightVector initial);

    // Runs up to `budget` epochs of shuffled mini-batch AdamW on the shard.
    // Returns true if early stopping fired inside the budget.
    bool run_epochs(const NodeShard& shard, std::size_t budget);

    // Feed a validation AUC into the best-weights tracker. Patience counts
    // epochs; post-merge evaluations update the tracker without consuming a
    // patience tick.
    void observe_validation(double val_auc, const WeightVector& weights,
                            bool counts_toward_patience = true);

    // Replace current weights (gate-accepted merge result).
    void adopt_weights(const WeightVector& w);

    const WeightVector& current_weights() const { return weights_; }
    const WeightVector& best_weights() const { return best_weights_; }
    double best_val_auc() const { return best_val_auc_; }
    const EpochHistory& history() const { return history_; }
    std::size_t epoch() const { return epoch_; }
    bool stopped() const { return stopped_; }
    const OptimizerState& optimizer() const { return opt_; }
    const ModelSpec& model_spec() const { return spec_; }
    const TrainConfig& config() const { return cfg_; }

    // Checkpoint support: restore full mutable state.
    void restore(WeightVector weights, WeightVector best, double best_auc,
                 OptimizerState opt, std::size_t epoch, std::size_t since_improve,
                 bool stopped, EpochHistory history);
    std::size_t epochs_since_improve() const { return since_improve_; }

private:
    ModelSpec spec_;
    TrainConfig cfg_;
    WeightVector weights_;
    WeightVector best_weights_;
    double best_val_auc_ = -1.0;
    OptimizerState opt_;
    std::size_t epoch_ = 0;
    std::size_t since_improve_ = 0;
    bool stopped_ = false;
    EpochHistory history_;
};

// Single-shot convenience wrapper over Trainer.
struct TrainOutcome {
    WeightVector weights;  // best-validation weights
    EpochHistory history;
    bool stopped_early = false;
};
TrainOutcome train_epochs(const NodeShard& shard, const WeightVector& weights,
                          const TrainConfig& cfg, std::size_t epoch_budget,
                          const ModelSpec& spec);

}  // namespace swarm
