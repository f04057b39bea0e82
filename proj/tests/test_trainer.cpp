#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "swarm/metrics.hpp"
#include "swarm/trainer.hpp"

using namespace swarm;

namespace {

Dataset tiny_dataset(std::size_t n, std::size_t d, std::int64_t seed, double sep = 1.0) {
    return synth_dataset(n, d, sep, 0.5, seed);
}

NodeShard make_shard(std::size_t n, std::size_t d, std::int64_t seed, double sep = 2.0) {
    auto ds = synth_dataset(n, d, sep, 0.5, seed);
    auto s = split(ds, 0.8, 0.1, seed + 1);
    return NodeShard{std::move(s.train), std::move(s.validation), 0};
}

}  // namespace

TEST_CASE("model shape arithmetic") {
    ModelSpec lr{4, 0};
    CHECK(lr.shape().total_len() == 5);  // 4 weights + bias
    ModelSpec mlp{16, 8};
    CHECK(mlp.shape().total_len() == 16 * 8 + 8 + 8 + 1);
}

TEST_CASE("init_model: deterministic, zero biases, bounded weights") {
    ModelSpec spec{4, 0};
    auto a = init_model(spec, 9);
    auto b = init_model(spec, 9);
    CHECK(a == b);
    CHECK(a != init_model(spec, 10));
    CHECK(a[4] == 0.0);  // bias
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i]) <= 0.5 + 1e-12);  // 1/sqrt(4)

    ModelSpec mlp{6, 3};
    auto w = init_model(mlp, 1);
    // hidden biases and output bias all zero
    for (std::size_t i = 18; i < 21; ++i) CHECK(w[i] == 0.0);
    CHECK(w[w.size() - 1] == 0.0);
}

TEST_CASE("forward basics") {
    ModelSpec spec{2, 0};
    Dataset data;
    data.cols = 2;
    data.features = {0.0, 5.0};
    data.labels = {1};

    auto zero = WeightVector(std::vector<double>(3, 0.0), spec.shape());
    CHECK(forward(spec, zero, data)[0] == doctest::Approx(0.5));

    auto w = WeightVector({1.0, 0.0, 0.0}, spec.shape());  // orthogonal to the feature
    CHECK(forward(spec, w, data)[0] == doctest::Approx(0.5));
}

TEST_CASE("forward matches an independent straight-line oracle") {
    std::mt19937_64 rng(11);
    ModelSpec spec{5, 3};
    auto ds = tiny_dataset(20, 5, 2);
    auto w = init_model(spec, 3);
    auto got = forward(spec, w, ds);
    // oracle: explicit loops over W1(3x5), b1(3), W2(1x3), b2(1)
    const auto& v = w.values();
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        double hidden[3];
        for (int h = 0; h < 3; ++h) {
            double z = v[15 + h];  // b1 after the 15 W1 entries
            for (int j = 0; j < 5; ++j) z += v[h * 5 + j] * ds.row(i)[j];
            hidden[h] = z > 0 ? z : 0;
        }
        double z = v[21];  // b2 after W2
        for (int h = 0; h < 3; ++h) z += v[18 + h] * hidden[h];
        double p = 1.0 / (1.0 + std::exp(-z));
        REQUIRE(got[i] == doctest::Approx(p).epsilon(1e-12));
    }
    (void)rng;
}

TEST_CASE("loss at p=0.5 is ln 2; confident predictions drive it to zero") {
    ModelSpec spec{2, 0};
    auto ds = tiny_dataset(64, 2, 4);
    auto zero = WeightVector(std::vector<double>(3, 0.0), spec.shape());
    auto [loss, grad] = loss_and_gradient(spec, zero, ds);
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(grad.shape() == spec.shape());

    // a huge aligned weight on separable far-apart classes -> tiny loss
    auto easy = synth_dataset(64, 2, 20.0, 0.5, 5);
    auto big = WeightVector({50.0, 50.0, 0.0}, spec.shape());
    auto [l2, g2] = loss_and_gradient(spec, big, easy);
    CHECK(l2 < 1e-6);
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(2718);
    auto uniform = [&] { return (double)(rng() >> 11) * 0x1.0p-53; };
    int cases = 0;
    while (cases < 20) {
        std::size_t d = 2 + rng() % 7;
        std::size_t hid = (rng() % 2) ? 0 : 1 + rng() % 4;
        ModelSpec spec{d, hid};
        auto ds = tiny_dataset(8 + rng() % 24, d, (std::int64_t)rng() % 1000, 1.5);
        std::vector<double> w0(spec.shape().total_len());
        for (auto& x : w0) x = uniform() * 2.0 - 1.0;
        WeightVector w(w0, spec.shape());
        auto [loss, grad] = loss_and_gradient(spec, w, ds);

        const double h = 1e-6;
        for (std::size_t i = 0; i < w0.size(); ++i) {
            auto wp = w0, wm = w0;
            wp[i] += h;
            wm[i] -= h;
            double lp = loss_and_gradient(spec, WeightVector(wp, spec.shape()), ds).first;
            double lm = loss_and_gradient(spec, WeightVector(wm, spec.shape()), ds).first;
            double fd = (lp - lm) / (2 * h);
            double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
            REQUIRE(std::abs(grad[i] - fd) / denom < 1e-4);
        }
        ++cases;
        (void)loss;
    }
}

TEST_CASE("adamw_step analytic cases") {
    ShapeSpec shape{{{1, 1}}};
    SUBCASE("zero grad, zero decay is a fixed point") {
        OptimizerState st;
        st.first_moment.assign(1, 0.0);
        st.second_moment.assign(1, 0.0);
        st.weight_decay = 0.0;
        auto [w2, st2] = adamw_step(WeightVector({1.0}, shape), WeightVector({0.0}, shape),
                                    st, 0.01);
        CHECK(w2[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(st2.step_count == 1);
    }
    SUBCASE("decay-only step is analytic") {
        OptimizerState st;
        st.first_moment.assign(1, 0.0);
        st.second_moment.assign(1, 0.0);
        st.weight_decay = 0.1;
        auto [w2, st2] = adamw_step(WeightVector({1.0}, shape), WeightVector({0.0}, shape),
                                    st, 0.01);
        CHECK(w2[0] == doctest::Approx(0.999).epsilon(1e-12));  // 1 - lr*wd = 1 - 0.001
    }
    SUBCASE("single step from zero moments matches the hand-computed update") {
        OptimizerState st;
        st.first_moment.assign(1, 0.0);
        st.second_moment.assign(1, 0.0);
        st.weight_decay = 0.0;
        const double lr = 0.01, g = 1.0;
        auto [w2, st2] = adamw_step(WeightVector({2.0}, shape), WeightVector({g}, shape),
                                    st, lr);
        // m_hat = g, v_hat = g^2; delta = -lr * g / (|g| + eps)
        double want = 2.0 - lr * g / (std::sqrt(g * g) + 1e-8);
        CHECK(w2[0] == doctest::Approx(want).epsilon(1e-12));
        CHECK(st2.first_moment[0] == doctest::Approx(0.1).epsilon(1e-12));     // (1-b1)*g
        CHECK(st2.second_moment[0] == doctest::Approx(0.001).epsilon(1e-12));  // (1-b2)*g^2
    }
    SUBCASE("shape mismatch rejected") {
        OptimizerState st;
        st.first_moment.assign(1, 0.0);
        st.second_moment.assign(1, 0.0);
        ShapeSpec s2{{{2, 1}}};
        CHECK_THROWS_AS(adamw_step(WeightVector({1.0}, shape),
                                   WeightVector({1.0, 1.0}, s2), st, 0.01),
                        SwarmError);
    }
}

TEST_CASE("cosine_lr endpoints, midpoint, monotonicity, range check") {
    CHECK(cosine_lr(0, 20, 1e-4, 0.0) == doctest::Approx(1e-4));
    CHECK(cosine_lr(20, 20, 1e-4, 0.0) == doctest::Approx(0.0));
    CHECK(cosine_lr(10, 20, 1e-4, 0.0) == doctest::Approx(5e-5));
    double prev = cosine_lr(0, 20, 1e-4, 1e-6);
    for (std::size_t t = 1; t <= 20; ++t) {
        double cur = cosine_lr(t, 20, 1e-4, 1e-6);
        REQUIRE(cur <= prev + 1e-18);
        prev = cur;
    }
    CHECK_THROWS_AS(cosine_lr(21, 20, 1e-4, 0.0), SwarmError);
}

TEST_CASE("train_epochs: budget bound, history, loss decreases, AUC on separable data") {
    auto shard = make_shard(600, 8, 42, 4.0);
    ModelSpec spec{8, 0};
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 32;
    cfg.lr_initial = 1e-2;
    cfg.patience = 10;
    cfg.seed = 1;
    auto w0 = init_model(spec, 5);

    auto one = train_epochs(shard, w0, cfg, 1, spec);
    CHECK(one.history.size() == 1);

    auto out = train_epochs(shard, w0, cfg, 10, spec);
    REQUIRE(out.history.size() >= 5);
    CHECK(out.history[4].train_loss < out.history[0].train_loss);
    CHECK(out.history.back().train_auc >= 0.99);
    // lr follows the schedule, indexed by global epoch
    for (const auto& rec : out.history)
        REQUIRE(rec.lr_used == doctest::Approx(cosine_lr(rec.epoch, 10, 1e-2, 0.0)));
}

TEST_CASE("returned weights correspond to the max-val-AUC epoch") {
    auto shard = make_shard(400, 6, 7, 1.2);
    ModelSpec spec{6, 4};
    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.lr_initial = 5e-2;
    cfg.patience = 12;
    cfg.seed = 3;
    auto out = train_epochs(shard, init_model(spec, 2), cfg, 12, spec);
    double best = -1;
    for (const auto& rec : out.history) best = std::max(best, rec.val_auc);
    // evaluate returned weights on the validation split: must equal the best
    auto scores = forward(spec, out.weights, shard.validation);
    double auc = roc_auc(scores, shard.validation.labels);
    CHECK(auc == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("early stopping fires on chance-level data") {
    // sep=0: validation AUC cannot improve systematically
    int stopped = 0;
    for (std::int64_t seed = 1; seed <= 5; ++seed) {
        auto ds = synth_dataset(300, 4, 0.0, 0.5, seed);
        auto s = split(ds, 0.8, 0.15, seed);
        NodeShard shard{std::move(s.train), std::move(s.validation), 0};
        ModelSpec spec{4, 0};
        TrainConfig cfg;
        cfg.epochs = 20;
        cfg.lr_initial = 1e-3;
        cfg.patience = 1;
        cfg.seed = seed;
        auto out = train_epochs(shard, init_model(spec, seed), cfg, 20, spec);
        if (out.stopped_early && out.history.size() <= 3) ++stopped;
    }
    CHECK(stopped >= 4);
}

TEST_CASE("training is bit-deterministic") {
    auto shard = make_shard(500, 8, 77, 2.0);
    ModelSpec spec{8, 4};
    TrainConfig cfg;
    cfg.epochs = 6;
    cfg.lr_initial = 1e-2;
    cfg.seed = 9;
    auto w0 = init_model(spec, 4);
    auto a = train_epochs(shard, w0, cfg, 6, spec);
    auto b = train_epochs(shard, w0, cfg, 6, spec);
    CHECK(a.weights == b.weights);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        REQUIRE(a.history[i].train_loss == b.history[i].train_loss);
        REQUIRE(a.history[i].val_auc == b.history[i].val_auc);
    }
}

TEST_CASE("Trainer round-chunked epochs equal one uninterrupted run bit-exactly") {
    auto shard = make_shard(500, 8, 31, 2.0);
    ModelSpec spec{8, 4};
    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.lr_initial = 1e-2;
    cfg.patience = 12;
    cfg.seed = 6;
    auto w0 = init_model(spec, 8);

    Trainer whole(spec, cfg, w0);
    whole.run_epochs(shard, 12);

    Trainer chunked(spec, cfg, w0);
    for (int r = 0; r < 4; ++r) chunked.run_epochs(shard, 3);

    CHECK(whole.current_weights() == chunked.current_weights());
    CHECK(whole.best_weights() == chunked.best_weights());
    REQUIRE(whole.history().size() == chunked.history().size());
    for (std::size_t i = 0; i < whole.history().size(); ++i)
        REQUIRE(whole.history()[i].train_loss == chunked.history()[i].train_loss);
}

TEST_CASE("TrainConfig validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), SwarmError);
    cfg = TrainConfig{};
    cfg.lr_initial = 0.0;
    CHECK_THROWS_AS(cfg.validate(), SwarmError);
    cfg = TrainConfig{};
    cfg.patience = 0;
    CHECK_THROWS_AS(cfg.validate(), SwarmError);
}
