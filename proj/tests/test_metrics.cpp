#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "swarm/metrics.hpp"

using namespace swarm;

namespace {

// O(P*N) pair-counting oracle: P(random positive outscores random negative),
// ties worth one half.
double pair_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            ++pairs;
            if (s[i] > s[j]) wins += 1.0;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / (double)pairs;
}

}  // namespace

TEST_CASE("roc_auc basics") {
    CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), SwarmError);
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {0, 0}), SwarmError);
}

TEST_CASE("roc_auc matches pair-counting oracle with ties") {
    std::mt19937_64 rng(123);
    for (int rep = 0; rep < 300; ++rep) {
        std::size_t n = 5 + rng() % 196;
        std::vector<double> s(n);
        std::vector<int> y(n);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = (double)(rng() % 20) / 20.0;  // coarse grid forces ties
            y[i] = (int)(rng() % 2);
        }
        y[0] = 1;
        y[1] = 0;
        for (int v : y) (v ? pos : neg) = true;
        REQUIRE((pos && neg));
        REQUIRE(std::abs(roc_auc(s, y) - pair_auc(s, y)) <= 1e-12);
    }
}

TEST_CASE("roc_auc invariances") {
    std::mt19937_64 rng(321);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 6 + rng() % 100;
        std::vector<double> s(n);
        std::vector<int> y(n), yflip(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = (double)(rng() >> 11) * 0x1.0p-53;
            y[i] = (int)(rng() % 2);
        }
        y[0] = 1;
        y[1] = 0;
        for (std::size_t i = 0; i < n; ++i) yflip[i] = 1 - y[i];
        double base = roc_auc(s, y);
        // strictly increasing transform
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) + 7.0;
        REQUIRE(std::abs(roc_auc(t, y) - base) <= 1e-12);
        // label flip
        REQUIRE(std::abs(roc_auc(s, yflip) - (1.0 - base)) <= 1e-12);
    }
}

TEST_CASE("confusion_at_threshold counts and threshold edge") {
    auto c = confusion_at_threshold({0.6, 0.4}, {1, 0}, 0.5);
    CHECK(c.tp == 1);
    CHECK(c.tn == 1);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);

    auto all_pos = confusion_at_threshold({0.1, 0.9, 0.0}, {0, 1, 1}, 0.0);
    CHECK(all_pos.tp + all_pos.fp == 3);  // score >= 0 everywhere

    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> s(20);
        std::vector<int> y(20);
        for (int i = 0; i < 20; ++i) {
            s[i] = (double)(rng() % 10) / 10.0;
            y[i] = (int)(rng() % 2);
        }
        double tau = (double)(rng() % 10) / 10.0;
        auto got = confusion_at_threshold(s, y, tau);
        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (int i = 0; i < 20; ++i) {
            bool p = s[i] >= tau;
            if (p && y[i] == 1) ++tp;
            if (p && y[i] == 0) ++fp;
            if (!p && y[i] == 0) ++tn;
            if (!p && y[i] == 1) ++fn;
        }
        REQUIRE(got.tp == tp);
        REQUIRE(got.fp == fp);
        REQUIRE(got.tn == tn);
        REQUIRE(got.fn == fn);
        REQUIRE(got.total() == 20);
    }
}

TEST_CASE("classification_report hand example: tp=3 fp=1 tn=4 fn=2") {
    // scores: 3 positives above tau, 2 below; 1 negative above, 4 below
    std::vector<double> s{0.9, 0.8, 0.7, 0.2, 0.1, 0.6, 0.3, 0.3, 0.2, 0.1};
    std::vector<int> y{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    auto r = classification_report(s, y, 0.5);
    CHECK(r.sensitivity == doctest::Approx(0.6));
    CHECK(r.specificity == doctest::Approx(0.8));
    CHECK(r.precision == doctest::Approx(0.75));
    CHECK(r.recall == doctest::Approx(0.6));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("classification_report perfect classifier and 0/0 rule") {
    auto perfect = classification_report({0.99, 0.98, 0.01, 0.02}, {1, 1, 0, 0}, 0.5);
    CHECK(perfect.auc == doctest::Approx(1.0));
    CHECK(perfect.sensitivity == doctest::Approx(1.0));
    CHECK(perfect.specificity == doctest::Approx(1.0));
    CHECK(perfect.precision == doctest::Approx(1.0));
    CHECK(perfect.f1 == doctest::Approx(1.0));

    // nothing predicted positive: precision and F1 are 0, never NaN
    auto none = classification_report({0.1, 0.2, 0.3}, {1, 0, 1}, 0.9);
    CHECK(none.precision == 0.0);
    CHECK(none.f1 == 0.0);
    CHECK(std::isfinite(none.f1));
}

TEST_CASE("davies_bouldin hand cases") {
    // two singleton clusters: zero scatter
    CHECK(davies_bouldin({0, 0, 100, 100}, 2, {0, 1}) == doctest::Approx(0.0));

    // {(0,0),(0,2)} and {(10,0),(10,2)}: s=1 each, centroids 10 apart -> 0.2
    std::vector<double> pts{0, 0, 0, 2, 10, 0, 10, 2};
    CHECK(davies_bouldin(pts, 2, {0, 0, 1, 1}) == doctest::Approx(0.2).epsilon(1e-12));

    // translation invariance
    std::vector<double> shifted = pts;
    for (auto& v : shifted) v += 123.456;
    CHECK(std::abs(davies_bouldin(shifted, 2, {0, 0, 1, 1}) - 0.2) <= 1e-12);
}

TEST_CASE("davies_bouldin error cases and nonnegativity") {
    CHECK_THROWS_AS(davies_bouldin({0, 0, 1, 1}, 2, {0, 0}), SwarmError);  // one cluster
    CHECK_THROWS_AS(davies_bouldin({0, 0, 0, 0}, 2, {0, 1}), SwarmError);  // coincident centroids

    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t n = 8 + rng() % 40;
        std::vector<double> pts(n * 3);
        std::vector<int> ids(n);
        for (auto& v : pts) v = (double)(rng() >> 11) * 0x1.0p-53 * 20.0 - 10.0;
        for (std::size_t i = 0; i < n; ++i) ids[i] = (int)(rng() % 3);
        ids[0] = 0;
        ids[1] = 1;
        ids[2] = 2;
        REQUIRE(davies_bouldin(pts, 3, ids) >= 0.0);
    }
}
