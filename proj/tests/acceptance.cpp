// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Heavier end-to-end checks than the unit tests; expects
// the shipped scenario files under SCENARIO_DIR.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "swarm/aggregation.hpp"
#include "swarm/metrics.hpp"
#include "swarm/node.hpp"
#include "swarm/scenario.hpp"
#include "swarm/wire.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << ": " << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n";
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// auc[(seed, node, arm)] lookup built from scenario results
struct CellTable {
    std::map<std::tuple<std::int64_t, int, std::string>, const ResultCell*> cells;

    explicit CellTable(const std::vector<RunResult>& results) {
        for (const auto& r : results)
            for (const auto& c : r.cells)
                if (!c.failed) cells[{r.seed, c.node, c.arm}] = &c;
    }
    const ResultCell* get(std::int64_t seed, int node, const std::string& arm) const {
        auto it = cells.find({seed, node, arm});
        return it == cells.end() ? nullptr : it->second;
    }
};

double mean(const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / (double)xs.size();
}

// ---- criteria over the canonical unbalanced scenario ----------------------

void criteria_1_2_3(const ScenarioSpec& spec) {
    auto t0 = std::chrono::steady_clock::now();
    auto results = run_scenario(spec, "");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CellTable t(results);

    // 1: scarce-node uplift
    {
        std::vector<double> sw, st;
        int positive = 0;
        bool complete = true;
        for (auto seed : spec.seeds) {
            auto* a = t.get(seed, 0, "swarm");
            auto* b = t.get(seed, 0, "standalone");
            if (!a || !b) { complete = false; continue; }
            sw.push_back(a->metrics.auc);
            st.push_back(b->metrics.auc);
            if (a->metrics.auc > b->metrics.auc) ++positive;
        }
        double uplift = complete && !sw.empty() ? mean(sw) - mean(st) : -1.0;
        bool pass = complete && uplift >= 0.005 && positive >= 4 && secs < 300.0;
        verdict("scarce-node uplift (node 0, 5 seeds)", pass,
                "mean uplift " + fmt(uplift) + ", positive in " + std::to_string(positive) +
                    "/5 seeds, " + fmt(secs) + " s");
    }

    // 2: ordering — centralized mean >= per-node swarm mean - 0.02
    {
        std::vector<double> cen;
        for (auto seed : spec.seeds)
            if (auto* c = t.get(seed, -1, "centralized")) cen.push_back(c->metrics.auc);
        double cmean = mean(cen);
        bool pass = cen.size() == spec.seeds.size();
        double worst = 0.0;
        for (int node = 0; node < 4; ++node) {
            std::vector<double> sw;
            for (auto seed : spec.seeds)
                if (auto* c = t.get(seed, node, "swarm")) sw.push_back(c->metrics.auc);
            if (sw.size() != spec.seeds.size()) { pass = false; break; }
            double excess = mean(sw) - cmean;
            worst = std::max(worst, excess);
            if (cmean < mean(sw) - 0.02) pass = false;
        }
        verdict("ordering (centralized >= swarm - 0.02)", pass,
                "centralized mean " + fmt(cmean) + ", max swarm excess " + fmt(worst));
    }

    // 3: generalization-gap reduction
    {
        std::vector<double> gap_sw_by_seed, gap_st_by_seed;
        int strict = 0;
        bool complete = true;
        for (auto seed : spec.seeds) {
            std::vector<double> gsw, gst;
            for (int node = 0; node < 4; ++node) {
                auto* a = t.get(seed, node, "swarm");
                auto* b = t.get(seed, node, "standalone");
                if (!a || !b) { complete = false; continue; }
                gsw.push_back(a->metrics.gap);
                gst.push_back(b->metrics.gap);
            }
            if (gsw.empty()) { complete = false; continue; }
            gap_sw_by_seed.push_back(mean(gsw));
            gap_st_by_seed.push_back(mean(gst));
            if (mean(gsw) < mean(gst)) ++strict;
        }
        double msw = mean(gap_sw_by_seed), mst = mean(gap_st_by_seed);
        bool pass = complete && msw <= mst && strict >= 3;
        verdict("generalization-gap reduction", pass,
                "swarm gap " + fmt(msw) + " vs standalone " + fmt(mst) + ", strict in " +
                    std::to_string(strict) + "/5 seeds");
    }
}

void criterion_4_downsample(const ScenarioSpec& spec) {
    auto results = run_scenario(spec, "");
    CellTable t(results);
    std::vector<double> sw, st;
    bool complete = true;
    for (auto seed : spec.seeds) {
        auto* a = t.get(seed, 2, "swarm");
        auto* b = t.get(seed, 2, "standalone");
        if (!a || !b) { complete = false; continue; }
        sw.push_back(a->metrics.auc);
        st.push_back(b->metrics.auc);
    }
    double uplift = complete && !sw.empty() ? mean(sw) - mean(st) : -1.0;
    verdict("downsample resilience (node 2 at 25%)", complete && uplift > 0.0,
            "mean uplift " + fmt(uplift));
}

// ---- oracle criteria -------------------------------------------------------

void criterion_5_fedavg_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(606);
    bool pass = true;
    double worst = 0.0;
    for (int rep = 0; rep < 1000 && pass; ++rep) {
        std::size_t k = 1 + rng() % 8, d = 1 + rng() % 64;
        ShapeSpec shape{{{d, 1}}};
        std::vector<ModelUpdate> us;
        std::vector<std::vector<double>> raw;
        std::vector<std::uint64_t> counts;
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<double> v(d);
            for (auto& x : v) x = (double)(rng() >> 11) * 0x1.0p-53 * 6.0 - 3.0;
            raw.push_back(v);
            counts.push_back(1 + rng() % 1000000);
            us.push_back(ModelUpdate{WeightVector(raw.back(), shape), counts.back(),
                                     (std::uint32_t)j, 0, 0});
        }
        auto got = fedavg(us);
        // independent oracle: exact integer coefficients, Neumaier-compensated
        // long double accumulation in input order
        long double den = 0.0L;
        for (auto n : counts) den += (long double)n;
        for (std::size_t i = 0; i < d; ++i) {
            long double num = 0.0L, comp = 0.0L;
            for (std::size_t j = 0; j < k; ++j) {
                long double term = (long double)counts[j] * raw[j][i];
                long double s = num + term;
                comp += std::abs(num) >= std::abs(term) ? (num - s) + term : (term - s) + num;
                num = s;
            }
            double want = (double)((num + comp) / den);
            double err = std::abs(got[i] - want);
            worst = std::max(worst, err);
            if (err > 1e-12) pass = false;
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    verdict("fedavg matches the rational oracle (1000 sets)", pass && secs < 10.0,
            "worst abs err " + std::to_string(worst) + ", " + fmt(secs) + " s");
}

void criterion_6_auc_oracle() {
    std::mt19937_64 rng(707);
    bool pass = true;
    double worst = 0.0;
    for (int rep = 0; rep < 1000 && pass; ++rep) {
        std::size_t n = 4 + rng() % 197;
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = (double)(rng() % 25) / 25.0;  // ties guaranteed
            y[i] = (int)(rng() % 2);
        }
        y[0] = 1;
        y[1] = 0;
        double got = roc_auc(s, y);
        double wins = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (y[i] != 1) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (y[j] != 0) continue;
                ++pairs;
                wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
        }
        double want = wins / (double)pairs;
        double err = std::abs(got - want);
        worst = std::max(worst, err);
        if (err > 1e-12) pass = false;
    }
    verdict("rank AUC matches pair counting (1000 sets)", pass,
            "worst abs err " + std::to_string(worst));
}

void criterion_7_gradient() {
    std::mt19937_64 rng(808);
    bool pass = true;
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t d = 2 + rng() % 7;
        std::size_t hid = (rep % 2) ? 1 + rng() % 4 : 0;
        ModelSpec spec{d, hid};
        auto ds = synth_dataset(8 + rng() % 24, d, 1.5, 0.5, (std::int64_t)(rng() % 5000));
        std::vector<double> w0(spec.shape().total_len());
        for (auto& x : w0) x = (double)(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        WeightVector w(w0, spec.shape());
        auto grad = loss_and_gradient(spec, w, ds).second;
        const double h = 1e-6;
        for (std::size_t i = 0; i < w0.size(); ++i) {
            auto wp = w0, wm = w0;
            wp[i] += h;
            wm[i] -= h;
            double fd = (loss_and_gradient(spec, WeightVector(wp, spec.shape()), ds).first -
                         loss_and_gradient(spec, WeightVector(wm, spec.shape()), ds).first) /
                        (2 * h);
            double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
            double rel = std::abs(grad[i] - fd) / denom;
            worst = std::max(worst, rel);
            if (rel >= 1e-4) pass = false;
        }
    }
    verdict("gradient vs central finite differences (20 cases)", pass,
            "worst rel err " + std::to_string(worst));
}

void criterion_8_protocol() {
    std::mt19937_64 rng(909);
    bool pass = true;

    // 10,000 encode/decode round trips
    for (int i = 0; i < 10000 && pass; ++i) {
        SwarmMessage m;
        m.sender_id = (std::uint32_t)rng();
        switch (rng() % 5) {
            case 0: {
                m.kind = MessageKind::HELLO;
                HelloPayload p;
                if (rng() % 2) p.address = "host" + std::to_string(rng() % 1000) + ":1";
                m.payload = p;
                break;
            }
            case 1: {
                m.kind = MessageKind::PEER_LIST;
                PeerListPayload p;
                for (std::size_t j = rng() % 5; j-- > 0;)
                    p.peers.push_back({(std::uint32_t)rng(), rng(),
                                       std::to_string(rng() % 100000)});
                m.payload = p;
                break;
            }
            case 2: {
                m.kind = MessageKind::WEIGHTS;
                WeightsPayload p;
                p.round = (std::uint32_t)rng();
                p.epoch = (std::uint32_t)rng();
                p.sample_count = rng();
                for (std::size_t j = rng() % 48; j-- > 0;)
                    p.values.push_back((double)(rng() >> 11) * 0x1.0p-53 * 9.0 - 4.5);
                m.payload = p;
                break;
            }
            case 3:
                m.kind = MessageKind::ACK;
                m.payload = AckPayload{(std::uint32_t)rng()};
                break;
            default:
                m.kind = MessageKind::LEAVE;
                m.payload = LeavePayload{};
        }
        auto out = decode(encode(m));
        if (!std::holds_alternative<SwarmMessage>(out) || !(std::get<SwarmMessage>(out) == m))
            pass = false;
    }

    // 10,000 random-byte fuzz inputs: zero crashes, only named errors
    for (int i = 0; i < 10000 && pass; ++i) {
        std::vector<std::uint8_t> b(rng() % 256);
        for (auto& x : b) x = (std::uint8_t)rng();
        if (b.size() >= 6 && rng() % 3 == 0) {
            b[0] = 'S'; b[1] = 'W'; b[2] = 'R'; b[3] = 'M';
            b[4] = 1;
            b[5] = (std::uint8_t)(1 + rng() % 6);
        }
        auto r = decode(b);
        if (std::holds_alternative<DecodeError>(r)) {
            auto k = std::get<DecodeError>(r).kind;
            if (k != DecodeErrorKind::BadMagic && k != DecodeErrorKind::BadVersion &&
                k != DecodeErrorKind::UnknownKind && k != DecodeErrorKind::TruncatedFrame &&
                k != DecodeErrorKind::LengthMismatch)
                pass = false;
        }
    }
    verdict("protocol robustness (10k round trips + 10k fuzz)", pass, "");
}

// ---- determinism, fault tolerance, gate ------------------------------------

void criterion_9_determinism(const ScenarioSpec& base) {
    // byte-identical reruns of one seed
    ScenarioSpec one = base;
    one.seeds = {base.seeds.front()};
    auto a = run_scenario(one, "");
    auto b = run_scenario(one, "");
    bool identical = a.front().to_json_text() == b.front().to_json_text();

    // drop_prob = 0.2: the swarm completes and node 0 keeps its uplift
    ScenarioSpec lossy = base;
    lossy.net.drop_prob = 0.2;
    auto results = run_scenario(lossy, "");
    CellTable t(results);
    bool complete = true;
    int positive = 0;
    for (auto seed : lossy.seeds) {
        auto* sw = t.get(seed, 0, "swarm");
        auto* st = t.get(seed, 0, "standalone");
        if (!sw || !st) { complete = false; continue; }
        if (sw->metrics.auc > st->metrics.auc) ++positive;
        // every swarm node produced a full run (cells exist for all nodes)
        for (int node = 0; node < 4; ++node)
            if (!t.get(seed, node, "swarm")) complete = false;
    }
    bool pass = identical && complete && positive >= 3;
    verdict("determinism & fault tolerance (drop 0.2)", pass,
            std::string(identical ? "byte-identical" : "MISMATCH") + ", uplift positive in " +
                std::to_string(positive) + "/5 lossy seeds");
}

void criterion_10_gate() {
    // 4 nodes, node 3 broadcasts zero weights every round; relative gate 0.8.
    // Exact rule per round and per victim: the adopted weights' validation
    // AUC never falls below 0.8x the pre-round value.
    bool pass = true;
    int rounds_checked = 0;
    for (std::int64_t seed = 1; seed <= 3 && pass; ++seed) {
        auto ds = synth_dataset(3000, 16, 0.8, 0.5, seed);
        PartitionPlan plan;
        plan.fractions = {0.25, 0.25, 0.25, 0.25};
        plan.seed = seed + 100;
        auto shards = partition(ds, plan, 0.125);
        std::vector<NodeConfig> cfgs;
        for (std::uint32_t i = 0; i < 4; ++i) {
            NodeConfig cfg;
            cfg.node_id = i;
            cfg.model = ModelSpec{16, 8};
            cfg.train.epochs = 12;
            cfg.train.lr_initial = 0.02;
            cfg.train.patience = 12;
            cfg.train.seed = seed * 10 + 1;  // shared init
            cfg.max_epochs = 12;
            cfg.exchange_interval = 3;
            cfg.collect_window_ms = 100;
            cfg.gate = GatePolicy{GateMode::relative, 0.8};
            cfg.adversary_zero_weights = (i == 3);
            cfgs.push_back(cfg);
        }
        SimNetConfig net;
        net.latency_mean_ms = 5;
        net.seed = seed;
        auto result = run_swarm_sim(cfgs, shards, net);
        for (std::size_t i = 0; i < 3; ++i) {  // victims only
            for (const auto& r : result.nodes[i].reports) {
                ++rounds_checked;
                double post = r.gate_accepted ? r.candidate_val_auc : r.local_val_auc;
                // exact rule: accepted iff candidate >= theta * local
                if (r.gate_accepted != (r.candidate_val_auc >= 0.8 * r.local_val_auc))
                    pass = false;
                if (post < 0.8 * r.local_val_auc) pass = false;
            }
        }
    }
    verdict("gate semantics under a zero-weight adversary", pass,
            std::to_string(rounds_checked) + " victim rounds checked");
}

}  // namespace

int main() {
    fs::path dir = SCENARIO_DIR;
    auto unbalanced = ScenarioSpec::from_json_file((dir / "unbalanced_10_30_30_30.json").string());
    auto downsample = ScenarioSpec::from_json_file((dir / "downsample_n2_25.json").string());

    criteria_1_2_3(unbalanced);
    criterion_4_downsample(downsample);
    criterion_5_fedavg_oracle();
    criterion_6_auc_oracle();
    criterion_7_gradient();
    criterion_8_protocol();
    criterion_9_determinism(unbalanced);
    criterion_10_gate();

    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                  : std::to_string(g_failures) + " CRITERIA FAILED")
              << "\n";
    return g_failures;
}
