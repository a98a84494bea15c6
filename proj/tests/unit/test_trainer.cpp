#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "semiscale/synthetic.hpp"
#include "semiscale/trainer.hpp"

using namespace semiscale;
using oracle::Rng;

namespace {

Grid2 mask_of(int w, int h, std::initializer_list<std::pair<int, int>> on) {
    Grid2 g(w, h, 0.0);
    for (auto [x, y] : on) g(x, y) = 1.0;
    return g;
}

Grid2 random_mask(Rng& rng, int w, int h, double p) {
    Grid2 g(w, h);
    for (double& v : g.values()) v = oracle::uniform(rng, 0, 1) < p ? 1.0 : 0.0;
    return g;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

NetworkConfig small_config(std::uint64_t seed) {
    auto c = NetworkConfig::uniform(2, 6, 1, {"convection", "tmax", "tmin"});
    c.seed = seed;
    return c;
}

SyntheticOptions small_images() {
    SyntheticOptions o;
    o.size = 32;
    return o;
}

// Bright background, dark foreground: a threshold on intensity separates them.
Dataset separable_intensities(std::uint64_t seed, int count) {
    Rng rng(seed);
    Dataset d;
    for (int i = 0; i < count; ++i) {
        Grid2 mask = random_mask(rng, 16, 16, 0.3);
        Grid2 image(16, 16);
        for (std::size_t k = 0; k < image.size(); ++k) {
            image.values()[k] = (mask.values()[k] > 0.5 ? 0.25 : 0.75) + oracle::uniform(rng, -0.15, 0.15);
        }
        d.push_back({image}, mask);
    }
    return d;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("semiscale_test_" + name);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("dice coefficient examples") {
    Rng rng(21);
    Grid2 t = random_mask(rng, 10, 10, 0.4);
    CHECK(dice_coefficient(t, t) == 1.0);
    CHECK(dice_coefficient(Grid2(4, 4, 0.0), Grid2(4, 4, 0.0)) == 1.0);
    CHECK(dice_coefficient(mask_of(4, 4, {{0, 0}}), mask_of(4, 4, {{3, 3}})) == 0.0);

    Grid2 p(20, 10, 0.0), q(20, 10, 0.0);
    for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) p(x, y) = 1.0;       // |P| = 100
        for (int x = 5; x < 15; ++x) q(x, y) = 1.0;       // |T| = 100, overlap 50
    }
    CHECK(dice_coefficient(p, q) == doctest::Approx(0.5));

    Grid2 soft(2, 1, std::vector<double>{0.5, 0.49});
    CHECK(dice_coefficient(soft, Grid2(2, 1, std::vector<double>{1.0, 1.0})) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(dice_coefficient(Grid2(3, 3), Grid2(3, 4)), std::invalid_argument);
}

TEST_CASE("dice is symmetric and translation invariant") {
    Rng rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        Grid2 a = random_mask(rng, 16, 12, 0.3);
        Grid2 b = random_mask(rng, 16, 12, 0.3);
        CHECK(dice_coefficient(a, b) == dice_coefficient(b, a));
        // Shift both masks on a canvas large enough that nothing leaves it.
        Grid2 ca(40, 40, 0.0), cb(40, 40, 0.0);
        int dx = static_cast<int>(rng() % 24), dy = static_cast<int>(rng() % 28);
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 16; ++x) {
                ca(x + dx, y + dy) = a(x, y);
                cb(x + dx, y + dy) = b(x, y);
            }
        CHECK(dice_coefficient(ca, cb) == dice_coefficient(a, b));
    }
}

TEST_CASE("pooled dice counts") {
    DiceCounts c;
    c.add(mask_of(3, 3, {{0, 0}, {1, 1}}), mask_of(3, 3, {{0, 0}}));
    c.add(mask_of(3, 3, {}), mask_of(3, 3, {{2, 2}}));
    CHECK(c.dice() == doctest::Approx(2.0 * 1 / (2 + 2)));
}

TEST_CASE("soft dice examples") {
    Grid2 t(10, 10, 0.0);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 10; ++x) t(x, y) = 1.0;
    Grid2 inverse = t;
    for (double& v : inverse.values()) v = 1.0 - v;

    CHECK(soft_dice_loss(t, t) == doctest::Approx(1.0 - 101.0 / 101.0));
    CHECK(soft_dice_loss(inverse, t) == doctest::Approx(1.0 - 1.0 / 101.0));
    // p = 0.5: sum pt = 25, sum p = 50, sum t = 50.
    CHECK(soft_dice_loss(Grid2(10, 10, 0.5), t) == doctest::Approx(1.0 - 51.0 / 101.0));
}

TEST_CASE("batched soft dice gradient matches finite differences") {
    Rng rng(23);
    Batch pred;
    std::vector<Grid2> masks;
    for (int e = 0; e < 3; ++e) {
        pred.push_back({oracle::random_grid(rng, 5, 4, 0.05, 0.95)});
        masks.push_back(random_mask(rng, 5, 4, 0.3));
    }
    std::vector<const Grid2*> targets;
    for (const auto& m : masks) targets.push_back(&m);
    auto base = soft_dice_loss_batch(pred, targets);
    for (int e = 0; e < 3; ++e) {
        for (std::size_t i = 0; i < pred[e][0].size(); i += 3) {
            double saved = pred[e][0].values()[i];
            pred[e][0].values()[i] = saved + 1e-6;
            double up = soft_dice_loss_batch(pred, targets).loss;
            pred[e][0].values()[i] = saved - 1e-6;
            double down = soft_dice_loss_batch(pred, targets).loss;
            pred[e][0].values()[i] = saved;
            CHECK(base.gradient[e][0].values()[i] == doctest::Approx((up - down) / 2e-6).epsilon(1e-6));
        }
    }
}

TEST_CASE("adam examples") {
    OptimizerConfig cfg;
    ParameterBlock p("w", 3);
    p.values = {1.0, -2.0, 0.5};

    SUBCASE("first step moves each entry by about lr against the gradient") {
        cfg.weight_decay = 0.0;
        p.grad = {0.3, -7.0, 1e-3};
        AdamState st;
        adam_decoupled_step({&p}, st, 0.01, cfg);
        CHECK(p.values[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
        CHECK(p.values[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
        CHECK(p.values[2] == doctest::Approx(0.5 - 0.01 * 1e-3 / (1e-3 + 1e-8)));
        CHECK(st.step == 1);
    }
    SUBCASE("zero gradient with decay shrinks by 1 - lr wd") {
        p.grad = {0, 0, 0};
        AdamState st;
        adam_decoupled_step({&p}, st, 0.01, cfg);
        CHECK(p.values[0] == doctest::Approx(1.0 * (1 - 1e-4)).epsilon(1e-14));
        CHECK(p.values[1] == doctest::Approx(-2.0 * (1 - 1e-4)).epsilon(1e-14));
    }
    SUBCASE("zero gradient without decay leaves parameters alone") {
        cfg.weight_decay = 0.0;
        p.grad = {0, 0, 0};
        AdamState st;
        for (int i = 0; i < 5; ++i) adam_decoupled_step({&p}, st, 0.01, cfg);
        CHECK(p.values == std::vector<double>{1.0, -2.0, 0.5});
    }
    SUBCASE("moments stay shaped like the parameters") {
        p.grad = {1, 1, 1};
        AdamState st;
        adam_decoupled_step({&p}, st, 0.01, cfg);
        REQUIRE(st.m.size() == 1);
        CHECK(st.m[0].size() == 3);
        CHECK(st.v[0].size() == 3);
        st.m[0].pop_back();
        CHECK_THROWS_AS(adam_decoupled_step({&p}, st, 0.01, cfg), std::invalid_argument);
    }
}

TEST_CASE("learning rate decays linearly then holds") {
    OptimizerConfig cfg;
    CHECK(learning_rate(cfg, 0) == doctest::Approx(0.01));
    CHECK(learning_rate(cfg, 500) == doctest::Approx(0.0055));
    CHECK(learning_rate(cfg, 1000) == doctest::Approx(0.001));
    CHECK(learning_rate(cfg, 20000) == doctest::Approx(0.001));
    double prev = 1.0;
    for (long b = 0; b < 1200; b += 37) {
        double lr = learning_rate(cfg, b);
        CHECK(lr <= prev);
        prev = lr;
    }
}

TEST_CASE("synthetic vessels") {
    auto a = generate_synthetic_vessels(7, 20);
    auto b = generate_synthetic_vessels(7, 20);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.images[i][0] == b.images[i][0]);
        CHECK(a.masks[i] == b.masks[i]);
        CHECK(a.images[i][0].width() == 64);
        double f = mask_fraction(a.masks[i]);
        CHECK(f >= 0.02);
        CHECK(f <= 0.20);
        for (double v : a.images[i][0].values()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    auto c = generate_synthetic_vessels(8, 20);
    CHECK_FALSE(c.images[0][0] == a.images[0][0]);

    SyntheticOptions none;
    none.curves = 0;
    for (const auto& m : generate_synthetic_vessels(3, 5, none).masks) CHECK(mask_fraction(m) == 0.0);
}

TEST_CASE("synthetic vessels are darker than their background") {
    auto d = generate_synthetic_vessels(9, 30);
    double fg = 0, bg = 0, nf = 0, nb = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t k = 0; k < d.masks[i].size(); ++k) {
            double v = d.images[i][0].values()[k];
            if (d.masks[i].values()[k] > 0.5) fg += v, ++nf;
            else bg += v, ++nb;
        }
    }
    CHECK(fg / nf < bg / nb);
}

TEST_CASE("subsample") {
    auto d = generate_synthetic_vessels(1, 40, small_images());
    CHECK(d.subsample(0.1, 5).size() == 4);
    CHECK(d.subsample(1.0, 5).size() == 40);
    CHECK(d.subsample(1e-6, 5).size() == 1);
    CHECK(d.subsample(0.25, 5).masks == d.subsample(0.25, 5).masks);
    CHECK_THROWS_AS(d.subsample(0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(d.subsample(1.5, 5), std::invalid_argument);
    // Every kept example is one of the originals.
    for (const auto& m : d.subsample(0.3, 9).masks) CHECK(std::find(d.masks.begin(), d.masks.end(), m) != d.masks.end());
}

TEST_CASE("zero learning rate keeps parameters fixed") {
    auto cfg = small_config(4);
    cfg.optimizer.lr_init = 0.0;
    cfg.optimizer.lr_final = 0.0;
    auto train_set = generate_synthetic_vessels(1, 16, small_images());
    auto test_set = generate_synthetic_vessels(2, 8, small_images());
    Network net(cfg);
    auto before = Snapshot::capture(net);
    TrainOptions o;
    o.max_batches = 6;
    o.eval_every = 2;
    (void)train(net, train_set, test_set, o);
    CHECK(Snapshot::capture(net).parameters == before.parameters);

    // Running normalisation statistics still move with lr = 0, so the Dice is
    // constant only once they are held fixed.
    before.restore(net);
    double dice = evaluate_dice(net, test_set);
    CHECK(evaluate_dice(net, test_set) == dice);
}

TEST_CASE("training is deterministic") {
    auto train_set = generate_synthetic_vessels(1, 24, small_images());
    auto test_set = generate_synthetic_vessels(2, 8, small_images());
    TrainOptions o;
    o.max_batches = 100;
    o.eval_every = 50;
    Network a(small_config(3)), b(small_config(3));
    auto ra = train(a, train_set, test_set, o);
    auto rb = train(b, train_set, test_set, o);
    CHECK(ra.state.current.parameters == rb.state.current.parameters);
    CHECK(ra.state.best.parameters == rb.state.best.parameters);
    REQUIRE(ra.log.size() == rb.log.size());
    for (std::size_t i = 0; i < ra.log.size(); ++i) CHECK(ra.log[i].train_loss == rb.log[i].train_loss);
}

TEST_CASE("training loss decreases") {
    auto train_set = generate_synthetic_vessels(5, 200, small_images());
    auto test_set = generate_synthetic_vessels(6, 16, small_images());
    Network net(small_config(5));
    TrainOptions o;
    o.max_batches = 1000;
    o.eval_every = 1000;
    o.patience = 0;
    auto r = train(net, train_set, test_set, o);
    std::vector<double> early, late;
    for (const auto& row : r.log) {
        if (row.batch <= 100) early.push_back(row.train_loss);
        if (row.batch > 900) late.push_back(row.train_loss);
    }
    CHECK(median(late) < median(early));
}

TEST_CASE("affine-only network separates intensities") {
    auto cfg = NetworkConfig::uniform(1, 1, 1, {});
    cfg.seed = 2;
    Network net(cfg);
    TrainOptions o;
    o.max_batches = 300;
    o.eval_every = 50;
    auto r = train(net, separable_intensities(1, 64), separable_intensities(2, 16), o);
    CHECK(r.state.best_dice >= 0.7);
    CHECK(evaluate_dice(net, separable_intensities(2, 16)) == doctest::Approx(r.state.best_dice));
}

TEST_CASE("stopping rules") {
    auto train_set = generate_synthetic_vessels(1, 16, small_images());
    auto test_set = generate_synthetic_vessels(2, 8, small_images());
    TrainOptions o;
    o.max_batches = 12;
    o.eval_every = 4;
    Network net(small_config(1));
    auto r = train(net, train_set, test_set, o);
    CHECK(r.log.size() == 12);
    CHECK(r.log.back().batch == 12);
    for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(r.log[i].batch == r.log[i - 1].batch + 1);

    o.target_dice = -1.0;
    Network again(small_config(1));
    auto hit = train(again, train_set, test_set, o);
    CHECK(hit.reached_target);
    CHECK(hit.log.size() == 4);

    CHECK_THROWS_AS(train(again, Dataset{}, test_set, o), std::invalid_argument);
    CHECK_THROWS_AS(train(again, train_set, Dataset{}, o), std::invalid_argument);
}

TEST_CASE("checkpoint round trip") {
    auto train_set = generate_synthetic_vessels(1, 16, small_images());
    auto test_set = generate_synthetic_vessels(2, 8, small_images());
    Network net(small_config(8));
    TrainOptions o;
    o.max_batches = 10;
    o.eval_every = 5;
    auto r = train(net, train_set, test_set, o);
    auto path = temp_path("ckpt.json");
    save_checkpoint(path.string(), net, r.state);

    auto loaded = load_checkpoint(path.string());
    CHECK(loaded.config.to_json() == net.config().to_json());
    CHECK(loaded.state.best_dice == r.state.best_dice);
    CHECK(loaded.state.batch == 10);
    CHECK(loaded.state.adam.step == r.state.adam.step);
    CHECK(loaded.state.adam.m == r.state.adam.m);
    Network back = network_from_checkpoint(loaded);
    CHECK(Snapshot::capture(back).parameters == r.state.best.parameters);
    CHECK(Snapshot::capture(back).buffers == r.state.best.buffers);
    CHECK(evaluate_dice(back, test_set) == evaluate_dice(net, test_set));

    {
        std::ofstream out(path);
        out << R"({"magic": "something-else", "version": 1})";
    }
    CHECK_THROWS_AS(load_checkpoint(path.string()), std::runtime_error);
    {
        std::ofstream out(path);
        out << R"({"magic": "semiscale-checkpoint", "version": 99})";
    }
    CHECK_THROWS_AS(load_checkpoint(path.string()), std::runtime_error);
    {
        std::ofstream out(path);
        out << "\x89PNG garbage";
    }
    CHECK_THROWS_AS(load_checkpoint(path.string()), std::runtime_error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(path.string()), std::runtime_error);
}

}  // TEST_SUITE
