#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semiscale/network.hpp"

using namespace semiscale;
using oracle::Rng;

namespace {

// Count obtained by walking the sublayers, independent of the closed form.
std::size_t enumerated(const NetworkConfig& config) {
    Network net(config);
    std::size_t n = 0;
    for (auto& s : net.sublayers()) n += s->parameter_count();
    return n;
}

Batch random_input(Rng& rng, int examples, int channels, int size) {
    Batch b;
    for (int e = 0; e < examples; ++e) {
        FeatureStack s;
        for (int c = 0; c < channels; ++c) s.push_back(oracle::random_grid(rng, size, size, 0.0, 1.0));
        b.push_back(std::move(s));
    }
    return b;
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("reference configuration has 5280 parameters") {
    auto config = NetworkConfig::uniform(6, 24, 3, {"convection", "tmax", "tmin"});
    CHECK(config.parameter_count() == 5280);
    CHECK(enumerated(config) == 5280);
    // in*C + N*(C^2 + 2C + 2C + 4kC) + C by hand.
    CHECK(3 * 24 + 6 * (24 * 24 + 2 * 24 + 2 * 24 + 4 * 2 * 24) + 24 == 5280);
}

TEST_CASE("closed form matches enumeration") {
    Rng rng(11);
    const std::vector<std::string> menu_pool{"convection", "linear", "root:2", "log:1", "tmax", "tmin"};
    for (int trial = 0; trial < 25; ++trial) {
        int layers = 1 + static_cast<int>(rng() % 6);
        int channels = 1 + static_cast<int>(rng() % 32);
        int in = 1 + static_cast<int>(rng() % 3);
        NetworkConfig config;
        config.layers = layers;
        config.channels = channels;
        config.input_channels = in;
        for (int l = 0; l < layers; ++l) {
            std::vector<std::string> menu;
            if (rng() % 2) menu.push_back("convection");
            for (std::size_t i = 1; i < menu_pool.size(); ++i)
                if (rng() % 2) menu.push_back(menu_pool[i]);
            config.menus.push_back(menu);
        }
        CAPTURE(config.to_json());
        CHECK(config.parameter_count() == enumerated(config));
    }
    auto wide = NetworkConfig::uniform(6, 32, 3, {"convection", "tmax", "tmin"});
    CHECK(wide.parameter_count() == enumerated(wide));
}

TEST_CASE("empty menus reduce to a per-pixel logistic model") {
    auto config = NetworkConfig::uniform(1, 1, 1, {});
    CHECK(config.parameter_count() == 1 + (1 + 2) + 1);
    Network net(config);
    std::size_t scale_space = 0;
    for (auto& s : net.sublayers())
        if (s->type() != "affine" && s->type() != "channel_norm" && s->type() != "logistic") ++scale_space;
    CHECK(scale_space == 0);
}

TEST_CASE("json round trip") {
    auto config = NetworkConfig::uniform(3, 5, 2, {"convection", "tmax", "tmin"});
    config.menus[1] = {"tmin"};
    config.alpha = 1.5;
    config.seed = 99;
    config.boundary = BoundaryPolicy::Reflect;
    config.optimizer.lr_init = 0.02;
    config.training.eval_every = 7;
    auto back = NetworkConfig::from_json(config.to_json());
    CHECK(back.to_json() == config.to_json());
    CHECK(back.menus[1] == std::vector<std::string>{"tmin"});
    CHECK(back.seed == 99);

    auto shorthand = NetworkConfig::from_json(R"({"layers": 2, "channels": 4, "menu": ["tmax"]})");
    CHECK(shorthand.menus.size() == 2);
    CHECK(shorthand.parameter_count() == 1 * 4 + 2 * (16 + 8 + 16) + 4);
}

TEST_CASE("invalid configurations are rejected") {
    auto bad = [](auto mutate) {
        auto c = NetworkConfig::uniform(2, 4, 1, {"tmax"});
        mutate(c);
        return c;
    };
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.layers = 0; c.menus.clear(); }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.channels = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.menus.pop_back(); }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.menus[0] = {"tmax", "convection"}; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.menus[0] = {"convection", "convection"}; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.menus[0] = {"root:-1"}; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.menus[0] = {"log:0"}; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.menus[0] = {"sideways"}; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.alpha = 1.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](NetworkConfig& c) { c.training.batch_size = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS(NetworkConfig::from_json("{not json"));
}

TEST_CASE("forward produces probabilities of the input shape") {
    Rng rng(12);
    auto config = NetworkConfig::uniform(2, 4, 3, {"convection", "tmax", "tmin"});
    Network net(config);
    Batch out = net.forward(random_input(rng, 2, 3, 9), false);
    REQUIRE(out.size() == 2);
    for (const auto& s : out) {
        REQUIRE(s.size() == 1);
        CHECK(s[0].width() == 9);
        for (double v : s[0].values()) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }
    CHECK_THROWS_AS(net.forward(random_input(rng, 1, 2, 9), false), std::invalid_argument);
}

TEST_CASE("same seed builds the same network") {
    auto config = NetworkConfig::uniform(2, 6, 1, {"convection", "linear", "tmin"});
    config.seed = 5;
    Network a(config), b(config);
    auto pa = a.parameters(), pb = b.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->values == pb[i]->values);
    CHECK(a.parameter_names() == b.parameter_names());
    config.seed = 6;
    Network c(config);
    CHECK(c.parameters()[0]->values != pa[0]->values);
}

TEST_CASE("end-to-end gradient matches finite differences") {
    Rng rng(13);
    auto config = NetworkConfig::uniform(2, 3, 1, {"convection", "linear", "log:1"});
    config.seed = 3;
    Network net(config);
    Batch input = random_input(rng, 2, 1, 8);
    Batch weights = random_input(rng, 2, 1, 8);

    auto probe = [&] {
        Batch out = net.forward(input, true);
        double s = 0.0;
        for (std::size_t e = 0; e < out.size(); ++e)
            for (std::size_t i = 0; i < out[e][0].size(); ++i) s += out[e][0].values()[i] * weights[e][0].values()[i];
        return s;
    };

    (void)probe();
    net.zero_grad();
    net.backward(weights);
    double worst = 0.0;
    for (auto* block : net.parameters()) {
        for (std::size_t i = 0; i < block->values.size(); i += 1 + block->values.size() / 4) {
            double saved = block->values[i];
            const double h = 1e-5;
            block->values[i] = saved + h;
            double up = probe();
            block->values[i] = saved - h;
            double down = probe();
            block->values[i] = saved;
            double numeric = (up - down) / (2 * h);
            double analytic = block->grad[i];
            worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-4}));
        }
    }
    CHECK(worst <= 1e-4);
}

}  // TEST_SUITE
