#include "semiscale/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semiscale {

namespace {

double probe_loss(Sublayer& layer, const Batch& input, const Batch& weights, bool training) {
    Batch out = layer.forward(input, training);
    layer.clear_state();
    double sum = 0.0;
    for (std::size_t e = 0; e < out.size(); ++e) {
        for (std::size_t c = 0; c < out[e].size(); ++c) {
            const auto& o = out[e][c].values();
            const auto& u = weights[e][c].values();
            for (std::size_t i = 0; i < o.size(); ++i) sum += u[i] * o[i];
        }
    }
    return sum;
}

struct Probe {
    double error = 0.0;
    bool kink = false;
};

// `slot` is perturbed in place and restored.
template <class Eval>
Probe compare(double analytic, double& slot, const GradCheckOptions& options, Eval&& eval) {
    const double saved = slot;
    const double centre = eval();
    Probe p;
    p.error = std::numeric_limits<double>::infinity();
    bool kinked_everywhere = true;
    for (double eps : options.steps) {
        slot = saved + eps;
        double up = eval();
        slot = saved - eps;
        double down = eval();
        slot = saved;
        double numeric = (up - down) / (2.0 * eps);
        double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
        p.error = std::min(p.error, std::abs(analytic - numeric) / denom);
        double right = (up - centre) / eps;
        double left = (centre - down) / eps;
        double spread = std::abs(right - left);
        double scale = std::max({std::abs(right), std::abs(left), options.floor});
        if (spread <= 1e-2 * scale) kinked_everywhere = false;
    }
    p.kink = kinked_everywhere && p.error > 1e-4;
    return p;
}

}  // namespace

GradCheckResult check_gradients(Sublayer& layer, const Batch& input, std::uint64_t seed,
                                const GradCheckOptions& options) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Batch out = layer.forward(input, options.training);
    Batch weights = out;
    for (auto& stack : weights) {
        for (auto& g : stack) {
            for (double& v : g.values()) v = gauss(rng);
        }
    }
    for (auto* b : layer.parameters()) b->zero_grad();
    Batch input_grad = layer.backward(weights);
    layer.clear_state();

    GradCheckResult result;
    auto record = [&](const Probe& p, const std::string& name) {
        ++result.probes;
        result.kink = result.kink || p.kink;
        if (p.error > result.max_relative_error) {
            result.max_relative_error = p.error;
            result.worst = name;
        }
    };

    for (auto* block : layer.parameters()) {
        std::vector<double> analytic = block->grad;
        for (std::size_t i = 0; i < block->values.size(); ++i) {
            auto p = compare(analytic[i], block->values[i], options,
                             [&] { return probe_loss(layer, input, weights, options.training); });
            record(p, block->name + "[" + std::to_string(i) + "]");
        }
    }

    Batch probe_input = input;
    for (std::size_t e = 0; e < input.size(); ++e) {
        for (int k = 0; k < options.input_probes; ++k) {
            std::size_t c = rng() % input[e].size();
            const Grid2& g = input[e][c];
            int x = static_cast<int>(rng() % static_cast<std::uint64_t>(g.width()));
            int y = static_cast<int>(rng() % static_cast<std::uint64_t>(g.height()));
            double analytic = input_grad[e][c](x, y);
            auto p = compare(analytic, probe_input[e][c](x, y), options,
                             [&] { return probe_loss(layer, probe_input, weights, options.training); });
            record(p, "input[" + std::to_string(e) + "][" + std::to_string(c) + "](" + std::to_string(x) +
                          "," + std::to_string(y) + ")");
        }
    }
    return result;
}

}  // namespace semiscale
