#include "semiscale/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace semiscale {

using nlohmann::json;

namespace {

bool is_convection(const std::string& token) { return token == "convection"; }

std::string boundary_name(BoundaryPolicy b) {
    switch (b) {
        case BoundaryPolicy::Replicate: return "replicate";
        case BoundaryPolicy::Reflect: return "reflect";
        case BoundaryPolicy::ZeroPad: return "zero";
        case BoundaryPolicy::Periodic: return "periodic";
    }
    return "replicate";
}

}  // namespace

NetworkConfig NetworkConfig::uniform(int layers, int channels, int input_channels,
                                     std::vector<std::string> menu) {
    NetworkConfig c;
    c.layers = layers;
    c.channels = channels;
    c.input_channels = input_channels;
    c.menus.assign(static_cast<std::size_t>(std::max(layers, 0)), menu);
    return c;
}

void NetworkConfig::validate() const {
    if (layers < 1) throw std::invalid_argument("network needs at least one layer");
    if (channels < 1) throw std::invalid_argument("network needs at least one channel");
    if (input_channels < 1) throw std::invalid_argument("network needs at least one input channel");
    if (static_cast<int>(menus.size()) != layers) {
        throw std::invalid_argument("expected one sublayer menu per layer");
    }
    for (const auto& menu : menus) {
        int convections = 0;
        for (std::size_t i = 0; i < menu.size(); ++i) {
            if (is_convection(menu[i])) {
                if (i != 0) throw std::invalid_argument("convection must come first in a menu");
                ++convections;
                continue;
            }
            auto kind = SemifieldKind::parse(menu[i]);
            double p = kind.parameter();
            if (kind.tag() == SemifieldTag::Root && !(p > 0.0)) {
                throw std::invalid_argument("root sublayers need finite p > 0");
            }
            if (kind.tag() == SemifieldTag::Log && (!std::isfinite(p) || p == 0.0)) {
                throw std::invalid_argument("log sublayers need finite nonzero mu");
            }
            KernelSpec{kind, alpha, 1.0, Mat2::identity()}.validate();
        }
        if (convections > 1) throw std::invalid_argument("convection listed twice");
    }
    if (training.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (training.eval_every < 1) throw std::invalid_argument("eval cadence must be >= 1");
    if (optimizer.warmdown_batches < 0) throw std::invalid_argument("warmdown must be >= 0");
}

std::size_t NetworkConfig::parameter_count() const {
    const std::size_t c = static_cast<std::size_t>(channels);
    std::size_t total = static_cast<std::size_t>(input_channels) * c + c;
    for (const auto& menu : menus) {
        std::size_t k = 0;
        bool convection = false;
        for (const auto& token : menu) {
            if (is_convection(token)) convection = true;
            else ++k;
        }
        total += c * c + 2 * c + (convection ? 2 * c : 0) + 4 * c * k;
    }
    return total;
}

NetworkConfig NetworkConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    NetworkConfig c;
    c.layers = j.value("layers", c.layers);
    c.channels = j.value("channels", c.channels);
    c.input_channels = j.value("input_channels", c.input_channels);
    c.alpha = j.value("alpha", c.alpha);
    c.seed = j.value("seed", c.seed);
    if (j.contains("boundary")) c.boundary = parse_boundary(j.at("boundary").get<std::string>());
    if (j.contains("layer_menus")) {
        c.menus = j.at("layer_menus").get<std::vector<std::vector<std::string>>>();
    } else {
        auto menu = j.value("menu", std::vector<std::string>{});
        c.menus.assign(static_cast<std::size_t>(std::max(c.layers, 0)), menu);
    }
    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        auto& d = c.optimizer;
        d.lr_init = o.value("lr_init", d.lr_init);
        d.lr_final = o.value("lr_final", d.lr_final);
        d.warmdown_batches = o.value("warmdown_batches", d.warmdown_batches);
        if (o.contains("betas")) {
            auto betas = o.at("betas").get<std::vector<double>>();
            if (betas.size() != 2) throw std::invalid_argument("optimizer.betas needs two values");
            d.beta1 = betas[0];
            d.beta2 = betas[1];
        }
        d.eps = o.value("eps", d.eps);
        d.weight_decay = o.value("weight_decay", d.weight_decay);
    }
    if (j.contains("training")) {
        const json& t = j.at("training");
        auto& d = c.training;
        d.batch_size = t.value("batch_size", d.batch_size);
        d.eval_every = t.value("eval_every", d.eval_every);
        d.patience = t.value("patience", d.patience);
        d.max_batches = t.value("max_batches", d.max_batches);
    }
    c.training.batch_size = j.value("batch_size", c.training.batch_size);
    c.validate();
    return c;
}

std::string NetworkConfig::to_json() const {
    json j;
    j["layers"] = layers;
    j["channels"] = channels;
    j["input_channels"] = input_channels;
    j["alpha"] = alpha;
    j["boundary"] = boundary_name(boundary);
    j["seed"] = seed;
    j["layer_menus"] = menus;
    j["batch_size"] = training.batch_size;
    j["optimizer"] = {{"lr_init", optimizer.lr_init},
                      {"lr_final", optimizer.lr_final},
                      {"warmdown_batches", optimizer.warmdown_batches},
                      {"betas", {optimizer.beta1, optimizer.beta2}},
                      {"eps", optimizer.eps},
                      {"weight_decay", optimizer.weight_decay}};
    j["training"] = {{"batch_size", training.batch_size},
                     {"eval_every", training.eval_every},
                     {"patience", training.patience},
                     {"max_batches", training.max_batches}};
    return j.dump(2);
}

Network::Network(const NetworkConfig& config) : config_(config) {
    config_.validate();
    std::mt19937_64 rng(config_.seed);
    const int c = config_.channels;

    auto lift = std::make_unique<AffineSublayer>(config_.input_channels, c, false);
    lift->initialize(rng);
    sublayers_.push_back(std::move(lift));
    for (const auto& menu : config_.menus) {
        for (const auto& token : menu) {
            if (is_convection(token)) {
                auto conv = std::make_unique<ConvectionSublayer>(c);
                conv->initialize(rng);
                sublayers_.push_back(std::move(conv));
                continue;
            }
            ScaleSpaceOptions options;
            options.kind = SemifieldKind::parse(token);
            options.alpha = config_.alpha;
            options.boundary = config_.boundary;
            auto scale = std::make_unique<ScaleSpaceSublayer>(c, options);
            scale->initialize(rng);
            sublayers_.push_back(std::move(scale));
        }
        auto mix = std::make_unique<AffineSublayer>(c, c, false);
        mix->initialize(rng);
        sublayers_.push_back(std::move(mix));
        sublayers_.push_back(std::make_unique<ChannelNormSublayer>(c));
    }
    auto head = std::make_unique<AffineSublayer>(c, 1, false);
    head->initialize(rng);
    sublayers_.push_back(std::move(head));
    sublayers_.push_back(std::make_unique<LogisticSublayer>(1));
}

Batch Network::forward(const Batch& input, bool training) {
    Batch x = input;
    for (auto& s : sublayers_) x = s->forward(x, training);
    return x;
}

void Network::backward(const Batch& upstream) {
    Batch g = upstream;
    for (auto it = sublayers_.rbegin(); it != sublayers_.rend(); ++it) g = (*it)->backward(g);
}

std::vector<ParameterBlock*> Network::parameters() {
    std::vector<ParameterBlock*> out;
    for (auto& s : sublayers_) {
        for (auto* b : s->parameters()) out.push_back(b);
    }
    return out;
}

std::vector<ParameterBlock*> Network::buffers() {
    std::vector<ParameterBlock*> out;
    for (auto& s : sublayers_) {
        for (auto* b : s->buffers()) out.push_back(b);
    }
    return out;
}

std::vector<std::string> Network::parameter_names() {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < sublayers_.size(); ++i) {
        for (auto* b : sublayers_[i]->parameters()) {
            out.push_back(std::to_string(i) + "." + sublayers_[i]->type() + "." + b->name);
        }
    }
    return out;
}

std::vector<std::string> Network::buffer_names() {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < sublayers_.size(); ++i) {
        for (auto* b : sublayers_[i]->buffers()) {
            out.push_back(std::to_string(i) + "." + sublayers_[i]->type() + "." + b->name);
        }
    }
    return out;
}

std::size_t Network::parameter_count() {
    std::size_t n = 0;
    for (auto* b : parameters()) n += b->values.size();
    return n;
}

void Network::zero_grad() {
    for (auto* b : parameters()) b->zero_grad();
}

void Network::project() {
    for (auto& s : sublayers_) s->project();
}

void Network::clear_state() {
    for (auto& s : sublayers_) s->clear_state();
}

}  // namespace semiscale
