#include "semiscale/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace semiscale {

using nlohmann::json;

void Dataset::push_back(FeatureStack image, Grid2 mask) {
    require_uniform(image);
    if (!image.front().same_shape(mask)) throw std::invalid_argument("image and mask differ in shape");
    images.push_back(std::move(image));
    masks.push_back(std::move(mask));
}

Dataset Dataset::subsample(double fraction, std::uint64_t seed) const {
    if (!(fraction > 0.0) || fraction > 1.0) throw std::invalid_argument("fraction must be in (0, 1]");
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * size() - 1e-9)));
    keep = std::min(keep, size());
    order.resize(keep);
    std::sort(order.begin(), order.end());
    Dataset out;
    for (auto i : order) out.push_back(images[i], masks[i]);
    return out;
}

void DiceCounts::add(const Grid2& prediction, const Grid2& target, double threshold) {
    if (!prediction.same_shape(target)) throw std::invalid_argument("dice: shapes differ");
    const auto& p = prediction.values();
    const auto& t = target.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
        bool pi = p[i] >= threshold;
        bool ti = t[i] > 0.5;
        intersection += (pi && ti) ? 1.0 : 0.0;
        predicted += pi ? 1.0 : 0.0;
        actual += ti ? 1.0 : 0.0;
    }
}

double DiceCounts::dice() const {
    if (predicted + actual == 0.0) return 1.0;
    return 2.0 * intersection / (predicted + actual);
}

double dice_coefficient(const Grid2& prediction, const Grid2& target, double threshold) {
    DiceCounts counts;
    counts.add(prediction, target, threshold);
    return counts.dice();
}

double soft_dice_loss(const Grid2& prediction, const Grid2& target) {
    if (!prediction.same_shape(target)) throw std::invalid_argument("soft dice: shapes differ");
    double pt = 0.0, p = 0.0, t = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        pt += prediction.values()[i] * target.values()[i];
        p += prediction.values()[i];
        t += target.values()[i];
    }
    return 1.0 - (2.0 * pt + 1.0) / (p + t + 1.0);
}

LossWithGradient soft_dice_loss_batch(const Batch& predictions, const std::vector<const Grid2*>& targets) {
    if (predictions.size() != targets.size()) throw std::invalid_argument("soft dice: batch size mismatch");
    double pt = 0.0, p = 0.0, t = 0.0;
    for (std::size_t e = 0; e < predictions.size(); ++e) {
        const Grid2& pred = predictions[e].at(0);
        const Grid2& target = *targets[e];
        if (!pred.same_shape(target)) throw std::invalid_argument("soft dice: shapes differ");
        for (std::size_t i = 0; i < pred.size(); ++i) {
            pt += pred.values()[i] * target.values()[i];
            p += pred.values()[i];
            t += target.values()[i];
        }
    }
    const double num = 2.0 * pt + 1.0;
    const double den = p + t + 1.0;
    LossWithGradient out;
    out.loss = 1.0 - num / den;
    out.gradient.resize(predictions.size());
    for (std::size_t e = 0; e < predictions.size(); ++e) {
        const Grid2& target = *targets[e];
        Grid2 g(target.width(), target.height());
        for (std::size_t i = 0; i < g.size(); ++i) {
            // d/dp_i of -(num/den)
            g.values()[i] = -(2.0 * target.values()[i] * den - num) / (den * den);
        }
        out.gradient[e].push_back(std::move(g));
    }
    return out;
}

double learning_rate(const OptimizerConfig& config, long batch) {
    if (config.warmdown_batches <= 0 || batch >= config.warmdown_batches) return config.lr_final;
    double s = static_cast<double>(batch) / static_cast<double>(config.warmdown_batches);
    return config.lr_init + (config.lr_final - config.lr_init) * s;
}

void AdamState::reset(const std::vector<ParameterBlock*>& blocks) {
    m.clear();
    v.clear();
    for (auto* b : blocks) {
        m.emplace_back(b->values.size(), 0.0);
        v.emplace_back(b->values.size(), 0.0);
    }
    step = 0;
}

void adam_decoupled_step(const std::vector<ParameterBlock*>& blocks, AdamState& state, double lr,
                         const OptimizerConfig& config) {
    if (state.m.size() != blocks.size()) state.reset(blocks);
    ++state.step;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        auto& values = blocks[k]->values;
        const auto& grad = blocks[k]->grad;
        auto& m = state.m[k];
        auto& v = state.v[k];
        if (m.size() != values.size()) throw std::invalid_argument("optimizer moments do not match parameters");
        for (std::size_t i = 0; i < values.size(); ++i) {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
            double mhat = m[i] / c1;
            double vhat = v[i] / c2;
            double decayed = values[i] - lr * config.weight_decay * values[i];
            values[i] = decayed - lr * mhat / (std::sqrt(vhat) + config.eps);
        }
    }
}

Snapshot Snapshot::capture(Network& network) {
    Snapshot s;
    for (auto* b : network.parameters()) s.parameters.push_back(b->values);
    for (auto* b : network.buffers()) s.buffers.push_back(b->values);
    return s;
}

void Snapshot::restore(Network& network) const {
    auto params = network.parameters();
    auto bufs = network.buffers();
    if (params.size() != parameters.size() || bufs.size() != buffers.size()) {
        throw std::invalid_argument("snapshot does not match the network layout");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k]->values.size() != parameters[k].size()) {
            throw std::invalid_argument("snapshot block size mismatch");
        }
        params[k]->values = parameters[k];
    }
    for (std::size_t k = 0; k < bufs.size(); ++k) {
        if (bufs[k]->values.size() != buffers[k].size()) {
            throw std::invalid_argument("snapshot buffer size mismatch");
        }
        bufs[k]->values = buffers[k];
    }
}

double evaluate_dice(Network& network, const Dataset& data, int batch_size) {
    if (data.empty()) throw std::invalid_argument("cannot evaluate on an empty dataset");
    DiceCounts counts;
    for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(batch_size)) {
        std::size_t end = std::min(data.size(), start + static_cast<std::size_t>(batch_size));
        Batch input(data.images.begin() + static_cast<long>(start), data.images.begin() + static_cast<long>(end));
        Batch out = network.forward(input, false);
        for (std::size_t e = start; e < end; ++e) counts.add(out[e - start].at(0), data.masks[e]);
    }
    network.clear_state();
    return counts.dice();
}

TrainResult train(Network& network, const Dataset& train_set, const Dataset& test_set,
                  const TrainOptions& options) {
    if (train_set.empty()) throw std::invalid_argument("training set is empty");
    if (test_set.empty()) throw std::invalid_argument("test set is empty");
    const auto& cfg = network.config();
    const long max_batches = options.max_batches >= 0 ? options.max_batches : cfg.training.max_batches;
    const long patience = options.patience >= 0 ? options.patience : cfg.training.patience;
    const long eval_every = options.eval_every > 0 ? options.eval_every : cfg.training.eval_every;
    const std::size_t batch_size = static_cast<std::size_t>(cfg.training.batch_size);

    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    TrainResult result;
    TrainState& st = result.state;
    auto blocks = network.parameters();
    st.adam.reset(blocks);
    st.best = Snapshot::capture(network);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();

    for (long b = 0; b < max_batches; ++b) {
        Batch input;
        std::vector<const Grid2*> targets;
        for (std::size_t k = 0; k < batch_size; ++k) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            std::size_t i = order[cursor++];
            input.push_back(train_set.images[i]);
            targets.push_back(&train_set.masks[i]);
        }
        const double lr = learning_rate(cfg.optimizer, b);
        Batch out = network.forward(input, true);
        auto loss = soft_dice_loss_batch(out, targets);
        network.zero_grad();
        network.backward(loss.gradient);
        network.clear_state();
        adam_decoupled_step(blocks, st.adam, lr, cfg.optimizer);
        network.project();
        st.batch = b + 1;

        LogRow row{st.batch, lr, loss.loss, std::nullopt};
        bool stop = false;
        bool last = st.batch == max_batches;
        if (st.batch % eval_every == 0 || last) {
            double dice = evaluate_dice(network, test_set, cfg.training.batch_size);
            row.test_dice = dice;
            if (dice > st.best_dice) {
                st.best_dice = dice;
                st.best_batch = st.batch;
                st.best = Snapshot::capture(network);
            }
            if (options.target_dice && dice >= *options.target_dice) {
                result.reached_target = true;
                stop = true;
            }
            if (patience > 0 && st.batch - st.best_batch >= patience) stop = true;
            if (options.time_budget && elapsed() > *options.time_budget) stop = true;
        }
        result.log.push_back(row);
        if (options.on_row) options.on_row(row);
        if (stop) break;
    }
    st.current = Snapshot::capture(network);
    if (st.best_dice < 0.0) {
        st.best_dice = evaluate_dice(network, test_set, cfg.training.batch_size);
        st.best_batch = st.batch;
        st.best = st.current;
    }
    st.best.restore(network);
    result.seconds = elapsed();
    return result;
}

namespace {

json blocks_to_json(const std::vector<std::string>& names, const std::vector<std::vector<double>>& values) {
    json j = json::object();
    for (std::size_t k = 0; k < names.size(); ++k) j[names[k]] = values[k];
    return j;
}

std::vector<std::vector<double>> blocks_from_json(const json& j, const std::vector<std::string>& names) {
    std::vector<std::vector<double>> out;
    for (const auto& name : names) {
        if (!j.contains(name)) throw std::runtime_error("checkpoint is missing block '" + name + "'");
        out.push_back(j.at(name).get<std::vector<double>>());
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::string& path, Network& network, const TrainState& state) {
    auto pnames = network.parameter_names();
    auto bnames = network.buffer_names();
    Snapshot best = state.best.parameters.empty() ? Snapshot::capture(network) : state.best;
    json j;
    j["magic"] = kCheckpointMagic;
    j["version"] = kCheckpointVersion;
    j["config"] = json::parse(network.config().to_json());
    j["parameters"] = blocks_to_json(pnames, best.parameters);
    j["buffers"] = blocks_to_json(bnames, best.buffers);
    if (!state.current.parameters.empty()) {
        j["current"] = {{"parameters", blocks_to_json(pnames, state.current.parameters)},
                        {"buffers", blocks_to_json(bnames, state.current.buffers)}};
    }
    if (state.adam.m.size() == pnames.size()) {
        j["adam"] = {{"step", state.adam.step},
                     {"m", blocks_to_json(pnames, state.adam.m)},
                     {"v", blocks_to_json(pnames, state.adam.v)}};
    }
    j["batch"] = state.batch;
    j["best_dice"] = state.best_dice;
    j["best_batch"] = state.best_batch;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    out << j.dump(1) << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw std::runtime_error("checkpoint '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object() || j.value("magic", std::string{}) != kCheckpointMagic) {
        throw std::runtime_error("'" + path + "' is not a semiscale checkpoint");
    }
    int version = j.value("version", 0);
    if (version != kCheckpointVersion) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    LoadedCheckpoint ck;
    ck.config = NetworkConfig::from_json(j.at("config").dump());
    Network probe(ck.config);
    auto pnames = probe.parameter_names();
    auto bnames = probe.buffer_names();
    ck.state.best.parameters = blocks_from_json(j.at("parameters"), pnames);
    ck.state.best.buffers = blocks_from_json(j.at("buffers"), bnames);
    if (j.contains("current")) {
        ck.state.current.parameters = blocks_from_json(j.at("current").at("parameters"), pnames);
        ck.state.current.buffers = blocks_from_json(j.at("current").at("buffers"), bnames);
    }
    if (j.contains("adam")) {
        ck.state.adam.step = j.at("adam").at("step").get<long>();
        ck.state.adam.m = blocks_from_json(j.at("adam").at("m"), pnames);
        ck.state.adam.v = blocks_from_json(j.at("adam").at("v"), pnames);
    }
    ck.state.batch = j.value("batch", 0L);
    ck.state.best_dice = j.value("best_dice", -1.0);
    ck.state.best_batch = j.value("best_batch", 0L);
    return ck;
}

Network network_from_checkpoint(const LoadedCheckpoint& checkpoint) {
    Network net(checkpoint.config);
    checkpoint.state.best.restore(net);
    return net;
}

}  // namespace semiscale
