#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semiscale/network.hpp"

namespace semiscale {

/// Examples with their binary target masks.
struct Dataset {
    std::vector<FeatureStack> images;
    std::vector<Grid2> masks;

    std::size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }
    void push_back(FeatureStack image, Grid2 mask);
    /// Deterministic subset of ceil(fraction * size) examples (at least one).
    Dataset subsample(double fraction, std::uint64_t seed) const;
};

/// 2|P & T| / (|P| + |T|) with P = prediction >= threshold, T = target > 0.5;
/// 1 when both are empty.
double dice_coefficient(const Grid2& prediction, const Grid2& target, double threshold = 0.5);

struct DiceCounts {
    double intersection = 0.0;
    double predicted = 0.0;
    double actual = 0.0;

    void add(const Grid2& prediction, const Grid2& target, double threshold = 0.5);
    double dice() const;
};

/// 1 - (2 sum p t + 1) / (sum p + sum t + 1).
double soft_dice_loss(const Grid2& prediction, const Grid2& target);

struct LossWithGradient {
    double loss = 0.0;
    Batch gradient;  // dL/dp, one single-channel stack per example
};

/// Soft Dice loss with the sums pooled over the whole batch.
LossWithGradient soft_dice_loss_batch(const Batch& predictions, const std::vector<const Grid2*>& targets);

/// Linear decay from lr_init to lr_final over warmdown_batches, constant after.
double learning_rate(const OptimizerConfig& config, long batch);

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    long step = 0;

    void reset(const std::vector<ParameterBlock*>& blocks);
};

/// One bias-corrected Adam step with decoupled weight decay:
///   p <- p - lr * (m_hat / (sqrt(v_hat) + eps)) - lr * wd * p
void adam_decoupled_step(const std::vector<ParameterBlock*>& blocks, AdamState& state, double lr,
                         const OptimizerConfig& config);

struct LogRow {
    long batch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    std::optional<double> test_dice;
};

/// Parameter values and running statistics, in Network::parameters() order.
struct Snapshot {
    std::vector<std::vector<double>> parameters;
    std::vector<std::vector<double>> buffers;

    static Snapshot capture(Network& network);
    void restore(Network& network) const;
};

struct TrainState {
    Snapshot current;
    Snapshot best;
    AdamState adam;
    long batch = 0;
    double best_dice = -1.0;
    long best_batch = 0;
};

struct TrainOptions {
    /// Overrides of the config's training section; negative means "use config".
    long max_batches = -1;
    long patience = -1;
    long eval_every = -1;
    /// Stop as soon as the test Dice reaches this value (disabled when unset).
    std::optional<double> target_dice;
    /// Wall-clock budget in seconds (disabled when unset).
    std::optional<double> time_budget;
    /// Called for every logged row.
    std::function<void(const LogRow&)> on_row;
};

struct TrainResult {
    TrainState state;
    std::vector<LogRow> log;
    double seconds = 0.0;
    bool reached_target = false;
};

/// Pooled Dice over a dataset, evaluating in batches with normalisation in eval mode.
double evaluate_dice(Network& network, const Dataset& data, int batch_size = 8);

/// Runs the training protocol; the network ends up holding the best snapshot.
TrainResult train(Network& network, const Dataset& train_set, const Dataset& test_set,
                  const TrainOptions& options = {});

/// Versioned JSON checkpoint: config, best parameters, running statistics,
/// optimizer moments and counters.
void save_checkpoint(const std::string& path, Network& network, const TrainState& state);

struct LoadedCheckpoint {
    NetworkConfig config;
    TrainState state;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

/// Builds the network of a checkpoint with its best parameters.
Network network_from_checkpoint(const LoadedCheckpoint& checkpoint);

inline constexpr const char* kCheckpointMagic = "semiscale-checkpoint";
inline constexpr int kCheckpointVersion = 1;

}  // namespace semiscale
