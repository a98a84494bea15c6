#pragma once

// PDE-CNN assembly.
//
//   lift      affine in -> C, no bias
//   N times:  [convection] -> scale-space sublayers in menu order
//             -> affine C -> C, no bias -> per-channel normalisation
//   head      affine C -> 1, no bias -> logistic
//
// Parameter count: in*C + N*(C^2 + 2C + 2C*[convection] + 4C*k) + C,
// with k the number of scale-space sublayers per layer (same menu everywhere).

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "semiscale/layers.hpp"

namespace semiscale {

struct OptimizerConfig {
    double lr_init = 0.01;
    double lr_final = 0.001;
    long warmdown_batches = 1000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

struct TrainingConfig {
    int batch_size = 8;
    long eval_every = 100;
    long patience = 2000;
    long max_batches = 20000;
};

/// Menu entries: "convection", "linear", "root:p", "log:mu", "tmax", "tmin".
struct NetworkConfig {
    int layers = 6;
    int channels = 24;
    int input_channels = 1;
    std::vector<std::vector<std::string>> menus;  // one per layer
    double alpha = 2.0;
    BoundaryPolicy boundary = BoundaryPolicy::Replicate;
    OptimizerConfig optimizer;
    TrainingConfig training;
    std::uint64_t seed = 0;

    /// Same menu for every layer.
    static NetworkConfig uniform(int layers, int channels, int input_channels,
                                 std::vector<std::string> menu);

    void validate() const;
    /// Closed-form count from the formula in the file comment (summed per layer).
    std::size_t parameter_count() const;

    static NetworkConfig from_json(const std::string& text);
    std::string to_json() const;
};

class Network {
public:
    explicit Network(const NetworkConfig& config);

    const NetworkConfig& config() const { return config_; }

    /// input: one stack of `input_channels` fields per example; returns one
    /// probability field per example (single-channel stacks).
    Batch forward(const Batch& input, bool training);
    /// upstream: dL/d(probability); accumulates into parameter gradients.
    void backward(const Batch& upstream);

    std::vector<ParameterBlock*> parameters();
    std::vector<ParameterBlock*> buffers();
    /// Stable names "index.type.block" matching parameters() / buffers().
    std::vector<std::string> parameter_names();
    std::vector<std::string> buffer_names();

    std::size_t parameter_count();
    void zero_grad();
    void project();
    void clear_state();

    std::vector<std::unique_ptr<Sublayer>>& sublayers() { return sublayers_; }

private:
    NetworkConfig config_;
    std::vector<std::unique_ptr<Sublayer>> sublayers_;
};

}  // namespace semiscale
