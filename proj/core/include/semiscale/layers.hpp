#pragma once

// Trainable sublayers of a PDE layer. Every sublayer maps a Batch (one
// FeatureStack per example) to a Batch, records what its backward pass needs,
// and accumulates parameter gradients into its ParameterBlocks.

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semiscale/grid.hpp"
#include "semiscale/kernel.hpp"
#include "semiscale/linalg2.hpp"
#include "semiscale/semiconv.hpp"

namespace semiscale {

/// Channels of one example; all channels share width and height.
using FeatureStack = std::vector<Grid2>;
using Batch = std::vector<FeatureStack>;

/// Throws std::invalid_argument unless the stack is non-empty and uniform.
void require_uniform(const FeatureStack& stack);

/// Thrown by backward() when no forward state was recorded.
class MissingStateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct ParameterBlock {
    std::string name;
    std::vector<double> values;
    std::vector<double> grad;

    explicit ParameterBlock(std::string n = {}, std::size_t size = 0)
        : name(std::move(n)), values(size, 0.0), grad(size, 0.0) {}
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// ---- free-standing forward/backward maps -------------------------------

/// out(m, n) = bilinear sample of f at (m - v.x, n - v.y), Replicate outside.
Grid2 convection_forward(Vec2 v, const Grid2& field);

struct ConvectionGradient {
    Vec2 v;
    Grid2 field;
};
ConvectionGradient convection_backward(Vec2 v, const Grid2& field, const Grid2& upstream);

/// Inputs to Root sublayers are clamped from below at this value.
inline constexpr double kRootInputFloor = 1e-8;

struct ScaleSpaceOptions {
    SemifieldKind kind = SemifieldKind::linear();
    double alpha = 2.0;
    BoundaryPolicy boundary = BoundaryPolicy::Replicate;
    /// 0 picks default_radius(H) per channel and call.
    int radius = 0;
};

/// Depthwise convolution of channel i with sample_kernel(kind, alpha, t = 1, H_i).
FeatureStack pde_sublayer_forward(const ScaleSpaceOptions& options, const std::vector<Mat2>& metrics,
                                  const FeatureStack& stack);

/// out_j = b_j + sum_i w[j][i] in_i, with w stored row-major (C_out x C_in).
FeatureStack affine_forward(const std::vector<double>& w, const std::vector<double>& b, int in_channels,
                            int out_channels, const FeatureStack& stack);

// ---- sublayers -----------------------------------------------------------

class Sublayer {
public:
    virtual ~Sublayer() = default;

    virtual std::string type() const = 0;
    virtual int in_channels() const = 0;
    virtual int out_channels() const = 0;

    /// `training` selects batch statistics in normalisation layers.
    virtual Batch forward(const Batch& input, bool training) = 0;
    /// Adds parameter gradients into the blocks and returns dL/d(input).
    virtual Batch backward(const Batch& upstream) = 0;

    virtual std::vector<ParameterBlock*> parameters() { return {}; }
    /// Non-trainable state (running statistics) to persist in checkpoints.
    virtual std::vector<ParameterBlock*> buffers() { return {}; }
    /// Re-establishes parameter invariants after an optimizer step.
    virtual void project() {}
    virtual void clear_state() = 0;

    std::size_t parameter_count();
};

class ConvectionSublayer : public Sublayer {
public:
    explicit ConvectionSublayer(int channels);

    std::string type() const override { return "convection"; }
    int in_channels() const override { return channels_; }
    int out_channels() const override { return channels_; }
    Batch forward(const Batch& input, bool training) override;
    Batch backward(const Batch& upstream) override;
    std::vector<ParameterBlock*> parameters() override { return {&v_}; }
    void clear_state() override { input_.reset(); }

    Vec2 shift(int channel) const;
    void set_shift(int channel, Vec2 v);
    void initialize(std::mt19937_64& rng);

private:
    int channels_;
    ParameterBlock v_;
    std::optional<Batch> input_;
};

class ScaleSpaceSublayer : public Sublayer {
public:
    ScaleSpaceSublayer(int channels, ScaleSpaceOptions options);

    std::string type() const override { return options_.kind.name(); }
    int in_channels() const override { return channels_; }
    int out_channels() const override { return channels_; }
    Batch forward(const Batch& input, bool training) override;
    Batch backward(const Batch& upstream) override;
    std::vector<ParameterBlock*> parameters() override { return {&h_}; }
    void project() override;
    void clear_state() override { state_.reset(); }

    const ScaleSpaceOptions& options() const { return options_; }
    void set_radius(int radius) { options_.radius = radius; }
    Mat2 metric(int channel) const;
    void set_metric(int channel, const Mat2& h);
    KernelSpec kernel_spec(int channel) const;
    void initialize(std::mt19937_64& rng);

    static constexpr double kMaxCondition = 1e6;

private:
    struct State {
        Batch input;  // after the Root floor, if any
        Batch output;
        std::vector<SampledKernel> kernels;
        std::vector<std::vector<TropicalTrace>> traces;  // [example][channel]
    };
    int channels_;
    ScaleSpaceOptions options_;
    ParameterBlock h_;
    std::optional<State> state_;
};

class AffineSublayer : public Sublayer {
public:
    AffineSublayer(int in_channels, int out_channels, bool bias);

    std::string type() const override { return "affine"; }
    int in_channels() const override { return in_; }
    int out_channels() const override { return out_; }
    Batch forward(const Batch& input, bool training) override;
    Batch backward(const Batch& upstream) override;
    std::vector<ParameterBlock*> parameters() override;
    void clear_state() override { input_.reset(); }

    bool has_bias() const { return bias_; }
    ParameterBlock& weights() { return w_; }
    ParameterBlock& biases() { return b_; }
    /// w, b ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
    void initialize(std::mt19937_64& rng);

private:
    int in_;
    int out_;
    bool bias_;
    ParameterBlock w_;
    ParameterBlock b_;
    std::optional<Batch> input_;
};

/// Per-channel batch normalisation over examples and pixels:
///   y = gamma * (x - mean) / sqrt(var + eps) + beta
/// Training mode uses batch statistics (biased variance) and updates running
/// statistics with `momentum` (unbiased variance); eval mode uses the running ones.
class ChannelNormSublayer : public Sublayer {
public:
    explicit ChannelNormSublayer(int channels, double eps = 1e-5, double momentum = 0.1);

    std::string type() const override { return "channel_norm"; }
    int in_channels() const override { return channels_; }
    int out_channels() const override { return channels_; }
    Batch forward(const Batch& input, bool training) override;
    Batch backward(const Batch& upstream) override;
    std::vector<ParameterBlock*> parameters() override { return {&gamma_, &beta_}; }
    std::vector<ParameterBlock*> buffers() override { return {&running_mean_, &running_var_}; }
    void clear_state() override { state_.reset(); }

private:
    struct State {
        Batch normalized;
        std::vector<double> inv_std;
        bool training = false;
    };
    int channels_;
    double eps_;
    double momentum_;
    ParameterBlock gamma_;
    ParameterBlock beta_;
    ParameterBlock running_mean_;
    ParameterBlock running_var_;
    std::optional<State> state_;
};

/// Elementwise 1 / (1 + exp(-x)).
class LogisticSublayer : public Sublayer {
public:
    explicit LogisticSublayer(int channels) : channels_(channels) {}

    std::string type() const override { return "logistic"; }
    int in_channels() const override { return channels_; }
    int out_channels() const override { return channels_; }
    Batch forward(const Batch& input, bool training) override;
    Batch backward(const Batch& upstream) override;
    void clear_state() override { output_.reset(); }

private:
    int channels_;
    std::optional<Batch> output_;
};

}  // namespace semiscale
