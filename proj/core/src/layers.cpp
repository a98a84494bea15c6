#include "semiscale/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semiscale {

namespace {

struct Stencil {
    int x0, x1, y0, y1;
    double fx, fy;
};

// Bilinear stencil for sampling at (x - v.x, y - v.y) with Replicate clamping.
// The fractional weights depend on v alone, so every pixel uses bit-identical
// weights and the map commutes exactly with integer translations.
Stencil stencil_at(int x, int y, Vec2 v, int w, int h) {
    double ox = std::floor(-v.x);
    double oy = std::floor(-v.y);
    Stencil s;
    s.fx = -v.x - ox;
    s.fy = -v.y - oy;
    long ix = x + static_cast<long>(ox);
    long iy = y + static_cast<long>(oy);
    s.x0 = static_cast<int>(std::clamp<long>(ix, 0, w - 1));
    s.x1 = static_cast<int>(std::clamp<long>(ix + 1, 0, w - 1));
    s.y0 = static_cast<int>(std::clamp<long>(iy, 0, h - 1));
    s.y1 = static_cast<int>(std::clamp<long>(iy + 1, 0, h - 1));
    return s;
}

void require_batch(const Batch& batch, int channels, const char* who) {
    if (batch.empty()) throw std::invalid_argument(std::string(who) + ": empty batch");
    for (const auto& stack : batch) {
        require_uniform(stack);
        if (static_cast<int>(stack.size()) != channels) {
            throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(channels) +
                                        " channels, got " + std::to_string(stack.size()));
        }
    }
}

void require_matching(const Batch& upstream, const Batch& reference, const char* who) {
    if (upstream.size() != reference.size()) {
        throw std::invalid_argument(std::string(who) + ": upstream batch size mismatch");
    }
    for (std::size_t e = 0; e < upstream.size(); ++e) {
        if (upstream[e].size() != reference[e].size()) {
            throw std::invalid_argument(std::string(who) + ": upstream channel mismatch");
        }
        for (std::size_t c = 0; c < upstream[e].size(); ++c) {
            if (!upstream[e][c].same_shape(reference[e][c])) {
                throw std::invalid_argument(std::string(who) + ": upstream shape mismatch");
            }
        }
    }
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

void require_uniform(const FeatureStack& stack) {
    if (stack.empty()) throw std::invalid_argument("feature stack has no channels");
    for (const auto& g : stack) {
        if (!g.same_shape(stack.front())) {
            throw std::invalid_argument("feature stack channels differ in shape");
        }
    }
}

std::size_t Sublayer::parameter_count() {
    std::size_t n = 0;
    for (auto* block : parameters()) n += block->values.size();
    return n;
}

// ---- convection ------------------------------------------------------------

Grid2 convection_forward(Vec2 v, const Grid2& field) {
    const int w = field.width();
    const int h = field.height();
    Grid2 out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Stencil s = stencil_at(x, y, v, w, h);
            double top = (1.0 - s.fx) * field(s.x0, s.y0) + s.fx * field(s.x1, s.y0);
            double bottom = (1.0 - s.fx) * field(s.x0, s.y1) + s.fx * field(s.x1, s.y1);
            out(x, y) = (1.0 - s.fy) * top + s.fy * bottom;
        }
    }
    return out;
}

ConvectionGradient convection_backward(Vec2 v, const Grid2& field, const Grid2& upstream) {
    if (!field.same_shape(upstream)) throw std::invalid_argument("convection gradient shape mismatch");
    const int w = field.width();
    const int h = field.height();
    ConvectionGradient grad{{0.0, 0.0}, Grid2(w, h, 0.0)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double g = upstream(x, y);
            if (g == 0.0) continue;
            Stencil s = stencil_at(x, y, v, w, h);
            double f00 = field(s.x0, s.y0);
            double f10 = field(s.x1, s.y0);
            double f01 = field(s.x0, s.y1);
            double f11 = field(s.x1, s.y1);
            // d out / d px and d py; px = x - v.x
            double dpx = (1.0 - s.fy) * (f10 - f00) + s.fy * (f11 - f01);
            double dpy = (1.0 - s.fx) * (f01 - f00) + s.fx * (f11 - f10);
            grad.v.x -= g * dpx;
            grad.v.y -= g * dpy;
            grad.field(s.x0, s.y0) += g * (1.0 - s.fx) * (1.0 - s.fy);
            grad.field(s.x1, s.y0) += g * s.fx * (1.0 - s.fy);
            grad.field(s.x0, s.y1) += g * (1.0 - s.fx) * s.fy;
            grad.field(s.x1, s.y1) += g * s.fx * s.fy;
        }
    }
    return grad;
}

ConvectionSublayer::ConvectionSublayer(int channels)
    : channels_(channels), v_("v", static_cast<std::size_t>(2 * channels)) {
    if (channels < 1) throw std::invalid_argument("convection needs at least one channel");
}

Vec2 ConvectionSublayer::shift(int channel) const {
    return {v_.values[2 * channel], v_.values[2 * channel + 1]};
}

void ConvectionSublayer::set_shift(int channel, Vec2 v) {
    v_.values[2 * channel] = v.x;
    v_.values[2 * channel + 1] = v.y;
}

void ConvectionSublayer::initialize(std::mt19937_64& rng) {
    for (double& x : v_.values) x = uniform(rng, -1.0, 1.0);
}

Batch ConvectionSublayer::forward(const Batch& input, bool) {
    require_batch(input, channels_, "convection");
    Batch out(input.size());
    for (std::size_t e = 0; e < input.size(); ++e) {
        out[e].resize(channels_);
        for (int c = 0; c < channels_; ++c) out[e][c] = convection_forward(shift(c), input[e][c]);
    }
    input_ = input;
    return out;
}

Batch ConvectionSublayer::backward(const Batch& upstream) {
    if (!input_) throw MissingStateError("convection backward called without a saved forward pass");
    require_matching(upstream, *input_, "convection");
    Batch down(upstream.size());
    for (std::size_t e = 0; e < upstream.size(); ++e) {
        down[e].resize(channels_);
        for (int c = 0; c < channels_; ++c) {
            auto g = convection_backward(shift(c), (*input_)[e][c], upstream[e][c]);
            v_.grad[2 * c] += g.v.x;
            v_.grad[2 * c + 1] += g.v.y;
            down[e][c] = std::move(g.field);
        }
    }
    return down;
}

// ---- scale-space -------------------------------------------------------------

FeatureStack pde_sublayer_forward(const ScaleSpaceOptions& options, const std::vector<Mat2>& metrics,
                                  const FeatureStack& stack) {
    require_uniform(stack);
    if (metrics.size() != stack.size()) {
        throw std::invalid_argument("pde sublayer needs one metric per channel");
    }
    FeatureStack out(stack.size());
    for (std::size_t c = 0; c < stack.size(); ++c) {
        KernelSpec spec{options.kind, options.alpha, 1.0, metrics[c]};
        SampledKernel kernel =
            options.radius > 0 ? sample_kernel(spec, options.radius) : sample_kernel(spec);
        Grid2 field = stack[c];
        if (options.kind.tag() == SemifieldTag::Root) {
            for (double& x : field.values()) x = std::max(x, kRootInputFloor);
        }
        out[c] = convolve(options.kind, kernel, field, options.boundary);
    }
    return out;
}

ScaleSpaceSublayer::ScaleSpaceSublayer(int channels, ScaleSpaceOptions options)
    : channels_(channels), options_(options), h_("H", static_cast<std::size_t>(4 * channels)) {
    if (channels < 1) throw std::invalid_argument("scale-space sublayer needs at least one channel");
    if (options_.kind.tag() == SemifieldTag::Root && !(options_.kind.parameter() > 0.0)) {
        throw std::invalid_argument("root sublayers need p > 0");
    }
    KernelSpec{options_.kind, options_.alpha, 1.0, Mat2::identity()}.validate();
    for (int c = 0; c < channels_; ++c) set_metric(c, Mat2::identity());
}

Mat2 ScaleSpaceSublayer::metric(int channel) const {
    const double* p = h_.values.data() + 4 * channel;
    return {p[0], p[1], p[2], p[3]};
}

void ScaleSpaceSublayer::set_metric(int channel, const Mat2& h) {
    auto e = h.entries();
    std::copy(e.begin(), e.end(), h_.values.begin() + 4 * channel);
}

KernelSpec ScaleSpaceSublayer::kernel_spec(int channel) const {
    return {options_.kind, options_.alpha, 1.0, metric(channel)};
}

void ScaleSpaceSublayer::initialize(std::mt19937_64& rng) {
    for (int c = 0; c < channels_; ++c) {
        double u = uniform(rng, 0.7, 1.3);
        double s = uniform(rng, -0.1, 0.1);
        set_metric(c, {u, s, -s, u});
    }
}

void ScaleSpaceSublayer::project() {
    for (int c = 0; c < channels_; ++c) set_metric(c, clamp_condition(metric(c), kMaxCondition));
}

Batch ScaleSpaceSublayer::forward(const Batch& input, bool training) {
    require_batch(input, channels_, "scale-space");
    State st;
    st.kernels.reserve(channels_);
    for (int c = 0; c < channels_; ++c) {
        KernelSpec spec = kernel_spec(c);
        st.kernels.push_back(options_.radius > 0 ? sample_kernel(spec, options_.radius)
                                                 : sample_kernel(spec));
    }
    st.input = input;
    if (options_.kind.tag() == SemifieldTag::Root) {
        for (auto& stack : st.input) {
            for (auto& g : stack) {
                for (double& x : g.values()) x = std::max(x, kRootInputFloor);
            }
        }
    }
    // Winner bookkeeping is only needed when a backward pass may follow.
    const bool tropical = options_.kind.is_tropical();
    const bool traced = tropical && training;
    st.output.resize(input.size());
    if (traced) st.traces.resize(input.size());
    for (std::size_t e = 0; e < input.size(); ++e) {
        st.output[e].resize(channels_);
        if (traced) st.traces[e].resize(channels_);
        for (int c = 0; c < channels_; ++c) {
            if (traced) {
                st.output[e][c] = convolve_tropical_traced(options_.kind, st.kernels[c], st.input[e][c],
                                                           options_.boundary, st.traces[e][c]);
            } else {
                st.output[e][c] =
                    convolve(options_.kind, st.kernels[c], st.input[e][c], options_.boundary);
            }
        }
    }
    Batch out = st.output;
    state_ = std::move(st);
    return out;
}

Batch ScaleSpaceSublayer::backward(const Batch& upstream) {
    if (!state_) throw MissingStateError("scale-space backward called without a saved forward pass");
    const State& st = *state_;
    if (options_.kind.is_tropical() && st.traces.empty()) {
        throw MissingStateError("tropical backward needs a forward pass in training mode");
    }
    require_matching(upstream, st.output, "scale-space");
    Batch down(upstream.size());
    std::vector<std::vector<double>> taps(channels_);
    for (int c = 0; c < channels_; ++c) taps[c].assign(st.kernels[c].values.size(), 0.0);
    for (std::size_t e = 0; e < upstream.size(); ++e) {
        down[e].resize(channels_);
        for (int c = 0; c < channels_; ++c) {
            const TropicalTrace* trace = st.traces.empty() ? nullptr : &st.traces[e][c];
            auto g = convolve_backward(options_.kind, st.kernels[c], st.input[e][c], st.output[e][c],
                                       upstream[e][c], options_.boundary, trace);
            for (std::size_t i = 0; i < g.taps.size(); ++i) taps[c][i] += g.taps[i];
            if (options_.kind.tag() == SemifieldTag::Root) {
                // The floor is flat below kRootInputFloor.
                const auto& in = st.input[e][c].values();
                auto& gv = g.field.values();
                for (std::size_t i = 0; i < gv.size(); ++i) {
                    if (in[i] == kRootInputFloor) gv[i] = 0.0;
                }
            }
            down[e][c] = std::move(g.field);
        }
    }
    for (int c = 0; c < channels_; ++c) {
        Mat2 dh = sample_kernel_metric_gradient(kernel_spec(c), st.kernels[c].radius, taps[c]);
        h_.grad[4 * c] += dh.a;
        h_.grad[4 * c + 1] += dh.b;
        h_.grad[4 * c + 2] += dh.c;
        h_.grad[4 * c + 3] += dh.d;
    }
    return down;
}

// ---- affine ------------------------------------------------------------------

FeatureStack affine_forward(const std::vector<double>& w, const std::vector<double>& b, int in_channels,
                            int out_channels, const FeatureStack& stack) {
    require_uniform(stack);
    if (static_cast<int>(stack.size()) != in_channels) {
        throw std::invalid_argument("affine input has " + std::to_string(stack.size()) +
                                    " channels, expected " + std::to_string(in_channels));
    }
    if (w.size() != static_cast<std::size_t>(in_channels) * static_cast<std::size_t>(out_channels)) {
        throw std::invalid_argument("affine weight matrix has the wrong size");
    }
    if (!b.empty() && b.size() != static_cast<std::size_t>(out_channels)) {
        throw std::invalid_argument("affine bias vector has the wrong size");
    }
    const int width = stack.front().width();
    const int height = stack.front().height();
    FeatureStack out(out_channels);
    for (int j = 0; j < out_channels; ++j) {
        Grid2 g(width, height, b.empty() ? 0.0 : b[j]);
        auto& gv = g.values();
        for (int i = 0; i < in_channels; ++i) {
            double wij = w[static_cast<std::size_t>(j) * in_channels + i];
            if (wij == 0.0) continue;
            const auto& fv = stack[i].values();
            for (std::size_t p = 0; p < gv.size(); ++p) gv[p] += wij * fv[p];
        }
        out[j] = std::move(g);
    }
    return out;
}

AffineSublayer::AffineSublayer(int in_channels, int out_channels, bool bias)
    : in_(in_channels),
      out_(out_channels),
      bias_(bias),
      w_("w", static_cast<std::size_t>(in_channels) * static_cast<std::size_t>(out_channels)),
      b_("b", bias ? static_cast<std::size_t>(out_channels) : 0) {
    if (in_channels < 1 || out_channels < 1) throw std::invalid_argument("affine needs channels >= 1");
}

std::vector<ParameterBlock*> AffineSublayer::parameters() {
    if (bias_) return {&w_, &b_};
    return {&w_};
}

void AffineSublayer::initialize(std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(in_));
    for (double& x : w_.values) x = uniform(rng, -bound, bound);
    for (double& x : b_.values) x = uniform(rng, -bound, bound);
}

Batch AffineSublayer::forward(const Batch& input, bool) {
    require_batch(input, in_, "affine");
    Batch out(input.size());
    for (std::size_t e = 0; e < input.size(); ++e) {
        out[e] = affine_forward(w_.values, b_.values, in_, out_, input[e]);
    }
    input_ = input;
    return out;
}

Batch AffineSublayer::backward(const Batch& upstream) {
    if (!input_) throw MissingStateError("affine backward called without a saved forward pass");
    if (upstream.size() != input_->size()) throw std::invalid_argument("affine: batch size mismatch");
    Batch down(upstream.size());
    for (std::size_t e = 0; e < upstream.size(); ++e) {
        const auto& in = (*input_)[e];
        const auto& up = upstream[e];
        if (static_cast<int>(up.size()) != out_) throw std::invalid_argument("affine: channel mismatch");
        const int width = in.front().width();
        const int height = in.front().height();
        down[e].assign(in_, Grid2(width, height, 0.0));
        for (int j = 0; j < out_; ++j) {
            const auto& gv = up[j].values();
            if (bias_) {
                double s = 0.0;
                for (double g : gv) s += g;
                b_.grad[j] += s;
            }
            for (int i = 0; i < in_; ++i) {
                const auto& fv = in[i].values();
                double wij = w_.values[static_cast<std::size_t>(j) * in_ + i];
                auto& dv = down[e][i].values();
                double s = 0.0;
                for (std::size_t p = 0; p < gv.size(); ++p) {
                    s += gv[p] * fv[p];
                    dv[p] += wij * gv[p];
                }
                w_.grad[static_cast<std::size_t>(j) * in_ + i] += s;
            }
        }
    }
    return down;
}

// ---- channel normalisation ------------------------------------------------------

ChannelNormSublayer::ChannelNormSublayer(int channels, double eps, double momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_("gamma", static_cast<std::size_t>(channels)),
      beta_("beta", static_cast<std::size_t>(channels)),
      running_mean_("running_mean", static_cast<std::size_t>(channels)),
      running_var_("running_var", static_cast<std::size_t>(channels)) {
    if (channels < 1) throw std::invalid_argument("channel norm needs at least one channel");
    std::fill(gamma_.values.begin(), gamma_.values.end(), 1.0);
    std::fill(running_var_.values.begin(), running_var_.values.end(), 1.0);
}

Batch ChannelNormSublayer::forward(const Batch& input, bool training) {
    require_batch(input, channels_, "channel norm");
    State st;
    st.training = training;
    st.inv_std.resize(channels_);
    st.normalized = input;
    Batch out = input;
    for (int c = 0; c < channels_; ++c) {
        double mean;
        double var;
        if (training) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& stack : input) {
                for (double x : stack[c].values()) sum += x;
                n += stack[c].size();
            }
            mean = sum / static_cast<double>(n);
            double sq = 0.0;
            for (const auto& stack : input) {
                for (double x : stack[c].values()) sq += (x - mean) * (x - mean);
            }
            var = sq / static_cast<double>(n);
            double unbiased = n > 1 ? sq / static_cast<double>(n - 1) : var;
            running_mean_.values[c] = (1.0 - momentum_) * running_mean_.values[c] + momentum_ * mean;
            running_var_.values[c] = (1.0 - momentum_) * running_var_.values[c] + momentum_ * unbiased;
        } else {
            mean = running_mean_.values[c];
            var = running_var_.values[c];
        }
        double inv = 1.0 / std::sqrt(var + eps_);
        st.inv_std[c] = inv;
        for (std::size_t e = 0; e < input.size(); ++e) {
            auto& nv = st.normalized[e][c].values();
            auto& ov = out[e][c].values();
            for (std::size_t p = 0; p < nv.size(); ++p) {
                nv[p] = (nv[p] - mean) * inv;
                ov[p] = gamma_.values[c] * nv[p] + beta_.values[c];
            }
        }
    }
    state_ = std::move(st);
    return out;
}

Batch ChannelNormSublayer::backward(const Batch& upstream) {
    if (!state_) throw MissingStateError("channel norm backward called without a saved forward pass");
    const State& st = *state_;
    require_matching(upstream, st.normalized, "channel norm");
    Batch down = upstream;
    for (int c = 0; c < channels_; ++c) {
        double sum_g = 0.0;
        double sum_gx = 0.0;
        std::size_t n = 0;
        for (std::size_t e = 0; e < upstream.size(); ++e) {
            const auto& gv = upstream[e][c].values();
            const auto& xv = st.normalized[e][c].values();
            for (std::size_t p = 0; p < gv.size(); ++p) {
                sum_g += gv[p];
                sum_gx += gv[p] * xv[p];
            }
            n += gv.size();
        }
        beta_.grad[c] += sum_g;
        gamma_.grad[c] += sum_gx;
        const double scale = gamma_.values[c] * st.inv_std[c];
        const double mean_g = sum_g / static_cast<double>(n);
        const double mean_gx = sum_gx / static_cast<double>(n);
        for (std::size_t e = 0; e < upstream.size(); ++e) {
            auto& dv = down[e][c].values();
            const auto& xv = st.normalized[e][c].values();
            for (std::size_t p = 0; p < dv.size(); ++p) {
                dv[p] = st.training ? scale * (dv[p] - mean_g - xv[p] * mean_gx) : scale * dv[p];
            }
        }
    }
    return down;
}

// ---- logistic ------------------------------------------------------------------

Batch LogisticSublayer::forward(const Batch& input, bool) {
    require_batch(input, channels_, "logistic");
    Batch out = input;
    for (auto& stack : out) {
        for (auto& g : stack) {
            for (double& x : g.values()) {
                x = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
            }
        }
    }
    output_ = out;
    return out;
}

Batch LogisticSublayer::backward(const Batch& upstream) {
    if (!output_) throw MissingStateError("logistic backward called without a saved forward pass");
    require_matching(upstream, *output_, "logistic");
    Batch down = upstream;
    for (std::size_t e = 0; e < down.size(); ++e) {
        for (std::size_t c = 0; c < down[e].size(); ++c) {
            auto& dv = down[e][c].values();
            const auto& yv = (*output_)[e][c].values();
            for (std::size_t p = 0; p < dv.size(); ++p) dv[p] *= yv[p] * (1.0 - yv[p]);
        }
    }
    return down;
}

}  // namespace semiscale
