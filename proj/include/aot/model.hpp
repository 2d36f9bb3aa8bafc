#pragma once

#include <functional>
#include <span>
#include <vector>

#include "aot/common.hpp"
#include "aot/schedule.hpp"
#include "aot/transport.hpp"

namespace aot {

// Fully-connected net: SiLU hidden layers, linear output. Parameters live in
// one flat vector owned by the caller; the net only knows the layout.
struct MlpLayout {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;
    std::size_t output_dim = 0;
};

class Mlp {
public:
    explicit Mlp(MlpLayout layout);

    std::size_t param_count() const { return param_count_; }
    const MlpLayout& layout() const { return layout_; }

    // Fan-in scaled Gaussian init; the output layer is zeroed when
    // zero_output is set so the surrounding skip path dominates at start.
    std::vector<double> init_params(Rng& rng, bool zero_output) const;

    // Per-call activation storage; reuse across calls to avoid allocation.
    struct Tape {
        std::vector<std::vector<double>> pre;   // pre-activation per layer
        std::vector<std::vector<double>> post;  // post-activation per layer
    };

    // Returns the output activations; fills the tape for backward().
    std::span<const double> forward(std::span<const double> params,
                                    std::span<const double> input, Tape& tape) const;

    // Reverse pass: accumulates dL/dparams into param_grads (+=) given
    // dL/doutput; writes dL/dinput into input_grad when non-empty.
    void backward(std::span<const double> params, std::span<const double> input,
                  const Tape& tape, std::span<const double> output_grad,
                  std::span<double> param_grads, std::span<double> input_grad) const;

private:
    MlpLayout layout_;
    std::vector<std::size_t> sizes_;           // input, hidden..., output
    std::vector<std::size_t> weight_offsets_;  // per layer into flat params
    std::vector<std::size_t> bias_offsets_;
    std::size_t param_count_ = 0;
};

// Sinusoidal features of c_noise = ln(sigma)/4, geometrically spaced
// frequencies; 2 * frequency_count values.
std::vector<double> sigma_embedding(double c_noise, std::size_t frequency_count);

struct DenoiserConfig {
    std::size_t dim = 2;
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::size_t embed_frequencies = 16;
    double sigma_data = kDefaultSigmaData;
    int class_count = 0;  // 0 = unconditional
};

struct GradientBundle {
    double loss = 0.0;
    std::vector<double> grads;
};

// EDM-preconditioned denoiser:
//   D(x; sigma) = c_skip * x + c_out * F(c_in * x, embed(c_noise) [, onehot])
// with c_skip = sd^2/(s^2+sd^2), c_out = s*sd/sqrt(s^2+sd^2),
// c_in = 1/sqrt(s^2+sd^2), c_noise = ln(s)/4.
class DenoiserModel {
public:
    DenoiserModel(DenoiserConfig config, Rng& init_rng);

    const DenoiserConfig& config() const { return config_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::vector<double> denoise(std::span<const double> x, double sigma,
                                int label = -1) const;

    // Mean weighted reconstruction loss over the minibatch and its gradient
    // w.r.t. all parameters (reverse mode). One sigma per element.
    GradientBundle loss_and_grad(const PairedBatch& minibatch,
                                 std::span<const double> sigmas) const;

private:
    std::vector<double> build_features(std::span<const double> x, double sigma,
                                       int label) const;

    DenoiserConfig config_;
    Mlp net_;
    std::vector<double> params_;
};

// Closed-form posterior-mean denoisers, exact for their generating
// distribution. Sampler and diagnostics oracles.
class AnalyticDenoiser {
public:
    static AnalyticDenoiser point_mass(std::vector<double> mu);
    static AnalyticDenoiser isotropic_gaussian(std::vector<double> mu, double s);
    static AnalyticDenoiser empirical(PointSet dataset);

    std::vector<double> denoise(std::span<const double> x, double sigma) const;
    std::size_t dim() const;

private:
    enum class Kind { point_mass, isotropic_gaussian, empirical };
    Kind kind_ = Kind::point_mass;
    std::vector<double> mu_;
    double s_ = 0.0;
    PointSet dataset_;
};

// Common denoiser signature consumed by the samplers.
using DenoiseFn = std::function<std::vector<double>(std::span<const double>, double)>;

DenoiseFn as_denoise_fn(const DenoiserModel& model, int label = -1);
DenoiseFn as_denoise_fn(const AnalyticDenoiser& oracle);

}  // namespace aot
