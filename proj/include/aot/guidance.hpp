#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aot/data.hpp"
#include "aot/model.hpp"
#include "aot/sampler.hpp"
#include "aot/training.hpp"

namespace aot {

struct DiscriminatorConfig {
    std::size_t dim = 2;
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::size_t embed_frequencies = 16;
    double sigma_data = kDefaultSigmaData;
    int class_count = 0;
};

// Real-vs-generated classifier on noisy inputs, sharing the denoiser's
// featurization (c_in-scaled x, sigma embedding, optional one-hot label).
// Output is a single logit = log(d / (1 - d)).
class Discriminator {
public:
    Discriminator(DiscriminatorConfig config, Rng& init_rng);

    const DiscriminatorConfig& config() const { return config_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    double logit(std::span<const double> x, double sigma, int label = -1) const;

    // d(logit)/dx by reverse mode through the net and the c_in scaling.
    std::vector<double> logit_grad_x(std::span<const double> x, double sigma,
                                     int label = -1) const;

    // Mean binary cross-entropy over (input, sigma, target) triples plus
    // parameter gradients. targets[i] is 1 for real, 0 for generated.
    GradientBundle bce_loss_and_grad(const PointSet& noisy_inputs,
                                     std::span<const double> sigmas,
                                     std::span<const double> targets,
                                     const std::vector<int>& labels = {}) const;

private:
    std::vector<double> build_features(std::span<const double> x, double sigma,
                                       int label) const;

    DiscriminatorConfig config_;
    Mlp net_;
    std::vector<double> params_;
};

struct DiscTrainConfig {
    std::size_t pairs = 512;     // N per pool (one pool each for real/generated)
    std::size_t minibatch = 32;  // B per class per step
    bool conditional = false;
    PairingCost pairing_cost = PairingCost::euclidean;
    double p_mean = kDefaultPMean;
    double p_std = kDefaultPStd;
    double sigma_data = kDefaultSigmaData;
    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int refreshes = 200;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::size_t embed_frequencies = 16;

    void validate() const;
};

// BCE training on noisy inputs y + sigma * eps. When use_aot is set, eps is
// AOT-paired within each of the real and generated pools (class-wise when
// labels exist); otherwise pairing is independent. Real and generated pools
// use separate RNG substreams, so toggling use_aot only permutes noise.
Discriminator train_discriminator(const Dataset& real, const Dataset& generated,
                                  bool use_aot, const DiscTrainConfig& config);

// Density-ratio guidance: D'(x; sigma) = D(x; sigma) + w sigma^2 d/dx logit.
// w == 0 short-circuits to the plain denoiser.
std::vector<double> guided_denoise(const DenoiserModel& model, const Discriminator& disc,
                                   std::span<const double> x, double sigma, double w,
                                   int label = -1);

// Heun sampling with the guided denoiser; nfe counts base-model evaluations,
// guidance_evals counts discriminator evaluations.
Trajectory guided_sample(const DenoiserModel& model, const Discriminator& disc,
                         const NoiseSchedule& schedule, std::span<const double> x_init,
                         double w, int label = -1);

// Discriminator checkpoints share the versioned JSON envelope.
void save_discriminator(const Discriminator& disc, const std::string& path);
Discriminator load_discriminator(const std::string& path);

// Sampling-time guidance settings: strength plus the checkpoint to pull the
// discriminator from.
struct GuidanceConfig {
    double weight = 0.0;
    std::string discriminator_checkpoint;

    void validate() const;
};

Discriminator load_guidance(const GuidanceConfig& config);

}  // namespace aot
