#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aot/data.hpp"
#include "aot/model.hpp"
#include "aot/schedule.hpp"
#include "aot/transport.hpp"

namespace aot {

enum class AugmentMode { none, jitter };

// none -> identity; jitter -> adds N(0, jitter_std^2) per coordinate.
PointSet augment(const PointSet& points, AugmentMode mode, double jitter_std, Rng& rng);

struct TrainConfig {
    std::size_t pairs = 512;     // N: pool size, paired per refresh
    std::size_t minibatch = 32;  // B: must divide N
    PairingMode pairing = PairingMode::aot;
    PairingCost pairing_cost = PairingCost::euclidean;
    bool conditional = false;
    double p_mean = kDefaultPMean;
    double p_std = kDefaultPStd;
    double sigma_data = kDefaultSigmaData;
    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double ema_decay = 0.999;
    int refreshes = 1000;
    std::uint64_t seed = 0;
    AugmentMode augment = AugmentMode::none;
    double jitter_std = 0.0;
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::size_t embed_frequencies = 16;

    void validate() const;
};

struct TrainRecord {
    int refresh = 0;
    double mean_loss = 0.0;
    double mean_pairing_cost = 0.0;  // per pair
    double wall_ms = 0.0;
};

struct TrainLog {
    std::vector<TrainRecord> records;
};

struct TrainResult {
    DenoiserModel model;          // raw (non-EMA) weights
    std::vector<double> ema_params;
    TrainLog log;

    // Evaluation convention: EMA weights.
    DenoiserModel ema_model() const;
};

// Algorithm-1-style loop: per refresh draw N points and N fresh noises,
// augment, pair (AOT or identity), consume every pair exactly once in
// minibatches of B with one sigma draw per element, Adam step + EMA update
// per minibatch. Data/noise/sigma/augment draws use separate RNG substreams
// keyed off config.seed, so switching pairing mode changes nothing else.
TrainResult train(const TrainConfig& config, const Dataset& dataset);

// Adam with bias correction; update order is fixed for determinism.
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t param_count, double lr, double beta1, double beta2, double eps);
    void step(std::vector<double>& params, const std::vector<double>& grads);

private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<double> m_, v_;
    long t_ = 0;
};

// Versioned JSON checkpoint; self-describing and exact: parameter doubles
// survive the round trip bit-identically.
struct Checkpoint {
    int version = 1;
    DenoiserConfig model;
    std::vector<double> params;
    std::vector<double> ema_params;
    std::string config_json;  // TrainConfig snapshot (or "{}" when absent)
    std::uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const TrainResult& result, const TrainConfig& config);
DenoiserModel model_from_checkpoint(const Checkpoint& ckpt, bool use_ema = true);

// TrainConfig <-> JSON (the CLI config-file format, minus the dataset block).
std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& json_text);

}  // namespace aot
