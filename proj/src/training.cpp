#include "aot/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace aot {

using nlohmann::json;

PointSet augment(const PointSet& points, AugmentMode mode, double jitter_std, Rng& rng) {
    if (mode == AugmentMode::none || jitter_std == 0.0) {
        return points;
    }
    if (!(jitter_std > 0.0)) {
        throw ValidationError("augment: jitter_std must be >= 0");
    }
    PointSet out = points;
    for (double& x : out.values) x += jitter_std * rng.normal();
    return out;
}

void TrainConfig::validate() const {
    if (pairs == 0 || minibatch == 0 || minibatch > pairs) {
        throw ValidationError("TrainConfig: need 0 < B <= N");
    }
    if (pairs % minibatch != 0) {
        throw ValidationError("TrainConfig: N = " + std::to_string(pairs) +
                              " must be divisible by B = " + std::to_string(minibatch));
    }
    if (!(lr > 0.0)) throw ValidationError("TrainConfig: lr must be > 0");
    if (!(ema_decay >= 0.0 && ema_decay < 1.0)) {
        throw ValidationError("TrainConfig: ema_decay must be in [0, 1)");
    }
    if (!(p_std > 0.0)) throw ValidationError("TrainConfig: p_std must be > 0");
    if (!(sigma_data > 0.0)) throw ValidationError("TrainConfig: sigma_data must be > 0");
    if (refreshes <= 0) throw ValidationError("TrainConfig: refreshes must be > 0");
    if (augment == AugmentMode::jitter && jitter_std < 0.0) {
        throw ValidationError("TrainConfig: jitter_std must be >= 0");
    }
}

AdamOptimizer::AdamOptimizer(std::size_t param_count, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(param_count, 0.0), v_(param_count, 0.0) {}

void AdamOptimizer::step(std::vector<double>& params, const std::vector<double>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
        params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
}

DenoiserModel TrainResult::ema_model() const {
    Rng dummy(0);
    DenoiserModel out(model.config(), dummy);
    out.params() = ema_params;
    return out;
}

namespace {

// Substream ids; stable across versions so seeds stay meaningful.
enum StreamId : std::uint64_t { kInit = 0, kData = 1, kNoise = 2, kSigma = 3, kAug = 4 };

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& dataset) {
    config.validate();
    dataset.validate();
    if (config.conditional && dataset.labels.empty()) {
        throw ValidationError("train: conditional training needs a labeled dataset");
    }

    Rng init_rng(derive_seed(config.seed, kInit));
    Rng data_rng(derive_seed(config.seed, kData));
    Rng noise_rng(derive_seed(config.seed, kNoise));
    Rng sigma_rng(derive_seed(config.seed, kSigma));
    Rng aug_rng(derive_seed(config.seed, kAug));

    DenoiserConfig model_cfg;
    model_cfg.dim = dataset.points.dim;
    model_cfg.hidden = config.hidden;
    model_cfg.embed_frequencies = config.embed_frequencies;
    model_cfg.sigma_data = config.sigma_data;
    model_cfg.class_count = config.conditional ? dataset.class_count : 0;

    DenoiserModel model(model_cfg, init_rng);
    std::vector<double> ema = model.params();
    AdamOptimizer opt(model.param_count(), config.lr, config.adam_beta1, config.adam_beta2,
                      config.adam_eps);
    const SigmaSampler sigma_sampler(config.p_mean, config.p_std);

    PoolConfig pool_cfg;
    pool_cfg.pairs = config.pairs;
    pool_cfg.minibatch = config.minibatch;
    pool_cfg.mode = config.pairing;
    pool_cfg.conditional = config.conditional;
    pool_cfg.cost = config.pairing_cost;
    pool_cfg.jitter_std = config.augment == AugmentMode::jitter ? config.jitter_std : 0.0;
    pool_cfg.class_balanced = config.conditional;

    const std::vector<int> no_labels;
    const auto& pool_labels = config.conditional ? dataset.labels : no_labels;

    TrainResult result{std::move(model), {}, {}};
    std::vector<double> sigmas(config.minibatch);

    for (int refresh = 0; refresh < config.refreshes; ++refresh) {
        const auto t0 = std::chrono::steady_clock::now();
        PairPool pool = make_pair_pool(dataset.points, pool_labels, pool_cfg, data_rng,
                                       noise_rng, aug_rng);
        double loss_sum = 0.0;
        int steps = 0;
        while (!pool.exhausted()) {
            const PairedBatch mb = pool.next_minibatch();
            for (auto& s : sigmas) s = sigma_sampler.sample(sigma_rng);
            const GradientBundle bundle = result.model.loss_and_grad(mb, sigmas);
            opt.step(result.model.params(), bundle.grads);
            for (std::size_t i = 0; i < ema.size(); ++i) {
                ema[i] = config.ema_decay * ema[i] +
                         (1.0 - config.ema_decay) * result.model.params()[i];
            }
            loss_sum += bundle.loss;
            ++steps;
        }
        const auto t1 = std::chrono::steady_clock::now();
        TrainRecord rec;
        rec.refresh = refresh;
        rec.mean_loss = loss_sum / steps;
        rec.mean_pairing_cost = pool.pairing_cost() / static_cast<double>(config.pairs);
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        result.log.records.push_back(rec);
    }
    result.ema_params = std::move(ema);
    return result;
}

namespace {

json denoiser_config_to_json(const DenoiserConfig& cfg, const std::string& kind) {
    return json{{"kind", kind},
                {"dim", cfg.dim},
                {"hidden", cfg.hidden},
                {"embed_frequencies", cfg.embed_frequencies},
                {"sigma_data", cfg.sigma_data},
                {"class_count", cfg.class_count}};
}

DenoiserConfig denoiser_config_from_json(const json& j) {
    DenoiserConfig cfg;
    cfg.dim = j.at("dim").get<std::size_t>();
    cfg.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    cfg.embed_frequencies = j.at("embed_frequencies").get<std::size_t>();
    cfg.sigma_data = j.at("sigma_data").get<double>();
    cfg.class_count = j.at("class_count").get<int>();
    return cfg;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json doc;
    doc["version"] = ckpt.version;
    doc["model"] = denoiser_config_to_json(ckpt.model, "denoiser");
    doc["params"] = ckpt.params;
    doc["ema_params"] = ckpt.ema_params;
    doc["config"] = ckpt.config_json.empty() ? json::object() : json::parse(ckpt.config_json);
    doc["rng_state"] = {{"algo", "xoshiro256++"}, {"seed", ckpt.seed}};
    std::ofstream out(path);
    if (!out) throw RuntimeError("save_checkpoint: cannot write " + path);
    out << doc.dump();
    if (!out) throw RuntimeError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("load_checkpoint: cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw RuntimeError("load_checkpoint: corrupt file " + path + ": " + e.what());
    }
    Checkpoint ckpt;
    try {
        ckpt.version = doc.at("version").get<int>();
        if (ckpt.version != 1) {
            throw RuntimeError("load_checkpoint: unsupported version " +
                               std::to_string(ckpt.version) + " in " + path);
        }
        const auto& model = doc.at("model");
        if (model.value("kind", "denoiser") != std::string("denoiser")) {
            throw RuntimeError("load_checkpoint: " + path + " is not a denoiser checkpoint");
        }
        ckpt.model = denoiser_config_from_json(model);
        ckpt.params = doc.at("params").get<std::vector<double>>();
        ckpt.ema_params = doc.at("ema_params").get<std::vector<double>>();
        ckpt.config_json = doc.at("config").dump();
        ckpt.seed = doc.at("rng_state").value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw RuntimeError("load_checkpoint: corrupt file " + path + ": " + e.what());
    }
    return ckpt;
}

Checkpoint make_checkpoint(const TrainResult& result, const TrainConfig& config) {
    Checkpoint ckpt;
    ckpt.model = result.model.config();
    ckpt.params = result.model.params();
    ckpt.ema_params = result.ema_params;
    ckpt.config_json = train_config_to_json(config);
    ckpt.seed = config.seed;
    return ckpt;
}

DenoiserModel model_from_checkpoint(const Checkpoint& ckpt, bool use_ema) {
    Rng dummy(0);
    DenoiserModel model(ckpt.model, dummy);
    const auto& params = use_ema ? ckpt.ema_params : ckpt.params;
    if (params.size() != model.param_count()) {
        throw RuntimeError("model_from_checkpoint: parameter count mismatch");
    }
    model.params() = params;
    return model;
}

std::string train_config_to_json(const TrainConfig& c) {
    json j{{"pairs", c.pairs},
           {"minibatch", c.minibatch},
           {"pairing", c.pairing == PairingMode::aot ? "aot" : "independent"},
           {"pairing_cost", c.pairing_cost == PairingCost::euclidean ? "l2" : "squared_l2"},
           {"conditional", c.conditional},
           {"p_mean", c.p_mean},
           {"p_std", c.p_std},
           {"sigma_data", c.sigma_data},
           {"lr", c.lr},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_eps", c.adam_eps},
           {"ema_decay", c.ema_decay},
           {"refreshes", c.refreshes},
           {"seed", c.seed},
           {"augment", c.augment == AugmentMode::jitter ? "jitter" : "none"},
           {"jitter_std", c.jitter_std},
           {"hidden", c.hidden},
           {"embed_frequencies", c.embed_frequencies}};
    return j.dump();
}

TrainConfig train_config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("train config: invalid JSON: ") + e.what());
    }
    TrainConfig c;
    try {
        c.pairs = j.value("pairs", c.pairs);
        c.minibatch = j.value("minibatch", c.minibatch);
        const std::string pairing = j.value("pairing", "aot");
        if (pairing == "aot") {
            c.pairing = PairingMode::aot;
        } else if (pairing == "independent") {
            c.pairing = PairingMode::independent;
        } else {
            throw ValidationError("train config: unknown pairing '" + pairing + "'");
        }
        const std::string cost = j.value("pairing_cost", "l2");
        if (cost == "l2") {
            c.pairing_cost = PairingCost::euclidean;
        } else if (cost == "squared_l2") {
            c.pairing_cost = PairingCost::squared_euclidean;
        } else {
            throw ValidationError("train config: unknown pairing_cost '" + cost + "'");
        }
        c.conditional = j.value("conditional", c.conditional);
        c.p_mean = j.value("p_mean", c.p_mean);
        c.p_std = j.value("p_std", c.p_std);
        c.sigma_data = j.value("sigma_data", c.sigma_data);
        c.lr = j.value("lr", c.lr);
        c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
        c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
        c.adam_eps = j.value("adam_eps", c.adam_eps);
        c.ema_decay = j.value("ema_decay", c.ema_decay);
        c.refreshes = j.value("refreshes", c.refreshes);
        c.seed = j.value("seed", c.seed);
        const std::string aug = j.value("augment", "none");
        if (aug == "none") {
            c.augment = AugmentMode::none;
        } else if (aug == "jitter") {
            c.augment = AugmentMode::jitter;
        } else {
            throw ValidationError("train config: unknown augment '" + aug + "'");
        }
        c.jitter_std = j.value("jitter_std", c.jitter_std);
        c.hidden = j.value("hidden", c.hidden);
        c.embed_frequencies = j.value("embed_frequencies", c.embed_frequencies);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("train config: ") + e.what());
    }
    return c;
}

}  // namespace aot
