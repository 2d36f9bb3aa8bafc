#include "aot/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace aot {

using nlohmann::json;

namespace {

MlpLayout discriminator_layout(const DiscriminatorConfig& cfg) {
    MlpLayout layout;
    layout.input_dim = cfg.dim + 2 * cfg.embed_frequencies +
                       static_cast<std::size_t>(std::max(cfg.class_count, 0));
    layout.hidden = cfg.hidden;
    layout.output_dim = 1;
    return layout;
}

double softplus(double z) {
    // overflow-safe log(1 + e^z)
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace

Discriminator::Discriminator(DiscriminatorConfig config, Rng& init_rng)
    : config_(std::move(config)), net_(discriminator_layout(config_)) {
    if (config_.dim == 0) throw ValidationError("Discriminator: dim must be >= 1");
    if (!(config_.sigma_data > 0.0)) {
        throw ValidationError("Discriminator: sigma_data must be > 0");
    }
    params_ = net_.init_params(init_rng, /*zero_output=*/false);
}

std::vector<double> Discriminator::build_features(std::span<const double> x, double sigma,
                                                  int label) const {
    const double c_in = 1.0 / std::sqrt(sigma * sigma + config_.sigma_data * config_.sigma_data);
    const double c_noise = std::log(sigma) / 4.0;
    std::vector<double> feat;
    feat.reserve(net_.layout().input_dim);
    for (double v : x) feat.push_back(c_in * v);
    const auto emb = sigma_embedding(c_noise, config_.embed_frequencies);
    feat.insert(feat.end(), emb.begin(), emb.end());
    if (config_.class_count > 0) {
        if (label < 0 || label >= config_.class_count) {
            throw ValidationError("Discriminator: conditional model needs a valid label");
        }
        for (int c = 0; c < config_.class_count; ++c) {
            feat.push_back(c == label ? 1.0 : 0.0);
        }
    }
    return feat;
}

double Discriminator::logit(std::span<const double> x, double sigma, int label) const {
    if (x.size() != config_.dim) {
        throw ValidationError("Discriminator: input dim mismatch");
    }
    if (!(sigma > 0.0)) throw ValidationError("Discriminator: sigma must be > 0");
    const auto feat = build_features(x, sigma, label);
    Mlp::Tape tape;
    return net_.forward(params_, feat, tape)[0];
}

std::vector<double> Discriminator::logit_grad_x(std::span<const double> x, double sigma,
                                                int label) const {
    const auto feat = build_features(x, sigma, label);
    Mlp::Tape tape;
    net_.forward(params_, feat, tape);
    std::vector<double> feat_grad(feat.size(), 0.0);
    const double one = 1.0;
    net_.backward(params_, feat, tape, std::span<const double>(&one, 1), {}, feat_grad);
    // chain through the c_in input scaling; embedding/label features do not
    // depend on x
    const double c_in = 1.0 / std::sqrt(sigma * sigma + config_.sigma_data * config_.sigma_data);
    std::vector<double> grad(config_.dim);
    for (std::size_t k = 0; k < config_.dim; ++k) grad[k] = c_in * feat_grad[k];
    if (!all_finite(grad)) {
        throw RuntimeError("logit_grad_x: non-finite gradient");
    }
    return grad;
}

GradientBundle Discriminator::bce_loss_and_grad(const PointSet& noisy_inputs,
                                                std::span<const double> sigmas,
                                                std::span<const double> targets,
                                                const std::vector<int>& labels) const {
    const std::size_t b = noisy_inputs.count;
    if (b == 0 || noisy_inputs.dim != config_.dim || sigmas.size() != b ||
        targets.size() != b) {
        throw ValidationError("bce_loss_and_grad: shape mismatch");
    }
    if (config_.class_count > 0 && labels.size() != b) {
        throw ValidationError("bce_loss_and_grad: conditional discriminator needs labels");
    }
    GradientBundle bundle;
    bundle.grads.assign(params_.size(), 0.0);
    Mlp::Tape tape;
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t i = 0; i < b; ++i) {
        const int label = config_.class_count > 0 ? labels[i] : -1;
        const auto feat = build_features(noisy_inputs.row(i), sigmas[i], label);
        const double z = net_.forward(params_, feat, tape)[0];
        bundle.loss += (softplus(z) - targets[i] * z) * inv_b;
        const double dz = (sigmoid(z) - targets[i]) * inv_b;
        net_.backward(params_, feat, tape, std::span<const double>(&dz, 1), bundle.grads, {});
    }
    if (!std::isfinite(bundle.loss) || !all_finite(bundle.grads)) {
        throw RuntimeError("bce_loss_and_grad: non-finite loss or gradient");
    }
    return bundle;
}

void DiscTrainConfig::validate() const {
    if (pairs == 0 || minibatch == 0 || minibatch > pairs || pairs % minibatch != 0) {
        throw ValidationError("DiscTrainConfig: need 0 < B <= N with B | N");
    }
    if (!(lr > 0.0) || refreshes <= 0 || !(p_std > 0.0) || !(sigma_data > 0.0)) {
        throw ValidationError("DiscTrainConfig: invalid optimizer/noise parameters");
    }
}

Discriminator train_discriminator(const Dataset& real, const Dataset& generated,
                                  bool use_aot, const DiscTrainConfig& config) {
    config.validate();
    real.validate();
    generated.validate();
    if (real.points.dim != generated.points.dim) {
        throw ValidationError("train_discriminator: dimension mismatch (" +
                              std::to_string(real.points.dim) + " vs " +
                              std::to_string(generated.points.dim) + ")");
    }
    if (config.conditional && (real.labels.empty() || generated.labels.empty())) {
        throw ValidationError("train_discriminator: conditional mode needs labels on both sets");
    }

    // Substream ids 16.. keep clear of the denoiser trainer's 0..4.
    Rng init_rng(derive_seed(config.seed, 16));
    Rng real_data_rng(derive_seed(config.seed, 17));
    Rng real_noise_rng(derive_seed(config.seed, 18));
    Rng real_sigma_rng(derive_seed(config.seed, 19));
    Rng gen_data_rng(derive_seed(config.seed, 20));
    Rng gen_noise_rng(derive_seed(config.seed, 21));
    Rng gen_sigma_rng(derive_seed(config.seed, 22));
    Rng aug_rng(derive_seed(config.seed, 23));  // reserved; no augmentation here

    DiscriminatorConfig disc_cfg;
    disc_cfg.dim = real.points.dim;
    disc_cfg.hidden = config.hidden;
    disc_cfg.embed_frequencies = config.embed_frequencies;
    disc_cfg.sigma_data = config.sigma_data;
    disc_cfg.class_count = config.conditional ? real.class_count : 0;

    Discriminator disc(disc_cfg, init_rng);
    AdamOptimizer opt(disc.param_count(), config.lr, config.adam_beta1, config.adam_beta2,
                      config.adam_eps);
    const SigmaSampler sigma_sampler(config.p_mean, config.p_std);

    PoolConfig pool_cfg;
    pool_cfg.pairs = config.pairs;
    pool_cfg.minibatch = config.minibatch;
    pool_cfg.mode = use_aot ? PairingMode::aot : PairingMode::independent;
    pool_cfg.conditional = config.conditional;
    pool_cfg.class_balanced = config.conditional;
    pool_cfg.cost = config.pairing_cost;

    const std::vector<int> no_labels;
    const std::size_t d = real.points.dim;

    for (int refresh = 0; refresh < config.refreshes; ++refresh) {
        PairPool real_pool =
            make_pair_pool(real.points, config.conditional ? real.labels : no_labels,
                           pool_cfg, real_data_rng, real_noise_rng, aug_rng);
        PairPool gen_pool =
            make_pair_pool(generated.points, config.conditional ? generated.labels : no_labels,
                           pool_cfg, gen_data_rng, gen_noise_rng, aug_rng);
        while (!real_pool.exhausted()) {
            const PairedBatch mb_real = real_pool.next_minibatch();
            const PairedBatch mb_gen = gen_pool.next_minibatch();
            const std::size_t b = mb_real.points.count + mb_gen.points.count;
            PointSet noisy(b, d);
            std::vector<double> sigmas(b), targets(b);
            std::vector<int> labels;
            if (config.conditional) labels.resize(b);
            std::size_t row = 0;
            for (std::size_t i = 0; i < mb_real.points.count; ++i, ++row) {
                const double sigma = sigma_sampler.sample(real_sigma_rng);
                const auto y = mb_real.points.row(i);
                const auto eps = mb_real.selected_noises.row(i);
                auto out = noisy.row(row);
                for (std::size_t k = 0; k < d; ++k) out[k] = y[k] + sigma * eps[k];
                sigmas[row] = sigma;
                targets[row] = 1.0;
                if (config.conditional) labels[row] = mb_real.labels[i];
            }
            for (std::size_t i = 0; i < mb_gen.points.count; ++i, ++row) {
                const double sigma = sigma_sampler.sample(gen_sigma_rng);
                const auto y = mb_gen.points.row(i);
                const auto eps = mb_gen.selected_noises.row(i);
                auto out = noisy.row(row);
                for (std::size_t k = 0; k < d; ++k) out[k] = y[k] + sigma * eps[k];
                sigmas[row] = sigma;
                targets[row] = 0.0;
                if (config.conditional) labels[row] = mb_gen.labels[i];
            }
            const GradientBundle bundle = disc.bce_loss_and_grad(noisy, sigmas, targets, labels);
            opt.step(disc.params(), bundle.grads);
        }
    }
    return disc;
}

std::vector<double> guided_denoise(const DenoiserModel& model, const Discriminator& disc,
                                   std::span<const double> x, double sigma, double w,
                                   int label) {
    if (w < 0.0 || !std::isfinite(w)) {
        throw ValidationError("guided_denoise: weight must be finite and >= 0");
    }
    if (w == 0.0) {
        return model.denoise(x, sigma, label);
    }
    auto out = model.denoise(x, sigma, label);
    const auto grad = disc.logit_grad_x(x, sigma, label);
    const double scale = w * sigma * sigma;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += scale * grad[k];
    if (!all_finite(out)) {
        throw RuntimeError("guided_denoise: non-finite output");
    }
    return out;
}

Trajectory guided_sample(const DenoiserModel& model, const Discriminator& disc,
                         const NoiseSchedule& schedule, std::span<const double> x_init,
                         double w, int label) {
    const DenoiseFn fn = [&](std::span<const double> x, double sigma) {
        return guided_denoise(model, disc, x, sigma, w, label);
    };
    Trajectory traj = heun_sample(fn, schedule, x_init);
    traj.guidance_evals = w == 0.0 ? 0 : traj.nfe;
    return traj;
}

void save_discriminator(const Discriminator& disc, const std::string& path) {
    const auto& cfg = disc.config();
    json doc;
    doc["version"] = 1;
    doc["model"] = {{"kind", "discriminator"},
                    {"dim", cfg.dim},
                    {"hidden", cfg.hidden},
                    {"embed_frequencies", cfg.embed_frequencies},
                    {"sigma_data", cfg.sigma_data},
                    {"class_count", cfg.class_count}};
    doc["params"] = disc.params();
    doc["ema_params"] = json::array();
    doc["config"] = json::object();
    doc["rng_state"] = {{"algo", "xoshiro256++"}, {"seed", 0}};
    std::ofstream out(path);
    if (!out) throw RuntimeError("save_discriminator: cannot write " + path);
    out << doc.dump();
}

void GuidanceConfig::validate() const {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw ValidationError("GuidanceConfig: weight must be finite and >= 0");
    }
    if (discriminator_checkpoint.empty()) {
        throw ValidationError("GuidanceConfig: discriminator checkpoint path is empty");
    }
}

Discriminator load_guidance(const GuidanceConfig& config) {
    config.validate();
    return load_discriminator(config.discriminator_checkpoint);
}

Discriminator load_discriminator(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("load_discriminator: cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw RuntimeError("load_discriminator: corrupt file " + path + ": " + e.what());
    }
    try {
        const int version = doc.at("version").get<int>();
        if (version != 1) {
            throw RuntimeError("load_discriminator: unsupported version " +
                               std::to_string(version));
        }
        const auto& model = doc.at("model");
        if (model.value("kind", "") != std::string("discriminator")) {
            throw RuntimeError("load_discriminator: " + path +
                               " is not a discriminator checkpoint");
        }
        DiscriminatorConfig cfg;
        cfg.dim = model.at("dim").get<std::size_t>();
        cfg.hidden = model.at("hidden").get<std::vector<std::size_t>>();
        cfg.embed_frequencies = model.at("embed_frequencies").get<std::size_t>();
        cfg.sigma_data = model.at("sigma_data").get<double>();
        cfg.class_count = model.at("class_count").get<int>();
        Rng dummy(0);
        Discriminator disc(cfg, dummy);
        auto params = doc.at("params").get<std::vector<double>>();
        if (params.size() != disc.param_count()) {
            throw RuntimeError("load_discriminator: parameter count mismatch in " + path);
        }
        disc.params() = std::move(params);
        return disc;
    } catch (const json::exception& e) {
        throw RuntimeError("load_discriminator: corrupt file " + path + ": " + e.what());
    }
}

}  // namespace aot
