#include "aot/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aot/schedule.hpp"

namespace aot {

namespace {

double silu(double z) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return z * s;
}

double silu_grad(double z) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 + z * (1.0 - s));
}

struct Precond {
    double c_skip, c_out, c_in, c_noise;
};

Precond precond(double sigma, double sigma_data) {
    const double s2 = sigma * sigma;
    const double d2 = sigma_data * sigma_data;
    const double denom = std::sqrt(s2 + d2);
    return {d2 / (s2 + d2), sigma * sigma_data / denom, 1.0 / denom,
            std::log(sigma) / 4.0};
}

}  // namespace

Mlp::Mlp(MlpLayout layout) : layout_(std::move(layout)) {
    if (layout_.input_dim == 0 || layout_.output_dim == 0) {
        throw ValidationError("Mlp: zero input or output dimension");
    }
    sizes_.push_back(layout_.input_dim);
    for (std::size_t h : layout_.hidden) {
        if (h == 0) throw ValidationError("Mlp: zero-width hidden layer");
        sizes_.push_back(h);
    }
    sizes_.push_back(layout_.output_dim);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        weight_offsets_.push_back(param_count_);
        param_count_ += sizes_[l] * sizes_[l + 1];
        bias_offsets_.push_back(param_count_);
        param_count_ += sizes_[l + 1];
    }
}

std::vector<double> Mlp::init_params(Rng& rng, bool zero_output) const {
    std::vector<double> params(param_count_);
    const std::size_t layers = sizes_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t fan_in = sizes_[l];
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        const bool zero = zero_output && l == layers - 1;
        double* w = params.data() + weight_offsets_[l];
        for (std::size_t k = 0; k < fan_in * sizes_[l + 1]; ++k) {
            w[k] = zero ? 0.0 : scale * rng.normal();
        }
        // biases start at zero
    }
    return params;
}

std::span<const double> Mlp::forward(std::span<const double> params,
                                     std::span<const double> input, Tape& tape) const {
    const std::size_t layers = sizes_.size() - 1;
    tape.pre.resize(layers);
    tape.post.resize(layers);
    std::span<const double> act = input;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in_n = sizes_[l];
        const std::size_t out_n = sizes_[l + 1];
        auto& pre = tape.pre[l];
        pre.assign(params.data() + bias_offsets_[l], params.data() + bias_offsets_[l] + out_n);
        const double* w = params.data() + weight_offsets_[l];
        // weights stored row-major [out][in]
        for (std::size_t o = 0; o < out_n; ++o) {
            const double* wrow = w + o * in_n;
            double acc = pre[o];
            for (std::size_t i = 0; i < in_n; ++i) acc += wrow[i] * act[i];
            pre[o] = acc;
        }
        auto& post = tape.post[l];
        if (l + 1 == layers) {
            post = pre;  // linear output
        } else {
            post.resize(out_n);
            for (std::size_t o = 0; o < out_n; ++o) post[o] = silu(pre[o]);
        }
        act = post;
    }
    return act;
}

void Mlp::backward(std::span<const double> params, std::span<const double> input,
                   const Tape& tape, std::span<const double> output_grad,
                   std::span<double> param_grads, std::span<double> input_grad) const {
    const std::size_t layers = sizes_.size() - 1;
    std::vector<double> delta(output_grad.begin(), output_grad.end());
    std::vector<double> next_delta;
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in_n = sizes_[l];
        const std::size_t out_n = sizes_[l + 1];
        // grad through the activation (output layer is linear)
        if (l + 1 != layers) {
            for (std::size_t o = 0; o < out_n; ++o) delta[o] *= silu_grad(tape.pre[l][o]);
        }
        const std::span<const double> act =
            l == 0 ? input : std::span<const double>(tape.post[l - 1]);
        if (!param_grads.empty()) {
            double* wg = param_grads.data() + weight_offsets_[l];
            double* bg = param_grads.data() + bias_offsets_[l];
            for (std::size_t o = 0; o < out_n; ++o) {
                double* wrow = wg + o * in_n;
                const double dlt = delta[o];
                for (std::size_t i = 0; i < in_n; ++i) wrow[i] += dlt * act[i];
                bg[o] += dlt;
            }
        }
        if (l > 0 || !input_grad.empty()) {
            next_delta.assign(in_n, 0.0);
            const double* w = params.data() + weight_offsets_[l];
            for (std::size_t o = 0; o < out_n; ++o) {
                const double* wrow = w + o * in_n;
                const double dlt = delta[o];
                for (std::size_t i = 0; i < in_n; ++i) next_delta[i] += dlt * wrow[i];
            }
            if (l == 0) {
                std::copy(next_delta.begin(), next_delta.end(), input_grad.begin());
                return;
            }
            delta.swap(next_delta);
        }
    }
}

std::vector<double> sigma_embedding(double c_noise, std::size_t frequency_count) {
    std::vector<double> out(2 * frequency_count);
    const double log_fmax = std::log(64.0);
    for (std::size_t k = 0; k < frequency_count; ++k) {
        const double frac = frequency_count > 1
                                ? static_cast<double>(k) / static_cast<double>(frequency_count - 1)
                                : 0.0;
        const double freq = std::exp(frac * log_fmax);  // geometric 1..64
        out[2 * k] = std::sin(freq * c_noise);
        out[2 * k + 1] = std::cos(freq * c_noise);
    }
    return out;
}

namespace {

MlpLayout denoiser_layout(const DenoiserConfig& cfg) {
    MlpLayout layout;
    layout.input_dim = cfg.dim + 2 * cfg.embed_frequencies +
                       static_cast<std::size_t>(std::max(cfg.class_count, 0));
    layout.hidden = cfg.hidden;
    layout.output_dim = cfg.dim;
    return layout;
}

}  // namespace

DenoiserModel::DenoiserModel(DenoiserConfig config, Rng& init_rng)
    : config_(std::move(config)), net_(denoiser_layout(config_)) {
    if (config_.dim == 0) throw ValidationError("DenoiserModel: dim must be >= 1");
    if (!(config_.sigma_data > 0.0)) {
        throw ValidationError("DenoiserModel: sigma_data must be > 0");
    }
    params_ = net_.init_params(init_rng, /*zero_output=*/true);
}

std::vector<double> DenoiserModel::build_features(std::span<const double> x, double sigma,
                                                  int label) const {
    const Precond pc = precond(sigma, config_.sigma_data);
    std::vector<double> feat;
    feat.reserve(net_.layout().input_dim);
    for (double v : x) feat.push_back(pc.c_in * v);
    const auto emb = sigma_embedding(pc.c_noise, config_.embed_frequencies);
    feat.insert(feat.end(), emb.begin(), emb.end());
    if (config_.class_count > 0) {
        if (label < 0 || label >= config_.class_count) {
            throw ValidationError("DenoiserModel: conditional model needs a label in {0.." +
                                  std::to_string(config_.class_count - 1) + "}");
        }
        for (int c = 0; c < config_.class_count; ++c) {
            feat.push_back(c == label ? 1.0 : 0.0);
        }
    }
    return feat;
}

std::vector<double> DenoiserModel::denoise(std::span<const double> x, double sigma,
                                           int label) const {
    if (x.size() != config_.dim) {
        throw ValidationError("denoise: input dim " + std::to_string(x.size()) +
                              " != model dim " + std::to_string(config_.dim));
    }
    if (!(sigma > 0.0)) throw ValidationError("denoise: sigma must be > 0");
    if (!all_finite(x)) throw ValidationError("denoise: non-finite input");

    const Precond pc = precond(sigma, config_.sigma_data);
    const auto feat = build_features(x, sigma, label);
    Mlp::Tape tape;
    const auto raw = net_.forward(params_, feat, tape);
    std::vector<double> out(config_.dim);
    for (std::size_t k = 0; k < config_.dim; ++k) {
        out[k] = pc.c_skip * x[k] + pc.c_out * raw[k];
    }
    return out;
}

GradientBundle DenoiserModel::loss_and_grad(const PairedBatch& minibatch,
                                            std::span<const double> sigmas) const {
    const std::size_t b = minibatch.points.count;
    if (b == 0 || minibatch.points.dim != config_.dim ||
        !minibatch.points.same_shape(minibatch.selected_noises) || sigmas.size() != b) {
        throw ValidationError("loss_and_grad: minibatch/sigma shape mismatch");
    }
    if (config_.class_count > 0 && minibatch.labels.size() != b) {
        throw ValidationError("loss_and_grad: conditional model needs labels");
    }

    GradientBundle bundle;
    bundle.grads.assign(params_.size(), 0.0);
    Mlp::Tape tape;
    std::vector<double> noisy(config_.dim), dout(config_.dim);
    const double inv_b = 1.0 / static_cast<double>(b);

    for (std::size_t i = 0; i < b; ++i) {
        const double sigma = sigmas[i];
        const double weight = loss_weight(sigma, config_.sigma_data);
        const Precond pc = precond(sigma, config_.sigma_data);
        const auto y = minibatch.points.row(i);
        const auto eps = minibatch.selected_noises.row(i);
        for (std::size_t k = 0; k < config_.dim; ++k) {
            noisy[k] = y[k] + sigma * eps[k];
        }
        const int label = config_.class_count > 0 ? minibatch.labels[i] : -1;
        const auto feat = build_features(noisy, sigma, label);
        const auto raw = net_.forward(params_, feat, tape);

        // residual r = D(noisy) - y; loss term = weight * ||r||^2 / B
        double term = 0.0;
        for (std::size_t k = 0; k < config_.dim; ++k) {
            const double denoised = pc.c_skip * noisy[k] + pc.c_out * raw[k];
            const double r = denoised - y[k];
            term += r * r;
            dout[k] = 2.0 * weight * inv_b * r * pc.c_out;
        }
        bundle.loss += weight * term * inv_b;
        net_.backward(params_, feat, tape, dout, bundle.grads, {});
    }
    if (!std::isfinite(bundle.loss) || !all_finite(bundle.grads)) {
        throw RuntimeError("loss_and_grad: non-finite loss or gradient");
    }
    return bundle;
}

AnalyticDenoiser AnalyticDenoiser::point_mass(std::vector<double> mu) {
    AnalyticDenoiser d;
    d.kind_ = Kind::point_mass;
    d.mu_ = std::move(mu);
    return d;
}

AnalyticDenoiser AnalyticDenoiser::isotropic_gaussian(std::vector<double> mu, double s) {
    if (!(s > 0.0)) {
        throw ValidationError("isotropic_gaussian: s must be > 0");
    }
    AnalyticDenoiser d;
    d.kind_ = Kind::isotropic_gaussian;
    d.mu_ = std::move(mu);
    d.s_ = s;
    return d;
}

AnalyticDenoiser AnalyticDenoiser::empirical(PointSet dataset) {
    if (dataset.count == 0) {
        throw ValidationError("empirical denoiser: empty dataset");
    }
    AnalyticDenoiser d;
    d.kind_ = Kind::empirical;
    d.dataset_ = std::move(dataset);
    return d;
}

std::size_t AnalyticDenoiser::dim() const {
    return kind_ == Kind::empirical ? dataset_.dim : mu_.size();
}

std::vector<double> AnalyticDenoiser::denoise(std::span<const double> x, double sigma) const {
    if (!(sigma > 0.0)) throw ValidationError("analytic denoise: sigma must be > 0");
    switch (kind_) {
        case Kind::point_mass:
            return mu_;
        case Kind::isotropic_gaussian: {
            const double shrink = s_ * s_ / (s_ * s_ + sigma * sigma);
            std::vector<double> out(mu_.size());
            for (std::size_t k = 0; k < mu_.size(); ++k) {
                out[k] = mu_[k] + shrink * (x[k] - mu_[k]);
            }
            return out;
        }
        case Kind::empirical: {
            // Posterior mean over the empirical distribution, log-sum-exp
            // stabilized: w_i propto exp(-||x - y_i||^2 / (2 sigma^2)).
            const std::size_t n = dataset_.count;
            const double inv = -0.5 / (sigma * sigma);
            std::vector<double> logw(n);
            double max_logw = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                logw[i] = inv * squared_distance(x, dataset_.row(i));
                max_logw = std::max(max_logw, logw[i]);
            }
            double z = 0.0;
            std::vector<double> out(dataset_.dim, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double w = std::exp(logw[i] - max_logw);
                z += w;
                const auto row = dataset_.row(i);
                for (std::size_t k = 0; k < dataset_.dim; ++k) out[k] += w * row[k];
            }
            for (double& v : out) v /= z;
            return out;
        }
    }
    throw RuntimeError("analytic denoise: unreachable");
}

DenoiseFn as_denoise_fn(const DenoiserModel& model, int label) {
    return [&model, label](std::span<const double> x, double sigma) {
        return model.denoise(x, sigma, label);
    };
}

DenoiseFn as_denoise_fn(const AnalyticDenoiser& oracle) {
    return [&oracle](std::span<const double> x, double sigma) {
        return oracle.denoise(x, sigma);
    };
}

}  // namespace aot
