#include "aot/schedule.hpp"

#include <cmath>

namespace aot {

NoiseSchedule timesteps(int n, double sigma_min, double sigma_max, double rho) {
    if (n < 2) {
        throw ValidationError("timesteps: n must be >= 2, got " + std::to_string(n));
    }
    if (!(sigma_min > 0.0) || !(sigma_max > sigma_min)) {
        throw ValidationError("timesteps: require 0 < sigma_min < sigma_max");
    }
    if (!(rho >= 1.0) || !std::isfinite(rho)) {
        throw ValidationError("timesteps: rho must be >= 1");
    }

    NoiseSchedule sched;
    sched.n = n;
    sched.sigma_min = sigma_min;
    sched.sigma_max = sigma_max;
    sched.rho = rho;
    sched.values.resize(n + 1);

    const double max_inv_rho = std::pow(sigma_max, 1.0 / rho);
    const double min_inv_rho = std::pow(sigma_min, 1.0 / rho);
    for (int i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
        sched.values[i] = std::pow(max_inv_rho + frac * (min_inv_rho - max_inv_rho), rho);
    }
    // Pin the endpoints exactly; pow round-trips can drift in the last ulp.
    sched.values[0] = sigma_max;
    sched.values[n - 1] = sigma_min;
    sched.values[n] = 0.0;
    return sched;
}

SigmaSampler::SigmaSampler(double mean, double std) : p_mean(mean), p_std(std) {
    if (!(p_std > 0.0)) {
        throw ValidationError("SigmaSampler: p_std must be > 0");
    }
}

double SigmaSampler::sample(Rng& rng) const {
    return std::exp(p_mean + p_std * rng.normal());
}

double loss_weight(double sigma, double sigma_data) {
    if (!(sigma > 0.0) || !(sigma_data > 0.0)) {
        throw ValidationError("loss_weight: sigma and sigma_data must be > 0");
    }
    const double prod = sigma * sigma_data;
    return (sigma * sigma + sigma_data * sigma_data) / (prod * prod);
}

}  // namespace aot
