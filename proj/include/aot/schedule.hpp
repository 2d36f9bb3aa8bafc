#pragma once

#include <vector>

#include "aot/common.hpp"

namespace aot {

// EDM-convention defaults; the training distribution and loss weight are
// inherited by reference in the literature, so they live here as overridable
// constants rather than magic numbers.
inline constexpr double kDefaultSigmaMin = 0.002;
inline constexpr double kDefaultSigmaMax = 80.0;
inline constexpr double kDefaultSigmaData = 0.5;
inline constexpr double kDefaultRho = 7.0;
inline constexpr double kDefaultPMean = -1.2;
inline constexpr double kDefaultPStd = 1.2;

// Decreasing sigma sequence t_0..t_{n-1} plus an appended terminal 0, so a
// schedule with n formula steps drives a 2n-1 NFE Heun run.
struct NoiseSchedule {
    int n = 0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double rho = 0.0;
    std::vector<double> values;  // size n + 1, values[n] == 0
};

// t_i = (smax^(1/rho) + i/(n-1) * (smin^(1/rho) - smax^(1/rho)))^rho.
// Larger rho widens the strides near sigma_max.
NoiseSchedule timesteps(int n, double sigma_min, double sigma_max, double rho);

// Training noise-level distribution: sigma = exp(g), g ~ N(p_mean, p_std^2).
struct SigmaSampler {
    double p_mean = kDefaultPMean;
    double p_std = kDefaultPStd;

    SigmaSampler() = default;
    SigmaSampler(double mean, double std);

    double sample(Rng& rng) const;
};

// lambda(sigma) = (sigma^2 + sigma_data^2) / (sigma * sigma_data)^2.
double loss_weight(double sigma, double sigma_data);

}  // namespace aot
