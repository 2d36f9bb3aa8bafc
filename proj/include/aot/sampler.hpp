#pragma once

#include <span>
#include <vector>

#include "aot/model.hpp"
#include "aot/schedule.hpp"

namespace aot {

// One committed node of a sampling run. tangent is d_i = (x - D(x;sigma))/sigma
// evaluated at this node; the terminal node (sigma = 0) carries x0_hat = x and
// a zero tangent.
struct TrajectoryRecord {
    double sigma = 0.0;
    std::vector<double> x;
    std::vector<double> x0_hat;
    std::vector<double> tangent;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    int nfe = 0;             // denoiser evaluations
    int guidance_evals = 0;  // discriminator evaluations (guided runs only)

    const std::vector<double>& endpoint() const { return records.back().x; }
};

// Heun (2nd order) over each interval except the last, which is a single
// Euler step to sigma = 0 and lands exactly on D(x; sigma_min). With n
// formula steps this costs 2n-1 denoiser evaluations.
Trajectory heun_sample(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                       std::span<const double> x_init);

// Plain Euler on every interval; n denoiser evaluations.
Trajectory euler_sample(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                        std::span<const double> x_init);

// Full Euler jump to sigma = 0; algebraically equals D(x; sigma).
std::vector<double> one_step_estimate(const DenoiseFn& denoiser,
                                      std::span<const double> x, double sigma);

}  // namespace aot
