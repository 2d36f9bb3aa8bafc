#include "aot/sampler.hpp"

namespace aot {

namespace {

void check_schedule(const NoiseSchedule& schedule) {
    if (schedule.values.size() < 3 || schedule.values.back() != 0.0) {
        throw ValidationError("sampler: schedule must end with a terminal 0");
    }
    for (std::size_t i = 0; i + 1 < schedule.values.size(); ++i) {
        if (!(schedule.values[i] > schedule.values[i + 1])) {
            throw ValidationError("sampler: schedule must be strictly decreasing");
        }
    }
}

}  // namespace

Trajectory heun_sample(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                       std::span<const double> x_init) {
    check_schedule(schedule);
    const auto& ts = schedule.values;
    const std::size_t d = x_init.size();

    Trajectory traj;
    std::vector<double> x(x_init.begin(), x_init.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double t = ts[i];
        const double t_next = ts[i + 1];
        const double h = t_next - t;

        const auto denoised = denoiser(x, t);
        ++traj.nfe;
        std::vector<double> tangent(d);
        for (std::size_t k = 0; k < d; ++k) tangent[k] = (x[k] - denoised[k]) / t;
        traj.records.push_back({t, x, denoised, tangent});

        if (t_next == 0.0) {
            // final Euler step: x + (0 - t) * (x - D)/t == D exactly
            for (std::size_t k = 0; k < d; ++k) x[k] += h * tangent[k];
        } else {
            std::vector<double> x_pred(d);
            for (std::size_t k = 0; k < d; ++k) x_pred[k] = x[k] + h * tangent[k];
            const auto denoised2 = denoiser(x_pred, t_next);
            ++traj.nfe;
            for (std::size_t k = 0; k < d; ++k) {
                const double d_prime = (x_pred[k] - denoised2[k]) / t_next;
                x[k] += h * 0.5 * (tangent[k] + d_prime);
            }
        }
    }
    traj.records.push_back({0.0, x, x, std::vector<double>(d, 0.0)});
    return traj;
}

Trajectory euler_sample(const DenoiseFn& denoiser, const NoiseSchedule& schedule,
                        std::span<const double> x_init) {
    check_schedule(schedule);
    const auto& ts = schedule.values;
    const std::size_t d = x_init.size();

    Trajectory traj;
    std::vector<double> x(x_init.begin(), x_init.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double t = ts[i];
        const double h = ts[i + 1] - t;
        const auto denoised = denoiser(x, t);
        ++traj.nfe;
        std::vector<double> tangent(d);
        for (std::size_t k = 0; k < d; ++k) tangent[k] = (x[k] - denoised[k]) / t;
        traj.records.push_back({t, x, denoised, tangent});
        for (std::size_t k = 0; k < d; ++k) x[k] += h * tangent[k];
    }
    traj.records.push_back({0.0, x, x, std::vector<double>(d, 0.0)});
    return traj;
}

std::vector<double> one_step_estimate(const DenoiseFn& denoiser,
                                      std::span<const double> x, double sigma) {
    if (!(sigma > 0.0)) throw ValidationError("one_step_estimate: sigma must be > 0");
    return denoiser(x, sigma);
}

}  // namespace aot
