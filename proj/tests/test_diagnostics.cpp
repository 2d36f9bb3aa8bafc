#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "aot/diagnostics.hpp"

using namespace aot;

namespace {

double dist(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("point mass trajectories are straight with constant estimates") {
    const auto oracle = AnalyticDenoiser::point_mass({1.0, -2.0});
    const NoiseSchedule sched = timesteps(16, 0.002, 80.0, 7.0);
    const std::vector<double> x0{50.0, 30.0};
    const Trajectory traj = heun_sample(as_denoise_fn(oracle), sched, x0);
    const CurvatureReport report = curvature(traj);
    CHECK(report.tangent_curvature < 1e-12);
    CHECK(report.x0_drift == 0.0);
    CHECK(report.degenerate_tangents == 0);
    CHECK(report.per_step.size() == traj.records.size() - 2);
}

TEST_CASE("radial gaussian flow has no tangent curvature") {
    const auto oracle = AnalyticDenoiser::isotropic_gaussian({0.0, 0.0}, 1.0);
    const NoiseSchedule sched = timesteps(24, 0.002, 80.0, 7.0);
    const std::vector<double> x0{60.0, -80.0};
    const Trajectory traj = heun_sample(as_denoise_fn(oracle), sched, x0);
    const CurvatureReport report = curvature(traj);
    CHECK(report.tangent_curvature < 1e-9);
    // x0_hat = shrink * x moves along the ray, so drift is positive
    CHECK(report.x0_drift > 0.0);
}

TEST_CASE("two-mode empirical oracle bends and matches recomputation") {
    PointSet modes(2, 2);
    modes.row(0)[0] = 2.0;
    modes.row(0)[1] = 0.0;
    modes.row(1)[0] = -2.0;
    modes.row(1)[1] = 0.0;
    const auto oracle = AnalyticDenoiser::empirical(modes);
    const NoiseSchedule sched = timesteps(32, 0.002, 80.0, 7.0);
    // start away from both basins so the trajectory must commit to one
    const std::vector<double> x0{8.0, 96.0};
    const Trajectory traj = heun_sample(as_denoise_fn(oracle), sched, x0);
    const CurvatureReport report = curvature(traj);
    CHECK(report.tangent_curvature > 1e-8);
    CHECK(report.x0_drift > 0.0);

    // independent recomputation from the recorded nodes
    double turn_sum = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i + 2 < traj.records.size(); ++i) {
        const auto& a = traj.records[i].tangent;
        const auto& b = traj.records[i + 1].tangent;
        const double na = std::hypot(a[0], a[1]);
        const double nb = std::hypot(b[0], b[1]);
        turn_sum += 1.0 - (a[0] * b[0] + a[1] * b[1]) / (na * nb);
        ++cnt;
    }
    CHECK(report.tangent_curvature == doctest::Approx(turn_sum / cnt).epsilon(1e-12));

    double drift = 0.0;
    for (std::size_t i = 0; i + 1 < traj.records.size(); ++i) {
        drift += dist(traj.records[i].x0_hat, traj.records[i + 1].x0_hat);
    }
    CHECK(report.x0_drift == doctest::Approx(drift).epsilon(1e-12));
}

TEST_CASE("curvature input validation") {
    Trajectory tiny;
    tiny.records.resize(2);
    CHECK_THROWS_AS(curvature(tiny), ValidationError);
}

TEST_CASE("truncation error: zeros and closed-form match") {
    const auto pm = AnalyticDenoiser::point_mass({0.5, 0.5});
    const std::vector<double> x0{0.3, -0.25};
    const NoiseSchedule coarse = timesteps(8, 0.002, 80.0, 7.0);
    const NoiseSchedule fine = timesteps(256, 0.002, 80.0, 7.0);
    CHECK(truncation_error(as_denoise_fn(pm), coarse, fine, x0) == 0.0);
    CHECK(truncation_error(as_denoise_fn(pm), coarse, coarse, x0) == 0.0);

    const auto gauss = AnalyticDenoiser::isotropic_gaussian({0.0, 0.0}, 1.0);
    const DenoiseFn fn = as_denoise_fn(gauss);
    const double trunc = truncation_error(fn, coarse, fine, x0);
    const auto coarse_end = heun_sample(fn, coarse, x0).endpoint();
    const double contraction = 1.0 / std::sqrt(1.0 + 80.0 * 80.0);
    const std::vector<double> closed{x0[0] * contraction, x0[1] * contraction};
    // the fine run sits within 1e-6 of the closed form at this probe scale
    CHECK(std::abs(trunc - dist(coarse_end, closed)) < 1e-6);

    NoiseSchedule other_bounds = timesteps(256, 0.01, 80.0, 7.0);
    CHECK_THROWS_AS(truncation_error(fn, coarse, other_bounds, x0), ValidationError);
    CHECK_THROWS_AS(truncation_error(fn, fine, coarse, x0), ValidationError);
}

TEST_CASE("truncation error shrinks under refinement") {
    const auto gauss = AnalyticDenoiser::isotropic_gaussian({0.0, 0.0}, 1.0);
    const DenoiseFn fn = as_denoise_fn(gauss);
    const NoiseSchedule fine = timesteps(512, 0.002, 80.0, 7.0);
    const std::vector<double> x0{3.7, -1.2};
    double prev = 0.0;
    for (int n : {8, 16, 32, 64}) {
        const double err = truncation_error(fn, timesteps(n, 0.002, 80.0, 7.0), fine, x0);
        if (prev > 0.0) CHECK(err <= prev * 1.05);
        prev = err;
    }
}

TEST_CASE("generation metrics: identity, translation, symmetry, modes") {
    Rng rng(5);
    PointSet a(24, 2);
    for (auto& v : a.values) v = rng.normal();
    CHECK(eval_generation(a, a).w2 == 0.0);

    PointSet shifted = a;
    for (std::size_t i = 0; i < shifted.count; ++i) shifted.row(i)[0] += 1.0;
    CHECK(eval_generation(shifted, a).w2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eval_generation(shifted, a).w2 ==
          doctest::Approx(eval_generation(a, shifted).w2).epsilon(1e-12));

    // two reference clusters, samples near the first one
    PointSet reference(8, 2);
    std::vector<int> labels(8);
    for (std::size_t i = 0; i < 8; ++i) {
        reference.row(i)[0] = (i < 4 ? 5.0 : -5.0) + 0.01 * rng.normal();
        reference.row(i)[1] = 0.01 * rng.normal();
        labels[i] = i < 4 ? 0 : 1;
    }
    PointSet near_first(8, 2);
    for (std::size_t i = 0; i < 8; ++i) {
        near_first.row(i)[0] = 5.0 + 0.1 * rng.normal();
        near_first.row(i)[1] = 0.1 * rng.normal();
    }
    const GenerationMetrics metrics = eval_generation(near_first, reference, labels);
    REQUIRE(metrics.mode_counts.size() == 2);
    CHECK(metrics.mode_counts[0] == 8);
    CHECK(metrics.mode_counts[1] == 0);
}
