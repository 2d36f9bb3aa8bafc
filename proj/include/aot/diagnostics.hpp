#pragma once

#include <vector>

#include "aot/sampler.hpp"
#include "aot/transport.hpp"

namespace aot {

// Per-node curvature entry: turn = 1 - cos(tangent_i, tangent_i+1) attributed
// to the node where the second tangent lives; x0_step = ||x0_hat change||.
struct CurvatureStep {
    double sigma = 0.0;
    double turn = 0.0;
    double x0_step = 0.0;
};

struct CurvatureReport {
    double tangent_curvature = 0.0;  // mean turn over interior nodes, in [0, 2]
    double x0_drift = 0.0;           // total variation of the denoised estimates
    int degenerate_tangents = 0;     // zero-norm tangents skipped
    std::vector<CurvatureStep> per_step;
};

// Both metrics are zero for straight-line trajectories.
CurvatureReport curvature(const Trajectory& traj);

// ||heun endpoint(coarse) - heun endpoint(fine)||. Schedules must share
// sigma bounds; fine must be at least as fine as coarse.
double truncation_error(const DenoiseFn& denoiser, const NoiseSchedule& coarse,
                        const NoiseSchedule& fine, std::span<const double> x_init);

struct GenerationMetrics {
    double w2 = 0.0;
    std::vector<int> mode_counts;  // per reference label, when labels given
};

// Desk-scale generation quality: empirical W2 against a reference set, plus
// the histogram of reference labels hit by the optimal matching.
GenerationMetrics eval_generation(const PointSet& samples, const PointSet& reference,
                                  const std::vector<int>& reference_labels = {},
                                  std::size_t solver_cap = 2048);

}  // namespace aot
