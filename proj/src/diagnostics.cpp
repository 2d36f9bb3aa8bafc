#include "aot/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aot {

CurvatureReport curvature(const Trajectory& traj) {
    if (traj.records.size() < 3) {
        throw ValidationError("curvature: need at least 3 trajectory records");
    }
    CurvatureReport report;

    // Tangent pairs: successive non-terminal nodes (the terminal record has a
    // zero tangent by construction and is excluded).
    const std::size_t last_tangent = traj.records.size() - 2;
    double turn_sum = 0.0;
    int turn_count = 0;
    for (std::size_t i = 0; i < last_tangent; ++i) {
        const auto& a = traj.records[i].tangent;
        const auto& b = traj.records[i + 1].tangent;
        double na = 0.0, nb = 0.0, dot = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            na += a[k] * a[k];
            nb += b[k] * b[k];
            dot += a[k] * b[k];
        }
        CurvatureStep step;
        step.sigma = traj.records[i + 1].sigma;
        if (na == 0.0 || nb == 0.0) {
            ++report.degenerate_tangents;
        } else {
            step.turn = 1.0 - dot / std::sqrt(na * nb);
            turn_sum += step.turn;
            ++turn_count;
        }
        const auto& p = traj.records[i].x0_hat;
        const auto& q = traj.records[i + 1].x0_hat;
        step.x0_step = euclidean_distance(p, q);
        report.per_step.push_back(step);
    }
    // x0 drift includes the final segment into the terminal record.
    report.x0_drift = 0.0;
    for (std::size_t i = 0; i + 1 < traj.records.size(); ++i) {
        report.x0_drift +=
            euclidean_distance(traj.records[i].x0_hat, traj.records[i + 1].x0_hat);
    }
    report.tangent_curvature = turn_count > 0 ? turn_sum / turn_count : 0.0;
    return report;
}

double truncation_error(const DenoiseFn& denoiser, const NoiseSchedule& coarse,
                        const NoiseSchedule& fine, std::span<const double> x_init) {
    if (coarse.sigma_min != fine.sigma_min || coarse.sigma_max != fine.sigma_max) {
        throw ValidationError("truncation_error: schedules must share sigma bounds");
    }
    if (fine.n < coarse.n) {
        throw ValidationError("truncation_error: fine schedule is coarser than coarse");
    }
    const auto end_coarse = heun_sample(denoiser, coarse, x_init).endpoint();
    const auto end_fine = heun_sample(denoiser, fine, x_init).endpoint();
    return euclidean_distance(end_coarse, end_fine);
}

GenerationMetrics eval_generation(const PointSet& samples, const PointSet& reference,
                                  const std::vector<int>& reference_labels,
                                  std::size_t solver_cap) {
    GenerationMetrics metrics;
    metrics.w2 = empirical_w2(samples, reference, solver_cap);
    if (reference_labels.empty()) return metrics;
    if (reference_labels.size() != reference.count) {
        throw ValidationError("eval_generation: reference label count mismatch");
    }
    // Mode balance: each sample counts toward the label of its nearest
    // reference point.
    int max_label = 0;
    for (int l : reference_labels) max_label = std::max(max_label, l);
    metrics.mode_counts.assign(max_label + 1, 0);
    for (std::size_t i = 0; i < samples.count; ++i) {
        const auto s = samples.row(i);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < reference.count; ++j) {
            const double d2 = squared_distance(s, reference.row(j));
            if (d2 < best) {
                best = d2;
                best_j = j;
            }
        }
        ++metrics.mode_counts[reference_labels[best_j]];
    }
    return metrics;
}

}  // namespace aot
