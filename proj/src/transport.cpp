#include "aot/transport.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace aot {

void SampleBatch::validate() const {
    if (points.count == 0) {
        throw ValidationError("SampleBatch: empty batch");
    }
    if (!points.same_shape(noises)) {
        throw ValidationError("SampleBatch: points are " + std::to_string(points.count) +
                              "x" + std::to_string(points.dim) + " but noises are " +
                              std::to_string(noises.count) + "x" + std::to_string(noises.dim));
    }
    if (!labels.empty() && labels.size() != points.count) {
        throw ValidationError("SampleBatch: labels length " + std::to_string(labels.size()) +
                              " != point count " + std::to_string(points.count));
    }
    if (!all_finite(points.values) || !all_finite(noises.values)) {
        throw ValidationError("SampleBatch: non-finite entries");
    }
}

CostMatrix build_cost_matrix(const PointSet& points, const PointSet& noises,
                             PairingCost kind) {
    if (!points.same_shape(noises) || points.count == 0) {
        throw ValidationError("build_cost_matrix: shape mismatch (" +
                              std::to_string(points.count) + "x" + std::to_string(points.dim) +
                              " vs " + std::to_string(noises.count) + "x" +
                              std::to_string(noises.dim) + ")");
    }
    const std::size_t n = points.count;
    std::vector<double> costs(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pi = points.row(i);
        double* out = costs.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double d2 = squared_distance(pi, noises.row(j));
            out[j] = (kind == PairingCost::euclidean) ? std::sqrt(d2) : d2;
        }
    }
    return CostMatrix(n, std::move(costs));
}

namespace {

PairedBatch gather_pairs(const SampleBatch& batch, const std::vector<int>& perm,
                         double total_cost) {
    PairedBatch out;
    out.points = batch.points;
    out.labels = batch.labels;
    out.pairing_cost = total_cost;
    out.selected_noises = PointSet(batch.noises.count, batch.noises.dim);
    for (std::size_t i = 0; i < batch.noises.count; ++i) {
        const auto src = batch.noises.row(perm[i]);
        std::copy(src.begin(), src.end(), out.selected_noises.row(i).begin());
    }
    return out;
}

}  // namespace

PairedBatch pair_unconditional(const SampleBatch& batch, PairingCost kind) {
    batch.validate();
    const CostMatrix cost = build_cost_matrix(batch.points, batch.noises, kind);
    const Assignment sol = hungarian_solve(cost);
    return gather_pairs(batch, sol.permutation, sol.total_cost);
}

PairedBatch pair_conditional(const SampleBatch& batch, PairingCost kind) {
    batch.validate();
    if (batch.labels.empty()) {
        throw ValidationError("pair_conditional: batch has no labels");
    }
    const int max_label = *std::max_element(batch.labels.begin(), batch.labels.end());
    const int min_label = *std::min_element(batch.labels.begin(), batch.labels.end());
    if (min_label < 0) {
        throw ValidationError("pair_conditional: negative label " + std::to_string(min_label));
    }
    const int class_count = max_label + 1;

    // Image slots per class, in order of appearance.
    std::vector<std::vector<int>> slots(class_count);
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
        slots[batch.labels[i]].push_back(static_cast<int>(i));
    }

    // Noises are split into consecutive blocks sized like the classes; the
    // noise draws are i.i.d. so any fixed allocation is exchangeable.
    std::vector<int> global_perm(batch.points.count, -1);
    double total_cost = 0.0;
    int noise_offset = 0;
    const std::size_t d = batch.points.dim;
    for (int c = 0; c < class_count; ++c) {
        const auto& idx = slots[c];
        const std::size_t m = idx.size();
        if (m == 0) continue;
        PointSet class_points(m, d), class_noises(m, d);
        for (std::size_t r = 0; r < m; ++r) {
            const auto ps = batch.points.row(idx[r]);
            std::copy(ps.begin(), ps.end(), class_points.row(r).begin());
            const auto ns = batch.noises.row(noise_offset + static_cast<int>(r));
            std::copy(ns.begin(), ns.end(), class_noises.row(r).begin());
        }
        const Assignment sol = hungarian_solve(build_cost_matrix(class_points, class_noises, kind));
        for (std::size_t r = 0; r < m; ++r) {
            global_perm[idx[r]] = noise_offset + sol.permutation[r];
        }
        total_cost += sol.total_cost;
        noise_offset += static_cast<int>(m);
    }
    return gather_pairs(batch, global_perm, total_cost);
}

PairedBatch pair_independent(const SampleBatch& batch, PairingCost kind) {
    batch.validate();
    std::vector<int> identity(batch.points.count);
    std::iota(identity.begin(), identity.end(), 0);
    double total = 0.0;
    for (std::size_t i = 0; i < batch.points.count; ++i) {
        const double d2 = squared_distance(batch.points.row(i), batch.noises.row(i));
        total += (kind == PairingCost::euclidean) ? std::sqrt(d2) : d2;
    }
    return gather_pairs(batch, identity, total);
}

PairPool::PairPool(PairedBatch batch, std::size_t minibatch_size)
    : batch_(std::move(batch)), minibatch_size_(minibatch_size) {
    if (minibatch_size_ == 0 || minibatch_size_ > batch_.points.count) {
        throw ValidationError("PairPool: minibatch size " + std::to_string(minibatch_size_) +
                              " out of range for pool of " +
                              std::to_string(batch_.points.count));
    }
}

PairedBatch PairPool::next_minibatch() {
    if (exhausted()) {
        throw RuntimeError("PairPool: pool exhausted; refresh before consuming more");
    }
    const std::size_t take = std::min(minibatch_size_, batch_.points.count - cursor_);
    const std::size_t d = batch_.points.dim;
    PairedBatch mb;
    mb.points = PointSet(take, d);
    mb.selected_noises = PointSet(take, d);
    for (std::size_t r = 0; r < take; ++r) {
        const auto ps = batch_.points.row(cursor_ + r);
        std::copy(ps.begin(), ps.end(), mb.points.row(r).begin());
        const auto ns = batch_.selected_noises.row(cursor_ + r);
        std::copy(ns.begin(), ns.end(), mb.selected_noises.row(r).begin());
    }
    if (!batch_.labels.empty()) {
        mb.labels.assign(batch_.labels.begin() + cursor_,
                         batch_.labels.begin() + cursor_ + take);
    }
    cursor_ += take;
    return mb;
}

namespace {

// Draw m indices from pool without replacement when possible (partial
// Fisher-Yates prefix), with replacement otherwise.
std::vector<std::size_t> draw_indices(const std::vector<std::size_t>& pool, std::size_t m,
                                      Rng& rng) {
    std::vector<std::size_t> out(m);
    if (m <= pool.size()) {
        std::vector<std::size_t> order = pool;
        for (std::size_t i = 0; i < m; ++i) {
            std::swap(order[i], order[i + rng.below(order.size() - i)]);
            out[i] = order[i];
        }
    } else {
        for (auto& p : out) p = pool[rng.below(pool.size())];
    }
    return out;
}

}  // namespace

PairPool make_pair_pool(const PointSet& data_points, const std::vector<int>& data_labels,
                        const PoolConfig& config, Rng& data_rng, Rng& noise_rng,
                        Rng& aug_rng) {
    if (data_points.count == 0) {
        throw ValidationError("make_pair_pool: empty dataset");
    }
    if (config.minibatch > config.pairs) {
        throw ValidationError("make_pair_pool: B = " + std::to_string(config.minibatch) +
                              " exceeds N = " + std::to_string(config.pairs));
    }
    const std::size_t n = config.pairs;
    const std::size_t k = data_points.count;
    const std::size_t d = data_points.dim;

    std::vector<std::size_t> picks;
    int class_count = 0;
    if (!data_labels.empty()) {
        class_count = 1 + *std::max_element(data_labels.begin(), data_labels.end());
    }
    if (config.class_balanced && class_count > 0 &&
        n % static_cast<std::size_t>(class_count) == 0) {
        std::vector<std::vector<std::size_t>> by_class(class_count);
        for (std::size_t i = 0; i < data_labels.size(); ++i) {
            by_class[data_labels[i]].push_back(i);
        }
        bool all_present = true;
        for (const auto& cls : by_class) all_present = all_present && !cls.empty();
        if (all_present) {
            const std::size_t quota = n / static_cast<std::size_t>(class_count);
            for (const auto& cls : by_class) {
                const auto sub = draw_indices(cls, quota, data_rng);
                picks.insert(picks.end(), sub.begin(), sub.end());
            }
        }
    }
    if (picks.empty()) {
        std::vector<std::size_t> all(k);
        std::iota(all.begin(), all.end(), std::size_t{0});
        picks = draw_indices(all, n, data_rng);
    }

    SampleBatch batch;
    batch.points = PointSet(n, d);
    batch.noises = PointSet(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto src = data_points.row(picks[r]);
        std::copy(src.begin(), src.end(), batch.points.row(r).begin());
        if (!data_labels.empty()) batch.labels.push_back(data_labels[picks[r]]);
    }
    for (double& x : batch.noises.values) x = noise_rng.normal();

    // Augment before pairing, so the assignment sees the augmented images.
    if (config.jitter_std > 0.0) {
        for (double& x : batch.points.values) x += config.jitter_std * aug_rng.normal();
    }

    PairedBatch paired;
    if (config.mode == PairingMode::independent) {
        paired = pair_independent(batch, config.cost);
    } else if (config.conditional && !batch.labels.empty()) {
        paired = pair_conditional(batch, config.cost);
    } else {
        paired = pair_unconditional(batch, config.cost);
    }

    // Mix pair order (jointly, keeping each pair intact) so minibatches are
    // not biased by draw order; the swap sequence depends only on data_rng,
    // so aot and independent runs consume identical draws.
    if (n > 1) {
        PairedBatch mixed;
        mixed.points = PointSet(n, d);
        mixed.selected_noises = PointSet(n, d);
        if (!paired.labels.empty()) mixed.labels.resize(n);
        mixed.pairing_cost = paired.pairing_cost;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            std::swap(order[i], order[i + data_rng.below(n - i)]);
        }
        for (std::size_t r = 0; r < n; ++r) {
            const auto ps = paired.points.row(order[r]);
            std::copy(ps.begin(), ps.end(), mixed.points.row(r).begin());
            const auto ns = paired.selected_noises.row(order[r]);
            std::copy(ns.begin(), ns.end(), mixed.selected_noises.row(r).begin());
            if (!paired.labels.empty()) mixed.labels[r] = paired.labels[order[r]];
        }
        paired = std::move(mixed);
    }
    return PairPool(std::move(paired), config.minibatch);
}

double empirical_w2(const PointSet& set_a, const PointSet& set_b,
                    std::size_t solver_cap, std::uint64_t subsample_seed) {
    if (!set_a.same_shape(set_b) || set_a.count == 0) {
        throw ValidationError("empirical_w2: sets must be non-empty with equal counts and dims");
    }
    const PointSet* a = &set_a;
    const PointSet* b = &set_b;
    PointSet sub_a, sub_b;
    if (set_a.count > solver_cap) {
        std::fprintf(stderr,
                     "empirical_w2: %zu points exceed solver cap %zu; subsampling (seed %llu)\n",
                     set_a.count, solver_cap,
                     static_cast<unsigned long long>(subsample_seed));
        Rng rng(derive_seed(subsample_seed, 0x5741535345ULL));
        std::vector<std::size_t> order(set_a.count);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(i + 1)]);
        }
        sub_a = PointSet(solver_cap, set_a.dim);
        sub_b = PointSet(solver_cap, set_b.dim);
        for (std::size_t r = 0; r < solver_cap; ++r) {
            const auto ra = set_a.row(order[r]);
            std::copy(ra.begin(), ra.end(), sub_a.row(r).begin());
            const auto rb = set_b.row(order[r]);
            std::copy(rb.begin(), rb.end(), sub_b.row(r).begin());
        }
        a = &sub_a;
        b = &sub_b;
    }
    const CostMatrix cost = build_cost_matrix(*a, *b, PairingCost::squared_euclidean);
    const Assignment sol = hungarian_solve(cost);
    return std::sqrt(sol.total_cost / static_cast<double>(a->count));
}

}  // namespace aot
