#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "aot/assignment.hpp"
#include "aot/common.hpp"

namespace aot {

// Pairing cost convention: raw Euclidean distance is the default; squared
// distance is exposed for ablation (the argmin over permutations can differ).
enum class PairingCost { euclidean, squared_euclidean };

struct SampleBatch {
    PointSet points;            // data y
    PointSet noises;            // eps ~ N(0, I)
    std::vector<int> labels;    // empty = unlabeled

    void validate() const;
};

// AOT output: points keep their input order; selected_noises is a
// permutation of the input noises.
struct PairedBatch {
    PointSet points;
    PointSet selected_noises;
    std::vector<int> labels;
    double pairing_cost = 0.0;  // total assignment cost at pairing time
};

// Entry (i, j) = distance between points row i and noises row j.
CostMatrix build_cost_matrix(const PointSet& points, const PointSet& noises,
                             PairingCost kind = PairingCost::euclidean);

// Hungarian pairing over the whole batch; labels (if any) are carried
// through untouched.
PairedBatch pair_unconditional(const SampleBatch& batch,
                               PairingCost kind = PairingCost::euclidean);

// Class-wise pairing: noises are allocated to classes in blocks matching the
// class sizes (first n_0 noises to class 0, next n_1 to class 1, ...), the
// assignment problem is solved per class, and selected noise is written back
// into the original image slots so image order is preserved.
PairedBatch pair_conditional(const SampleBatch& batch,
                             PairingCost kind = PairingCost::euclidean);

// Identity pairing (noise i stays with point i); the independent-coupling
// baseline for A/B comparisons.
PairedBatch pair_independent(const SampleBatch& batch,
                             PairingCost kind = PairingCost::euclidean);

// A refreshed pool of N paired samples consumed exactly once in sequential
// minibatches of size B. Single consumer.
class PairPool {
public:
    PairPool(PairedBatch batch, std::size_t minibatch_size);

    std::size_t size() const { return batch_.points.count; }
    std::size_t minibatch_size() const { return minibatch_size_; }
    bool exhausted() const { return cursor_ >= batch_.points.count; }
    double pairing_cost() const { return batch_.pairing_cost; }

    // Next minibatch of (point, noise, label) rows; throws once exhausted.
    PairedBatch next_minibatch();

private:
    PairedBatch batch_;
    std::size_t minibatch_size_;
    std::size_t cursor_ = 0;
};

enum class PairingMode { aot, independent };

struct PoolConfig {
    std::size_t pairs = 512;            // N
    std::size_t minibatch = 32;         // B
    PairingMode mode = PairingMode::aot;
    bool conditional = false;
    bool class_balanced = false;        // equal class quotas when N % C == 0
    PairingCost cost = PairingCost::euclidean;
    double jitter_std = 0.0;            // augmentation; 0 = identity
};

// Draws N data rows (without replacement when the dataset is large enough,
// with replacement otherwise) and N fresh noises, applies jitter, pairs them
// and returns a pool. data_rng/noise_rng/aug_rng are separate streams so the
// pairing mode never perturbs the draws.
PairPool make_pair_pool(const PointSet& data_points, const std::vector<int>& data_labels,
                        const PoolConfig& config, Rng& data_rng, Rng& noise_rng,
                        Rng& aug_rng);

// Empirical 2-Wasserstein distance between equal-size point sets:
// sqrt( (1/M) min_pi sum_i ||a_i - b_pi(i)||^2 ) by exact assignment.
// Sets larger than solver_cap are subsampled with the seeded RNG and a
// warning on stderr.
double empirical_w2(const PointSet& set_a, const PointSet& set_b,
                    std::size_t solver_cap = 2048, std::uint64_t subsample_seed = 0);

}  // namespace aot
