#pragma once

#include <string>
#include <vector>

#include "aot/common.hpp"

namespace aot {

// Invertible per-dimension affine map: normalized = (x - shift) * scale.
struct Normalization {
    std::vector<double> shift;
    std::vector<double> scale;
    bool identity() const { return shift.empty(); }
};

struct Dataset {
    PointSet points;
    std::vector<int> labels;  // empty = unlabeled
    int class_count = 0;
    Normalization norm;

    void validate() const;
};

// Uniform mixture of k isotropic Gaussian modes; labels record the mode.
Dataset make_mixture(const PointSet& means, double std_dev, std::size_t count, Rng& rng);

// Circle of given radius with radial Gaussian jitter. Unlabeled.
Dataset make_ring(double radius, double std_dev, std::size_t count, Rng& rng);

// Uniform over the dark cells of a 4x4 checkerboard on [-2, 2]^2. Unlabeled.
Dataset make_checkerboard(std::size_t count, Rng& rng);

// CSV: header row, d float columns, optional trailing integer "label" column.
Dataset load_csv(const std::string& path);
void save_csv(const std::string& path, const PointSet& points,
              const std::vector<int>& labels = {});

// Shifts each dimension to mean 0 and rescales it to the target std; the
// (shift, scale) record makes the map invertible.
Dataset normalize(const Dataset& dataset, double target_std);
PointSet denormalize(const PointSet& points, const Normalization& norm);

}  // namespace aot
