#include "aot/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aot {

void Dataset::validate() const {
    if (points.count == 0) {
        throw ValidationError("Dataset: no points");
    }
    if (!all_finite(points.values)) {
        throw ValidationError("Dataset: non-finite entries");
    }
    if (!labels.empty()) {
        if (labels.size() != points.count) {
            throw ValidationError("Dataset: label count mismatch");
        }
        for (int l : labels) {
            if (l < 0 || l >= class_count) {
                throw ValidationError("Dataset: label " + std::to_string(l) +
                                      " outside {0.." + std::to_string(class_count - 1) + "}");
            }
        }
    }
}

Dataset make_mixture(const PointSet& means, double std_dev, std::size_t count, Rng& rng) {
    if (means.count == 0 || !(std_dev > 0.0)) {
        throw ValidationError("make_mixture: need k >= 1 modes and std > 0");
    }
    Dataset ds;
    ds.points = PointSet(count, means.dim);
    ds.labels.resize(count);
    ds.class_count = static_cast<int>(means.count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto mode = static_cast<std::size_t>(rng.below(means.count));
        ds.labels[i] = static_cast<int>(mode);
        const auto mu = means.row(mode);
        auto out = ds.points.row(i);
        for (std::size_t k = 0; k < means.dim; ++k) {
            out[k] = mu[k] + std_dev * rng.normal();
        }
    }
    return ds;
}

Dataset make_ring(double radius, double std_dev, std::size_t count, Rng& rng) {
    if (!(radius > 0.0) || !(std_dev > 0.0)) {
        throw ValidationError("make_ring: radius and std must be > 0");
    }
    Dataset ds;
    ds.points = PointSet(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
        const double angle = 6.283185307179586476925286766559 * rng.uniform01();
        const double r = radius + std_dev * rng.normal();
        auto out = ds.points.row(i);
        out[0] = r * std::cos(angle);
        out[1] = r * std::sin(angle);
    }
    return ds;
}

Dataset make_checkerboard(std::size_t count, Rng& rng) {
    Dataset ds;
    ds.points = PointSet(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
        // Rejection-free: pick a dark cell of the 4x4 board, then fill it.
        const auto cell = rng.below(8);
        const int cx = static_cast<int>(cell % 4);
        const int cy_parity = static_cast<int>(cell / 4);        // 0 or 1 within column pair
        const int cy = 2 * cy_parity + (cx % 2);                 // dark cells: (cx+cy) even
        auto out = ds.points.row(i);
        out[0] = -2.0 + cx + rng.uniform01();
        out[1] = -2.0 + cy + rng.uniform01();
    }
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw RuntimeError("load_csv: cannot open " + path);
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw RuntimeError("load_csv: empty file " + path);
    }
    std::vector<std::string> columns;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) columns.push_back(col);
    }
    if (columns.empty()) {
        throw RuntimeError("load_csv: no columns in " + path);
    }
    const bool has_label = columns.back() == "label";
    const std::size_t d = columns.size() - (has_label ? 1 : 0);
    if (d == 0) {
        throw RuntimeError("load_csv: no feature columns in " + path);
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                if (col < d) {
                    values.push_back(std::stod(cell));
                } else if (has_label && col == d) {
                    labels.push_back(std::stoi(cell));
                } else {
                    throw std::invalid_argument("extra column");
                }
            } catch (const std::exception&) {
                throw RuntimeError("load_csv: " + path + ":" + std::to_string(line_no) +
                                   ": bad cell '" + cell + "'");
            }
            ++col;
        }
        if (col != columns.size()) {
            throw RuntimeError("load_csv: " + path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(columns.size()) +
                               " cells, got " + std::to_string(col));
        }
    }
    if (values.empty()) {
        throw RuntimeError("load_csv: no data rows in " + path);
    }

    Dataset ds;
    ds.points.count = values.size() / d;
    ds.points.dim = d;
    ds.points.values = std::move(values);
    ds.labels = std::move(labels);
    if (!ds.labels.empty()) {
        ds.class_count = 1 + *std::max_element(ds.labels.begin(), ds.labels.end());
    }
    ds.validate();
    return ds;
}

void save_csv(const std::string& path, const PointSet& points,
              const std::vector<int>& labels) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) {
        throw RuntimeError("save_csv: cannot open " + path + " for writing");
    }
    for (std::size_t k = 0; k < points.dim; ++k) {
        std::fprintf(f, "%sx%zu", k ? "," : "", k);
    }
    if (!labels.empty()) std::fprintf(f, ",label");
    std::fprintf(f, "\n");
    for (std::size_t i = 0; i < points.count; ++i) {
        const auto row = points.row(i);
        for (std::size_t k = 0; k < points.dim; ++k) {
            // 17 significant digits: doubles round-trip exactly.
            std::fprintf(f, "%s%.17g", k ? "," : "", row[k]);
        }
        if (!labels.empty()) std::fprintf(f, ",%d", labels[i]);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

Dataset normalize(const Dataset& dataset, double target_std) {
    dataset.validate();
    if (!(target_std > 0.0)) {
        throw ValidationError("normalize: target_std must be > 0");
    }
    const std::size_t d = dataset.points.dim;
    const std::size_t n = dataset.points.count;
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = dataset.points.row(i);
        for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = dataset.points.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            const double dev = row[k] - mean[k];
            var[k] += dev * dev;
        }
    }

    Dataset out = dataset;
    out.norm.shift = mean;
    out.norm.scale.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double sd = std::sqrt(var[k] / static_cast<double>(n));
        out.norm.scale[k] = sd > 0.0 ? target_std / sd : 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto row = out.points.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            row[k] = (row[k] - out.norm.shift[k]) * out.norm.scale[k];
        }
    }
    return out;
}

PointSet denormalize(const PointSet& points, const Normalization& norm) {
    if (norm.identity()) return points;
    if (norm.shift.size() != points.dim) {
        throw ValidationError("denormalize: dimension mismatch");
    }
    PointSet out = points;
    for (std::size_t i = 0; i < out.count; ++i) {
        auto row = out.row(i);
        for (std::size_t k = 0; k < out.dim; ++k) {
            row[k] = row[k] / norm.scale[k] + norm.shift[k];
        }
    }
    return out;
}

}  // namespace aot
