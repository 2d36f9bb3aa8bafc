// Python bindings for the AOT diffusion toolkit core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aot/assignment.hpp"
#include "aot/data.hpp"
#include "aot/diagnostics.hpp"
#include "aot/guidance.hpp"
#include "aot/model.hpp"
#include "aot/sampler.hpp"
#include "aot/schedule.hpp"
#include "aot/training.hpp"
#include "aot/transport.hpp"

namespace py = pybind11;
using namespace aot;

namespace {

using Rows = std::vector<std::vector<double>>;

PointSet rows_to_points(const Rows& rows) {
    if (rows.empty()) throw ValidationError("expected at least one row");
    PointSet out(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != out.dim) throw ValidationError("ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), out.row(i).begin());
    }
    return out;
}

Rows points_to_rows(const PointSet& ps) {
    Rows out(ps.count);
    for (std::size_t i = 0; i < ps.count; ++i) {
        out[i].assign(ps.row(i).begin(), ps.row(i).end());
    }
    return out;
}

CostMatrix rows_to_cost(const Rows& rows) {
    const std::size_t n = rows.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (const auto& row : rows) {
        if (row.size() != n) throw ValidationError("cost matrix must be square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return CostMatrix(n, std::move(flat));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Approximated Optimal Transport diffusion toolkit";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<RuntimeError>(m, "RuntimeError", PyExc_RuntimeError);

    // assignment
    m.def(
        "hungarian_solve",
        [](const Rows& cost) {
            const Assignment a = hungarian_solve(rows_to_cost(cost));
            return py::make_tuple(a.permutation, a.total_cost);
        },
        py::arg("cost"), "Exact minimum-cost assignment: (permutation, total_cost)");
    m.def(
        "brute_force_solve",
        [](const Rows& cost) {
            const Assignment a = brute_force_solve(rows_to_cost(cost));
            return py::make_tuple(a.permutation, a.total_cost);
        },
        py::arg("cost"));
    m.def(
        "assignment_cost",
        [](const Rows& cost, const std::vector<int>& perm) {
            return assignment_cost(rows_to_cost(cost), perm);
        },
        py::arg("cost"), py::arg("permutation"));

    // transport
    m.def(
        "pair_noise",
        [](const Rows& points, const Rows& noises, std::optional<std::vector<int>> labels) {
            SampleBatch batch;
            batch.points = rows_to_points(points);
            batch.noises = rows_to_points(noises);
            if (labels) batch.labels = *labels;
            const PairedBatch paired =
                labels ? pair_conditional(batch) : pair_unconditional(batch);
            return py::make_tuple(points_to_rows(paired.selected_noises), paired.pairing_cost);
        },
        py::arg("points"), py::arg("noises"), py::arg("labels") = py::none(),
        "AOT pairing: (selected_noises, total_cost); class-wise when labels given");
    m.def(
        "empirical_w2",
        [](const Rows& a, const Rows& b, std::size_t cap) {
            return empirical_w2(rows_to_points(a), rows_to_points(b), cap);
        },
        py::arg("set_a"), py::arg("set_b"), py::arg("solver_cap") = 2048);

    // schedule
    m.def(
        "timesteps",
        [](int n, double sigma_min, double sigma_max, double rho) {
            return timesteps(n, sigma_min, sigma_max, rho).values;
        },
        py::arg("n"), py::arg("sigma_min") = kDefaultSigmaMin,
        py::arg("sigma_max") = kDefaultSigmaMax, py::arg("rho") = kDefaultRho);
    m.def("loss_weight", &loss_weight, py::arg("sigma"), py::arg("sigma_data"));

    // datasets
    m.def(
        "make_mixture",
        [](const Rows& means, double std_dev, std::size_t count, std::uint64_t seed) {
            Rng rng(seed);
            const Dataset ds = make_mixture(rows_to_points(means), std_dev, count, rng);
            return py::make_tuple(points_to_rows(ds.points), ds.labels);
        },
        py::arg("means"), py::arg("std"), py::arg("count"), py::arg("seed") = 0);

    // oracles + sampling
    py::class_<AnalyticDenoiser>(m, "AnalyticDenoiser")
        .def_static("point_mass", &AnalyticDenoiser::point_mass, py::arg("mu"))
        .def_static("isotropic_gaussian", &AnalyticDenoiser::isotropic_gaussian,
                    py::arg("mu"), py::arg("s"))
        .def_static(
            "empirical",
            [](const Rows& points) { return AnalyticDenoiser::empirical(rows_to_points(points)); },
            py::arg("points"))
        .def(
            "denoise",
            [](const AnalyticDenoiser& d, const std::vector<double>& x, double sigma) {
                return d.denoise(x, sigma);
            },
            py::arg("x"), py::arg("sigma"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("nfe", [](const Trajectory& t) { return t.nfe; })
        .def_property_readonly("endpoint", [](const Trajectory& t) { return t.endpoint(); })
        .def_property_readonly("sigmas",
                               [](const Trajectory& t) {
                                   std::vector<double> out;
                                   for (const auto& r : t.records) out.push_back(r.sigma);
                                   return out;
                               })
        .def_property_readonly("states", [](const Trajectory& t) {
            Rows out;
            for (const auto& r : t.records) out.push_back(r.x);
            return out;
        });

    m.def(
        "heun_sample_oracle",
        [](const AnalyticDenoiser& oracle, int n, double rho, const std::vector<double>& x0,
           double sigma_min, double sigma_max) {
            return heun_sample(as_denoise_fn(oracle), timesteps(n, sigma_min, sigma_max, rho),
                               x0);
        },
        py::arg("oracle"), py::arg("n"), py::arg("rho"), py::arg("x_init"),
        py::arg("sigma_min") = kDefaultSigmaMin, py::arg("sigma_max") = kDefaultSigmaMax);
    m.def(
        "euler_sample_oracle",
        [](const AnalyticDenoiser& oracle, int n, double rho, const std::vector<double>& x0,
           double sigma_min, double sigma_max) {
            return euler_sample(as_denoise_fn(oracle), timesteps(n, sigma_min, sigma_max, rho),
                                x0);
        },
        py::arg("oracle"), py::arg("n"), py::arg("rho"), py::arg("x_init"),
        py::arg("sigma_min") = kDefaultSigmaMin, py::arg("sigma_max") = kDefaultSigmaMax);

    m.def(
        "curvature",
        [](const Trajectory& traj) {
            const CurvatureReport rep = curvature(traj);
            py::dict out;
            out["tangent_curvature"] = rep.tangent_curvature;
            out["x0_drift"] = rep.x0_drift;
            out["degenerate_tangents"] = rep.degenerate_tangents;
            return out;
        },
        py::arg("trajectory"));

    // models + training
    py::class_<DenoiserModel>(m, "DenoiserModel")
        .def(
            "denoise",
            [](const DenoiserModel& model, const std::vector<double>& x, double sigma,
               int label) { return model.denoise(x, sigma, label); },
            py::arg("x"), py::arg("sigma"), py::arg("label") = -1)
        .def_property_readonly("param_count", &DenoiserModel::param_count)
        .def(
            "heun_sample",
            [](const DenoiserModel& model, int n, double rho, const std::vector<double>& x0,
               int label, double sigma_min, double sigma_max) {
                return heun_sample(as_denoise_fn(model, label),
                                   timesteps(n, sigma_min, sigma_max, rho), x0);
            },
            py::arg("n"), py::arg("rho"), py::arg("x_init"), py::arg("label") = -1,
            py::arg("sigma_min") = kDefaultSigmaMin, py::arg("sigma_max") = kDefaultSigmaMax);

    m.def(
        "train",
        [](const std::string& config_json, const Rows& points,
           std::optional<std::vector<int>> labels) {
            const TrainConfig config = train_config_from_json(config_json);
            Dataset ds;
            ds.points = rows_to_points(points);
            if (labels) {
                ds.labels = *labels;
                ds.class_count =
                    ds.labels.empty()
                        ? 0
                        : 1 + *std::max_element(ds.labels.begin(), ds.labels.end());
            }
            const TrainResult result = train(config, ds);
            py::list losses;
            for (const auto& r : result.log.records) losses.append(r.mean_loss);
            return py::make_tuple(result.ema_model(), losses);
        },
        py::arg("config_json"), py::arg("points"), py::arg("labels") = py::none(),
        "Train on points; returns (ema_model, per-refresh mean losses)");

    m.def("load_checkpoint_model",
          [](const std::string& path, bool use_ema) {
              return model_from_checkpoint(load_checkpoint(path), use_ema);
          },
          py::arg("path"), py::arg("use_ema") = true);
}
