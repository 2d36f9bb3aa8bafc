// aot: command-line front end for the AOT diffusion toolkit.
//
// Subcommands: train, sample, eval, pair-stats, schedule, traj,
// dg-train, dg-sample. Exit codes: 0 success, 2 validation error,
// 3 runtime error. All randomness flows from --seed (env AOT_SEED).

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aot/data.hpp"
#include "aot/diagnostics.hpp"
#include "aot/guidance.hpp"
#include "aot/model.hpp"
#include "aot/sampler.hpp"
#include "aot/schedule.hpp"
#include "aot/training.hpp"
#include "aot/transport.hpp"

namespace {

using nlohmann::json;
using namespace aot;

constexpr const char* kToolVersion = "0.1.0";

// Seed substreams for CLI-level draws; clear of training's 0..4 and the
// discriminator trainer's 16..23.
enum CliStream : std::uint64_t {
    kDatasetStream = 8,
    kSampleStream = 32,
    kLabelStream = 33,
    kTrajStream = 34,
    kPairStatsStream = 35,
};

struct DatasetSpec {
    json block;  // parsed "dataset" object

    Dataset build(std::uint64_t seed) const {
        const std::string type = block.at("type").get<std::string>();
        Rng rng(derive_seed(seed, kDatasetStream));
        Dataset ds;
        if (type == "mixture") {
            const auto mean_rows = block.at("means").get<std::vector<std::vector<double>>>();
            if (mean_rows.empty()) throw ValidationError("dataset: mixture needs means");
            PointSet means(mean_rows.size(), mean_rows[0].size());
            for (std::size_t i = 0; i < mean_rows.size(); ++i) {
                if (mean_rows[i].size() != means.dim) {
                    throw ValidationError("dataset: ragged means");
                }
                std::copy(mean_rows[i].begin(), mean_rows[i].end(), means.row(i).begin());
            }
            ds = make_mixture(means, block.at("std").get<double>(),
                              block.at("count").get<std::size_t>(), rng);
        } else if (type == "ring") {
            ds = make_ring(block.at("radius").get<double>(), block.at("std").get<double>(),
                           block.at("count").get<std::size_t>(), rng);
        } else if (type == "checkerboard") {
            ds = make_checkerboard(block.at("count").get<std::size_t>(), rng);
        } else if (type == "csv") {
            ds = load_csv(block.at("path").get<std::string>());
        } else {
            throw ValidationError("dataset: unknown type '" + type + "'");
        }
        if (block.contains("normalize_std")) {
            ds = normalize(ds, block.at("normalize_std").get<double>());
        }
        return ds;
    }
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write " + path);
    out << text;
    if (!out) throw RuntimeError("write failed for " + path);
}

// RunManifest: enough to replay the command byte-for-byte. Written before
// any long work starts.
void write_manifest(const std::string& out_path, const std::string& command,
                    const json& resolved, std::uint64_t seed,
                    const std::vector<std::string>& artifacts) {
    json doc;
    doc["command"] = command;
    doc["config"] = resolved;
    doc["seed"] = seed;
    doc["artifacts"] = artifacts;
    doc["tool_version"] = kToolVersion;
    write_text_file(out_path + ".manifest.json", doc.dump(2));
}

// Fixed 17-significant-digit formatting keeps CSV round trips bit-stable.
std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Runs fn(i) for i in [0, n) across up to `threads` workers. Each index owns
// its output slot and RNG stream, so results are bit-identical to serial.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

AnalyticDenoiser parse_oracle(const std::string& spec) {
    const auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, sep)) parts.push_back(item);
        return parts;
    };
    const auto colon = split(spec, ':');
    if (colon.empty()) throw ValidationError("oracle: empty spec");
    const auto parse_num = [&](const std::string& tok) {
        try {
            return std::stod(tok);
        } catch (const std::exception&) {
            throw ValidationError("oracle: bad number '" + tok + "' in '" + spec + "'");
        }
    };
    const auto parse_vec = [&](const std::string& s) {
        std::vector<double> v;
        for (const auto& tok : split(s, ',')) v.push_back(parse_num(tok));
        return v;
    };
    if (colon[0] == "point_mass" && colon.size() == 2) {
        return AnalyticDenoiser::point_mass(parse_vec(colon[1]));
    }
    if (colon[0] == "gaussian" && colon.size() == 3) {
        return AnalyticDenoiser::isotropic_gaussian(parse_vec(colon[1]), parse_num(colon[2]));
    }
    if (colon[0] == "empirical" && colon.size() == 2) {
        return AnalyticDenoiser::empirical(load_csv(colon[1]).points);
    }
    throw ValidationError("oracle: expected point_mass:<mu>|gaussian:<mu>:<s>|empirical:<csv>, got '" +
                          spec + "'");
}

struct CommonSampleArgs {
    int steps = 18;
    double rho = kDefaultRho;
    double sigma_min = kDefaultSigmaMin;
    double sigma_max = kDefaultSigmaMax;
};

void add_schedule_flags(CLI::App* cmd, CommonSampleArgs& args) {
    cmd->add_option("--steps", args.steps, "schedule steps n");
    cmd->add_option("--rho", args.rho, "schedule warp exponent");
    cmd->add_option("--sigma-min", args.sigma_min, "smallest positive sigma");
    cmd->add_option("--sigma-max", args.sigma_max, "largest sigma");
}

PointSet sample_model(const DenoiserModel& model, const NoiseSchedule& sched,
                      std::size_t count, std::uint64_t seed, unsigned threads,
                      std::vector<int>* labels_out) {
    const std::size_t d = model.config().dim;
    PointSet samples(count, d);
    std::vector<int> labels(count, -1);
    if (model.config().class_count > 0) {
        Rng label_rng(derive_seed(seed, kLabelStream));
        for (auto& l : labels) {
            l = static_cast<int>(label_rng.below(model.config().class_count));
        }
    }
    parallel_for(count, threads, [&](std::size_t i) {
        Rng rng(derive_seed(derive_seed(seed, kSampleStream), i));
        std::vector<double> x0(d);
        for (auto& x : x0) x = sched.sigma_max * rng.normal();
        const int label = labels[i];
        const DenoiseFn fn = as_denoise_fn(model, label);
        const auto traj = heun_sample(fn, sched, x0);
        std::copy(traj.endpoint().begin(), traj.endpoint().end(), samples.row(i).begin());
    });
    if (labels_out && model.config().class_count > 0) *labels_out = labels;
    return samples;
}

int cmd_train(const std::string& config_path, std::optional<std::string> data_csv,
              std::optional<int> refreshes, std::optional<std::uint64_t> seed,
              std::optional<std::string> pairing, const std::string& out_path,
              std::optional<std::string> log_path) {
    json doc = read_json_file(config_path);
    if (data_csv) doc["dataset"] = json{{"type", "csv"}, {"path", *data_csv}};
    if (!doc.contains("dataset")) {
        throw ValidationError("train: config needs a \"dataset\" block or --data");
    }
    json cfg_json = doc;
    cfg_json.erase("dataset");
    TrainConfig config = train_config_from_json(cfg_json.dump());
    if (refreshes) config.refreshes = *refreshes;
    if (seed) config.seed = *seed;
    if (pairing) {
        if (*pairing == "aot") {
            config.pairing = PairingMode::aot;
        } else if (*pairing == "independent") {
            config.pairing = PairingMode::independent;
        } else {
            throw ValidationError("train: --pairing must be aot|independent");
        }
    }

    json resolved = json::parse(train_config_to_json(config));
    resolved["dataset"] = doc["dataset"];
    std::vector<std::string> artifacts{out_path};
    if (log_path) artifacts.push_back(*log_path);
    write_manifest(out_path, "train", resolved, config.seed, artifacts);

    const Dataset dataset = DatasetSpec{doc["dataset"]}.build(config.seed);
    const TrainResult result = train(config, dataset);
    save_checkpoint(make_checkpoint(result, config), out_path);

    if (log_path) {
        std::ofstream log(*log_path);
        if (!log) throw RuntimeError("cannot write " + *log_path);
        log << "refresh,mean_loss,mean_pairing_cost,wall_ms\n";
        for (const auto& r : result.log.records) {
            log << r.refresh << ',' << format_double(r.mean_loss) << ','
                << format_double(r.mean_pairing_cost) << ',' << format_double(r.wall_ms)
                << '\n';
        }
    }
    const auto& last = result.log.records.back();
    std::printf("trained %d refreshes; final mean loss %.6g; checkpoint %s\n",
                config.refreshes, last.mean_loss, out_path.c_str());
    return 0;
}

int cmd_sample(const std::string& ckpt_path, const CommonSampleArgs& sched_args,
               std::size_t count, std::uint64_t seed, const std::string& out_path,
               bool use_raw, unsigned threads) {
    const NoiseSchedule sched =
        timesteps(sched_args.steps, sched_args.sigma_min, sched_args.sigma_max, sched_args.rho);
    write_manifest(out_path, "sample",
                   json{{"checkpoint", ckpt_path},
                        {"steps", sched_args.steps},
                        {"rho", sched_args.rho},
                        {"sigma_min", sched_args.sigma_min},
                        {"sigma_max", sched_args.sigma_max},
                        {"count", count},
                        {"use_ema", !use_raw}},
                   seed, {out_path});
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const DenoiserModel model = model_from_checkpoint(ckpt, !use_raw);
    std::vector<int> labels;
    const PointSet samples = sample_model(model, sched, count, seed, threads, &labels);
    save_csv(out_path, samples, labels);
    std::printf("wrote %zu samples to %s (nfe %d per sample)\n", count, out_path.c_str(),
                2 * sched_args.steps - 1);
    return 0;
}

int cmd_eval(const std::string& samples_path, const std::string& reference_path,
             std::optional<std::string> out_path) {
    const Dataset samples = load_csv(samples_path);
    const Dataset reference = load_csv(reference_path);
    const GenerationMetrics metrics =
        eval_generation(samples.points, reference.points, reference.labels);
    json doc;
    doc["w2"] = metrics.w2;
    if (!metrics.mode_counts.empty()) doc["mode_counts"] = metrics.mode_counts;
    doc["samples"] = samples_path;
    doc["reference"] = reference_path;
    std::cout << doc.dump(2) << std::endl;
    if (out_path) write_text_file(*out_path, doc.dump(2));
    return 0;
}

int cmd_pair_stats(std::optional<std::string> data_csv, std::size_t n, std::size_t trials,
                   std::size_t dim, std::uint64_t seed, const std::string& out_path,
                   unsigned threads) {
    write_manifest(out_path, "pair-stats",
                   json{{"data", data_csv ? json(*data_csv) : json()},
                        {"n", n},
                        {"trials", trials},
                        {"dim", dim}},
                   seed, {out_path});
    std::optional<Dataset> data;
    if (data_csv) data = load_csv(*data_csv);

    std::vector<double> aot_costs(trials), indep_costs(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        Rng rng(derive_seed(derive_seed(seed, kPairStatsStream), t));
        SampleBatch batch;
        const std::size_t d = data ? data->points.dim : dim;
        batch.points = PointSet(n, d);
        batch.noises = PointSet(n, d);
        if (data) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto src = data->points.row(rng.below(data->points.count));
                std::copy(src.begin(), src.end(), batch.points.row(i).begin());
            }
        } else {
            for (double& x : batch.points.values) x = rng.normal();
        }
        for (double& x : batch.noises.values) x = rng.normal();
        aot_costs[t] = pair_unconditional(batch).pairing_cost;
        indep_costs[t] = pair_independent(batch).pairing_cost;
    });

    std::ofstream out(out_path);
    if (!out) throw RuntimeError("cannot write " + out_path);
    out << "trial,aot_total_cost,independent_total_cost\n";
    double aot_mean = 0.0, indep_mean = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        out << t << ',' << format_double(aot_costs[t]) << ',' << format_double(indep_costs[t])
            << '\n';
        aot_mean += aot_costs[t];
        indep_mean += indep_costs[t];
    }
    aot_mean /= trials;
    indep_mean /= trials;
    std::printf("aot mean %.6g, independent mean %.6g, reduction %.2f%%\n", aot_mean,
                indep_mean, 100.0 * (1.0 - aot_mean / indep_mean));
    return 0;
}

int cmd_schedule(const CommonSampleArgs& args) {
    const NoiseSchedule sched =
        timesteps(args.steps, args.sigma_min, args.sigma_max, args.rho);
    std::printf("step,sigma\n");
    for (std::size_t i = 0; i < sched.values.size(); ++i) {
        std::printf("%zu,%s\n", i, format_double(sched.values[i]).c_str());
    }
    return 0;
}

int cmd_traj(std::optional<std::string> ckpt_path, std::optional<std::string> oracle_spec,
             const CommonSampleArgs& sched_args, const std::string& sampler_kind,
             std::uint64_t seed, const std::string& out_prefix) {
    if (!ckpt_path == !oracle_spec) {
        throw ValidationError("traj: give exactly one of --checkpoint or --oracle");
    }
    const NoiseSchedule sched =
        timesteps(sched_args.steps, sched_args.sigma_min, sched_args.sigma_max, sched_args.rho);
    write_manifest(out_prefix, "traj",
                   json{{"checkpoint", ckpt_path ? json(*ckpt_path) : json()},
                        {"oracle", oracle_spec ? json(*oracle_spec) : json()},
                        {"steps", sched_args.steps},
                        {"rho", sched_args.rho},
                        {"sampler", sampler_kind}},
                   seed,
                   {out_prefix + ".csv", out_prefix + ".curvature.json",
                    out_prefix + ".curvature.csv"});

    std::optional<DenoiserModel> model;
    std::optional<AnalyticDenoiser> oracle;
    DenoiseFn fn;
    std::size_t d = 0;
    if (ckpt_path) {
        model = model_from_checkpoint(load_checkpoint(*ckpt_path));
        d = model->config().dim;
        fn = as_denoise_fn(*model);
    } else {
        oracle = parse_oracle(*oracle_spec);
        d = oracle->dim();
        fn = as_denoise_fn(*oracle);
    }

    Rng rng(derive_seed(seed, kTrajStream));
    std::vector<double> x0(d);
    for (auto& x : x0) x = sched.sigma_max * rng.normal();

    Trajectory traj;
    if (sampler_kind == "heun") {
        traj = heun_sample(fn, sched, x0);
    } else if (sampler_kind == "euler") {
        traj = euler_sample(fn, sched, x0);
    } else {
        throw ValidationError("traj: --sampler must be heun|euler");
    }

    std::ofstream csv(out_prefix + ".csv");
    if (!csv) throw RuntimeError("cannot write " + out_prefix + ".csv");
    csv << "step,sigma";
    for (std::size_t k = 0; k < d; ++k) csv << ",x" << k;
    for (std::size_t k = 0; k < d; ++k) csv << ",x0_hat" << k;
    csv << '\n';
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        const auto& rec = traj.records[i];
        csv << i << ',' << format_double(rec.sigma);
        for (double v : rec.x) csv << ',' << format_double(v);
        for (double v : rec.x0_hat) csv << ',' << format_double(v);
        csv << '\n';
    }

    const CurvatureReport report = curvature(traj);
    json doc;
    doc["tangent_curvature"] = report.tangent_curvature;
    doc["x0_drift"] = report.x0_drift;
    doc["degenerate_tangents"] = report.degenerate_tangents;
    doc["nfe"] = traj.nfe;
    write_text_file(out_prefix + ".curvature.json", doc.dump(2));

    std::ofstream steps(out_prefix + ".curvature.csv");
    if (!steps) throw RuntimeError("cannot write " + out_prefix + ".curvature.csv");
    steps << "step,sigma,turn,x0_step\n";
    for (std::size_t i = 0; i < report.per_step.size(); ++i) {
        const auto& s = report.per_step[i];
        steps << i << ',' << format_double(s.sigma) << ',' << format_double(s.turn) << ','
              << format_double(s.x0_step) << '\n';
    }
    std::cout << doc.dump(2) << std::endl;
    return 0;
}

int cmd_dg_train(const std::string& ckpt_path, const json& dataset_block,
                 std::size_t gen_count, bool use_aot, std::size_t pairs,
                 std::size_t minibatch, int refreshes, double lr, std::uint64_t seed,
                 const CommonSampleArgs& sched_args, const std::string& out_path,
                 unsigned threads) {
    write_manifest(out_path, "dg-train",
                   json{{"checkpoint", ckpt_path},
                        {"dataset", dataset_block},
                        {"gen_count", gen_count},
                        {"use_aot", use_aot},
                        {"pairs", pairs},
                        {"minibatch", minibatch},
                        {"refreshes", refreshes},
                        {"lr", lr}},
                   seed, {out_path});
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const DenoiserModel model = model_from_checkpoint(ckpt);
    const Dataset real = DatasetSpec{dataset_block}.build(seed);
    if (real.points.dim != model.config().dim) {
        throw ValidationError("dg-train: dataset dim != model dim");
    }

    const NoiseSchedule sched =
        timesteps(sched_args.steps, sched_args.sigma_min, sched_args.sigma_max, sched_args.rho);
    std::vector<int> gen_labels;
    Dataset generated;
    generated.points = sample_model(model, sched, gen_count, derive_seed(seed, 40), threads,
                                    &gen_labels);
    if (!gen_labels.empty()) {
        generated.labels = gen_labels;
        generated.class_count = model.config().class_count;
    }

    DiscTrainConfig config;
    config.pairs = pairs;
    config.minibatch = minibatch;
    config.refreshes = refreshes;
    config.lr = lr;
    config.seed = seed;
    config.sigma_data = model.config().sigma_data;
    config.conditional = model.config().class_count > 0;
    const Discriminator disc = train_discriminator(real, generated, use_aot, config);
    save_discriminator(disc, out_path);
    std::printf("trained discriminator (%s pairing) on %zu real / %zu generated; %s\n",
                use_aot ? "aot" : "independent", real.points.count, generated.points.count,
                out_path.c_str());
    return 0;
}

int cmd_dg_sample(const std::string& ckpt_path, const std::string& disc_path, double weight,
                  const CommonSampleArgs& sched_args, std::size_t count, std::uint64_t seed,
                  const std::string& out_path, unsigned threads) {
    const NoiseSchedule sched =
        timesteps(sched_args.steps, sched_args.sigma_min, sched_args.sigma_max, sched_args.rho);
    write_manifest(out_path, "dg-sample",
                   json{{"checkpoint", ckpt_path},
                        {"discriminator", disc_path},
                        {"weight", weight},
                        {"steps", sched_args.steps},
                        {"rho", sched_args.rho},
                        {"count", count}},
                   seed, {out_path});
    const DenoiserModel model = model_from_checkpoint(load_checkpoint(ckpt_path));
    const GuidanceConfig gcfg{weight, disc_path};
    const Discriminator disc = load_guidance(gcfg);

    const std::size_t d = model.config().dim;
    PointSet samples(count, d);
    std::vector<int> labels(count, -1);
    if (model.config().class_count > 0) {
        Rng label_rng(derive_seed(seed, kLabelStream));
        for (auto& l : labels) {
            l = static_cast<int>(label_rng.below(model.config().class_count));
        }
    }
    parallel_for(count, threads, [&](std::size_t i) {
        Rng rng(derive_seed(derive_seed(seed, kSampleStream), i));
        std::vector<double> x0(d);
        for (auto& x : x0) x = sched.sigma_max * rng.normal();
        const auto traj = guided_sample(model, disc, sched, x0, weight, labels[i]);
        std::copy(traj.endpoint().begin(), traj.endpoint().end(), samples.row(i).begin());
    });
    save_csv(out_path, samples,
             model.config().class_count > 0 ? labels : std::vector<int>{});
    std::printf("wrote %zu guided samples (w=%.4g) to %s\n", count, weight, out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximated Optimal Transport diffusion toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "global RNG seed")->envname("AOT_SEED");
    unsigned threads = 1;
    app.add_option("--threads", threads, "workers for bit-stable parallel sections");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a denoiser");
    std::string train_config, train_out = "model.ckpt.json";
    std::optional<std::string> train_data, train_log, train_pairing;
    std::optional<int> train_refreshes;
    train_cmd->add_option("--config", train_config, "train config JSON")->required();
    train_cmd->add_option("--data", train_data, "dataset CSV (overrides config dataset)");
    train_cmd->add_option("--refreshes", train_refreshes, "override refresh count");
    train_cmd->add_option("--pairing", train_pairing, "override pairing: aot|independent");
    train_cmd->add_option("--out", train_out, "checkpoint output path");
    train_cmd->add_option("--log", train_log, "training log CSV path");

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "sample from a checkpoint");
    std::string sample_ckpt, sample_out = "samples.csv";
    std::size_t sample_count = 1024;
    bool sample_raw = false;
    CommonSampleArgs sample_sched;
    sample_cmd->add_option("--checkpoint", sample_ckpt, "model checkpoint")->required();
    add_schedule_flags(sample_cmd, sample_sched);
    sample_cmd->add_option("--count", sample_count, "number of samples");
    sample_cmd->add_flag("--raw-weights", sample_raw, "use raw instead of EMA weights");
    sample_cmd->add_option("--out", sample_out, "samples CSV path");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "empirical W2 of samples vs reference");
    std::string eval_samples, eval_reference;
    std::optional<std::string> eval_out;
    eval_cmd->add_option("--samples", eval_samples, "samples CSV")->required();
    eval_cmd->add_option("--reference", eval_reference, "reference CSV")->required();
    eval_cmd->add_option("--out", eval_out, "metrics JSON path");

    // pair-stats
    auto* ps_cmd = app.add_subcommand("pair-stats", "AOT vs independent pairing costs");
    std::optional<std::string> ps_data;
    std::size_t ps_n = 256, ps_trials = 100, ps_dim = 2;
    std::string ps_out = "pair_stats.csv";
    ps_cmd->add_option("--data", ps_data, "dataset CSV (default: standard normal points)");
    ps_cmd->add_option("--n", ps_n, "pairs per trial");
    ps_cmd->add_option("--trials", ps_trials, "number of trials");
    ps_cmd->add_option("--dim", ps_dim, "dimension for synthetic points");
    ps_cmd->add_option("--out", ps_out, "output CSV path");

    // schedule
    auto* sched_cmd = app.add_subcommand("schedule", "print the timestep sequence");
    CommonSampleArgs sched_args;
    add_schedule_flags(sched_cmd, sched_args);

    // traj
    auto* traj_cmd = app.add_subcommand("traj", "record one sampling trajectory");
    std::optional<std::string> traj_ckpt, traj_oracle;
    std::string traj_sampler = "heun", traj_out = "traj";
    CommonSampleArgs traj_sched;
    traj_cmd->add_option("--checkpoint", traj_ckpt, "model checkpoint");
    traj_cmd->add_option("--oracle", traj_oracle,
                         "analytic denoiser: point_mass:<mu>|gaussian:<mu>:<s>|empirical:<csv>");
    add_schedule_flags(traj_cmd, traj_sched);
    traj_cmd->add_option("--sampler", traj_sampler, "heun|euler");
    traj_cmd->add_option("--out", traj_out, "output prefix");

    // dg-train
    auto* dgt_cmd = app.add_subcommand("dg-train", "train a guidance discriminator");
    std::string dgt_ckpt, dgt_out = "disc.ckpt.json";
    std::optional<std::string> dgt_data_csv, dgt_dataset_json;
    std::size_t dgt_gen_count = 10000, dgt_pairs = 512, dgt_minibatch = 32;
    int dgt_refreshes = 200;
    double dgt_lr = 1e-3;
    bool dgt_use_aot = false;
    CommonSampleArgs dgt_sched;
    dgt_cmd->add_option("--checkpoint", dgt_ckpt, "base model checkpoint")->required();
    dgt_cmd->add_option("--data", dgt_data_csv, "real dataset CSV");
    dgt_cmd->add_option("--dataset-json", dgt_dataset_json, "real dataset spec JSON file");
    dgt_cmd->add_option("--gen-count", dgt_gen_count, "generated set size");
    dgt_cmd->add_flag("--use-aot", dgt_use_aot, "AOT-pair noise in discriminator training");
    dgt_cmd->add_option("--pairs", dgt_pairs, "pool size N");
    dgt_cmd->add_option("--minibatch", dgt_minibatch, "minibatch B");
    dgt_cmd->add_option("--refreshes", dgt_refreshes, "pool refreshes");
    dgt_cmd->add_option("--lr", dgt_lr, "learning rate");
    add_schedule_flags(dgt_cmd, dgt_sched);
    dgt_cmd->add_option("--out", dgt_out, "discriminator checkpoint path");

    // dg-sample
    auto* dgs_cmd = app.add_subcommand("dg-sample", "sample with discriminator guidance");
    std::string dgs_ckpt, dgs_disc, dgs_out = "guided_samples.csv";
    double dgs_weight = 0.1;
    std::size_t dgs_count = 1024;
    CommonSampleArgs dgs_sched;
    dgs_cmd->add_option("--checkpoint", dgs_ckpt, "model checkpoint")->required();
    dgs_cmd->add_option("--disc", dgs_disc, "discriminator checkpoint")->required();
    dgs_cmd->add_option("--weight", dgs_weight, "guidance weight w");
    add_schedule_flags(dgs_cmd, dgs_sched);
    dgs_cmd->add_option("--count", dgs_count, "number of samples");
    dgs_cmd->add_option("--out", dgs_out, "samples CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            // config seed applies unless --seed (or AOT_SEED) is given
            std::optional<std::uint64_t> train_seed;
            if (app.count("--seed") > 0) train_seed = seed;
            return cmd_train(train_config, train_data, train_refreshes, train_seed,
                             train_pairing, train_out, train_log);
        }
        if (sample_cmd->parsed()) {
            return cmd_sample(sample_ckpt, sample_sched, sample_count, seed, sample_out,
                              sample_raw, threads);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_samples, eval_reference, eval_out);
        }
        if (ps_cmd->parsed()) {
            return cmd_pair_stats(ps_data, ps_n, ps_trials, ps_dim, seed, ps_out, threads);
        }
        if (sched_cmd->parsed()) {
            return cmd_schedule(sched_args);
        }
        if (traj_cmd->parsed()) {
            return cmd_traj(traj_ckpt, traj_oracle, traj_sched, traj_sampler, seed, traj_out);
        }
        if (dgt_cmd->parsed()) {
            json dataset_block;
            if (dgt_dataset_json) {
                dataset_block = read_json_file(*dgt_dataset_json);
            } else if (dgt_data_csv) {
                dataset_block = json{{"type", "csv"}, {"path", *dgt_data_csv}};
            } else {
                throw ValidationError("dg-train: need --data or --dataset-json");
            }
            return cmd_dg_train(dgt_ckpt, dataset_block, dgt_gen_count, dgt_use_aot, dgt_pairs,
                                dgt_minibatch, dgt_refreshes, dgt_lr, seed, dgt_sched, dgt_out,
                                threads);
        }
        if (dgs_cmd->parsed()) {
            return cmd_dg_sample(dgs_ckpt, dgs_disc, dgs_weight, dgs_sched, dgs_count, seed,
                                 dgs_out, threads);
        }
    } catch (const ValidationError& e) {
        std::cerr << json{{"error", "validation"}, {"message", e.what()}}.dump() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "runtime"}, {"message", e.what()}}.dump() << std::endl;
        return 3;
    }
    return 0;
}
