#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "aot/data.hpp"

using namespace aot;

namespace {

const std::string kCli = AOT_CLI_PATH;
const std::string kDir = "/tmp/aot_cli_test";

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >" + kDir + "/stdout.txt 2>" + kDir +
                            "/stderr.txt";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string last_stdout() { return slurp(kDir + "/stdout.txt"); }
std::string last_stderr() { return slurp(kDir + "/stderr.txt"); }

bool same_bytes(const std::string& a, const std::string& b) {
    return slurp(a) == slurp(b);
}

void write_train_config(const std::string& path) {
    std::ofstream out(path);
    out << R"({
  "pairs": 32, "minibatch": 16, "pairing": "aot", "refreshes": 15,
  "hidden": [12, 12], "embed_frequencies": 4, "seed": 7,
  "dataset": {"type": "mixture", "means": [[2,0],[-2,0]], "std": 0.25,
              "count": 256, "normalize_std": 0.5}
})";
}

struct Setup {
    Setup() { std::system(("mkdir -p " + kDir).c_str()); }
};
const Setup setup;

}  // namespace

TEST_CASE("schedule prints the warped grid with terminal zero") {
    REQUIRE(run("schedule --steps 2 --rho 7 --sigma-min 0.002 --sigma-max 80") == 0);
    std::stringstream ss(last_stdout());
    std::string line;
    REQUIRE(std::getline(ss, line));
    CHECK(line == "step,sigma");
    const double expected[3] = {80.0, 0.002, 0.0};
    for (int i = 0; i < 3; ++i) {
        REQUIRE(std::getline(ss, line));
        const auto comma = line.find(',');
        CHECK(std::stoi(line.substr(0, comma)) == i);
        // 17-digit output parses back to the exact double
        CHECK(std::stod(line.substr(comma + 1)) == expected[i]);
    }
}

TEST_CASE("validation failures exit with code 2 and a machine-readable line") {
    CHECK(run("schedule --steps 1") == 2);
    CHECK(last_stderr().find("\"error\":\"validation\"") != std::string::npos);
}

TEST_CASE("runtime failures exit with code 3") {
    CHECK(run("sample --checkpoint /tmp/aot_missing_ckpt.json --count 1 --out " + kDir +
              "/x.csv") == 3);
    CHECK(last_stderr().find("\"error\":\"runtime\"") != std::string::npos);
}

TEST_CASE("train, sample, eval pipeline with byte-identical replays") {
    const std::string cfg = kDir + "/cfg.json";
    write_train_config(cfg);

    REQUIRE(run("train --config " + cfg + " --out " + kDir + "/m1.json --log " + kDir +
                "/log1.csv") == 0);
    REQUIRE(run("train --config " + cfg + " --out " + kDir + "/m2.json --log " + kDir +
                "/log2.csv") == 0);
    CHECK(same_bytes(kDir + "/m1.json", kDir + "/m2.json"));

    // manifest written alongside the checkpoint
    CHECK(slurp(kDir + "/m1.json.manifest.json").find("\"command\": \"train\"") !=
          std::string::npos);

    REQUIRE(run("--seed 5 sample --checkpoint " + kDir + "/m1.json --steps 8 --count 32 "
                "--out " + kDir + "/s1.csv") == 0);
    REQUIRE(run("--seed 5 sample --checkpoint " + kDir + "/m1.json --steps 8 --count 32 "
                "--out " + kDir + "/s2.csv") == 0);
    CHECK(same_bytes(kDir + "/s1.csv", kDir + "/s2.csv"));

    // a different seed must change the samples
    REQUIRE(run("--seed 6 sample --checkpoint " + kDir + "/m1.json --steps 8 --count 32 "
                "--out " + kDir + "/s3.csv") == 0);
    CHECK(!same_bytes(kDir + "/s1.csv", kDir + "/s3.csv"));

    // samples CSV round-trips through the loader
    const Dataset samples = load_csv(kDir + "/s1.csv");
    CHECK(samples.points.count == 32);
    CHECK(samples.points.dim == 2);

    // so does the training log
    const Dataset log = load_csv(kDir + "/log1.csv");
    CHECK(log.points.count == 15);
    CHECK(log.points.dim == 4);

    // AOT_SEED is the --seed fallback
    REQUIRE(std::system(("AOT_SEED=5 " + kCli + " sample --checkpoint " + kDir +
                         "/m1.json --steps 8 --count 32 --out " + kDir +
                         "/s_env.csv >/dev/null 2>&1")
                            .c_str()) == 0);
    CHECK(same_bytes(kDir + "/s1.csv", kDir + "/s_env.csv"));

    // eval of samples against themselves is exactly zero
    REQUIRE(run("eval --samples " + kDir + "/s1.csv --reference " + kDir + "/s2.csv --out " +
                kDir + "/metrics.json") == 0);
    CHECK(last_stdout().find("\"w2\": 0.0") != std::string::npos);
}

TEST_CASE("threaded sampling is bit-identical to serial") {
    const std::string cfg = kDir + "/cfg.json";
    write_train_config(cfg);
    REQUIRE(run("train --config " + cfg + " --out " + kDir + "/mt.json") == 0);
    REQUIRE(run("--seed 9 sample --checkpoint " + kDir + "/mt.json --steps 6 --count 17 "
                "--out " + kDir + "/serial.csv") == 0);
    REQUIRE(run("--seed 9 --threads 2 sample --checkpoint " + kDir + "/mt.json --steps 6 "
                "--count 17 --out " + kDir + "/threaded.csv") == 0);
    CHECK(same_bytes(kDir + "/serial.csv", kDir + "/threaded.csv"));
}

TEST_CASE("pair-stats reports the AOT cost advantage") {
    REQUIRE(run("--seed 3 pair-stats --n 64 --trials 25 --out " + kDir + "/ps.csv") == 0);
    const Dataset table = load_csv(kDir + "/ps.csv");
    REQUIRE(table.points.count == 25);
    REQUIRE(table.points.dim == 3);  // trial, aot, independent
    double aot_mean = 0.0, ind_mean = 0.0;
    for (std::size_t i = 0; i < table.points.count; ++i) {
        aot_mean += table.points.row(i)[1];
        ind_mean += table.points.row(i)[2];
    }
    CHECK(aot_mean < ind_mean);
}

TEST_CASE("traj writes a loadable trajectory and curvature report") {
    REQUIRE(run("--seed 11 traj --oracle gaussian:0,0:1 --steps 12 --out " + kDir +
                "/traj") == 0);
    const Dataset table = load_csv(kDir + "/traj.csv");
    CHECK(table.points.count == 13);  // n nodes + terminal
    CHECK(table.points.dim == 6);     // step, sigma, x0, x1, x0_hat0, x0_hat1
    const std::string report = slurp(kDir + "/traj.curvature.json");
    CHECK(report.find("tangent_curvature") != std::string::npos);
    CHECK(report.find("x0_drift") != std::string::npos);
    const Dataset per_step = load_csv(kDir + "/traj.curvature.csv");
    CHECK(per_step.points.count == 11);  // n - 1 interior tangent pairs
    CHECK(per_step.points.dim == 4);     // step, sigma, turn, x0_step

    CHECK(run("traj --oracle bogus:1 --out " + kDir + "/bad") == 2);
    CHECK(run("traj --out " + kDir + "/bad") == 2);
}

TEST_CASE("guidance workflow end to end") {
    const std::string cfg = kDir + "/cfg.json";
    write_train_config(cfg);
    REQUIRE(run("train --config " + cfg + " --out " + kDir + "/base.json") == 0);

    // tiny discriminator training against model samples
    std::ofstream(kDir + "/real_spec.json")
        << R"({"type": "mixture", "means": [[2,0],[-2,0]], "std": 0.25,
              "count": 256, "normalize_std": 0.5})";
    REQUIRE(run("--seed 13 dg-train --checkpoint " + kDir + "/base.json --dataset-json " +
                kDir + "/real_spec.json --gen-count 128 --pairs 32 --minibatch 16 "
                "--refreshes 4 --steps 6 --use-aot --out " + kDir + "/disc.json") == 0);

    REQUIRE(run("--seed 14 dg-sample --checkpoint " + kDir + "/base.json --disc " + kDir +
                "/disc.json --weight 0 --steps 6 --count 8 --out " + kDir +
                "/guided0.csv") == 0);
    REQUIRE(run("--seed 14 sample --checkpoint " + kDir + "/base.json --steps 6 --count 8 "
                "--out " + kDir + "/plain.csv") == 0);
    // w = 0 guidance reproduces plain sampling byte for byte
    CHECK(same_bytes(kDir + "/guided0.csv", kDir + "/plain.csv"));

    REQUIRE(run("--seed 14 dg-sample --checkpoint " + kDir + "/base.json --disc " + kDir +
                "/disc.json --weight 0.2 --steps 6 --count 8 --out " + kDir +
                "/guided.csv") == 0);
    CHECK(!same_bytes(kDir + "/guided.csv", kDir + "/plain.csv"));
}
