#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "aot/data.hpp"

using namespace aot;

namespace {

PointSet means_2d(std::initializer_list<std::pair<double, double>> pts) {
    PointSet out(pts.size(), 2);
    std::size_t i = 0;
    for (const auto& [x, y] : pts) {
        out.row(i)[0] = x;
        out.row(i)[1] = y;
        ++i;
    }
    return out;
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/aot_data_test_") + name;
}

}  // namespace

TEST_CASE("single tight mode collapses onto its mean") {
    Rng rng(1);
    const Dataset ds = make_mixture(means_2d({{2.0, 1.0}}), 1e-9, 50, rng);
    for (std::size_t i = 0; i < ds.points.count; ++i) {
        CHECK(ds.points.row(i)[0] == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(ds.points.row(i)[1] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(ds.labels[i] == 0);
    }
}

TEST_CASE("two-mode proportions within binomial bound") {
    Rng rng(2);
    const std::size_t count = 10000;
    const Dataset ds = make_mixture(means_2d({{2.0, 0.0}, {-2.0, 0.0}}), 0.25, count, rng);
    std::size_t mode0 = 0;
    for (std::size_t i = 0; i < count; ++i) {
        REQUIRE(ds.labels[i] >= 0);
        REQUIRE(ds.labels[i] < 2);
        if (ds.labels[i] == 0) ++mode0;
        // label integrity: the point sits near its generating mode
        const double expected_x = ds.labels[i] == 0 ? 2.0 : -2.0;
        CHECK(std::abs(ds.points.row(i)[0] - expected_x) < 2.0);
    }
    const double frac = static_cast<double>(mode0) / count;
    CHECK(frac > 0.47);
    CHECK(frac < 0.53);
}

TEST_CASE("generators are seed deterministic") {
    Rng a(42), b(42);
    const Dataset da = make_mixture(means_2d({{0, 0}, {1, 1}}), 0.5, 256, a);
    const Dataset db = make_mixture(means_2d({{0, 0}, {1, 1}}), 0.5, 256, b);
    CHECK(da.points.values == db.points.values);
    CHECK(da.labels == db.labels);

    Rng c(7), d(7);
    CHECK(make_ring(2.0, 0.1, 64, c).points.values == make_ring(2.0, 0.1, 64, d).points.values);

    Rng e(9), f(9);
    CHECK(make_checkerboard(64, e).points.values == make_checkerboard(64, f).points.values);
}

TEST_CASE("ring radius concentration") {
    Rng rng(3);
    const Dataset ds = make_ring(2.0, 1e-9, 128, rng);
    for (std::size_t i = 0; i < ds.points.count; ++i) {
        const double r = std::hypot(ds.points.row(i)[0], ds.points.row(i)[1]);
        CHECK(r == doctest::Approx(2.0).epsilon(1e-6));
    }
}

TEST_CASE("checkerboard points land on dark cells only") {
    Rng rng(4);
    const Dataset ds = make_checkerboard(2000, rng);
    for (std::size_t i = 0; i < ds.points.count; ++i) {
        const double x = ds.points.row(i)[0];
        const double y = ds.points.row(i)[1];
        CHECK(x >= -2.0);
        CHECK(x < 2.0);
        CHECK(y >= -2.0);
        CHECK(y < 2.0);
        const int cx = static_cast<int>(std::floor(x + 2.0));
        const int cy = static_cast<int>(std::floor(y + 2.0));
        CHECK((cx + cy) % 2 == 0);
    }
}

TEST_CASE("csv round trip preserves exact values and labels") {
    Rng rng(5);
    const Dataset ds = make_mixture(means_2d({{0.3, -0.7}, {1.5, 2.5}}), 0.8, 37, rng);
    const std::string path = temp_path("roundtrip.csv");
    save_csv(path, ds.points, ds.labels);
    const Dataset back = load_csv(path);
    CHECK(back.points.values == ds.points.values);
    CHECK(back.labels == ds.labels);
    CHECK(back.class_count == 2);
    std::remove(path.c_str());
}

TEST_CASE("csv error reporting") {
    const std::string missing = temp_path("nope.csv");
    CHECK_THROWS_AS(load_csv(missing), RuntimeError);

    const std::string empty = temp_path("empty.csv");
    { std::ofstream out(empty); }
    CHECK_THROWS_AS(load_csv(empty), RuntimeError);
    std::remove(empty.c_str());

    const std::string bad = temp_path("bad.csv");
    {
        std::ofstream out(bad);
        out << "x0,x1\n1.0,2.0\noops,3.0\n";
    }
    try {
        load_csv(bad);
        FAIL("expected error");
    } catch (const RuntimeError& e) {
        // malformed row reported with its line number
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    std::remove(bad.c_str());
}

TEST_CASE("normalization hits the target std and inverts") {
    Rng rng(6);
    const Dataset ds = make_mixture(means_2d({{4.0, -1.0}, {-4.0, 3.0}}), 1.3, 4096, rng);
    const Dataset normed = normalize(ds, 0.5);

    for (std::size_t k = 0; k < 2; ++k) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < normed.points.count; ++i) {
            mean += normed.points.row(i)[k];
        }
        mean /= normed.points.count;
        for (std::size_t i = 0; i < normed.points.count; ++i) {
            const double dev = normed.points.row(i)[k] - mean;
            var += dev * dev;
        }
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::sqrt(var / normed.points.count) == doctest::Approx(0.5).epsilon(1e-6));
    }

    const PointSet restored = denormalize(normed.points, normed.norm);
    for (std::size_t i = 0; i < ds.points.count; ++i) {
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(restored.row(i)[k] ==
                  doctest::Approx(ds.points.row(i)[k]).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(normalize(ds, 0.0), ValidationError);
}
