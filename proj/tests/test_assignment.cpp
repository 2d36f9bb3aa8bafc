#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "aot/assignment.hpp"
#include "aot/common.hpp"

using namespace aot;

namespace {

CostMatrix random_matrix(std::size_t n, Rng& rng, double scale = 10.0) {
    std::vector<double> costs(n * n);
    for (auto& c : costs) c = scale * rng.uniform01();
    return CostMatrix(n, std::move(costs));
}

bool is_bijection(const std::vector<int>& perm) {
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != static_cast<int>(i)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("zero diagonal and zero anti-diagonal") {
    const CostMatrix diag(2, {0, 1, 1, 0});
    const Assignment a = hungarian_solve(diag);
    CHECK(a.permutation == std::vector<int>{0, 1});
    CHECK(a.total_cost == 0.0);

    const CostMatrix anti(2, {1, 0, 0, 1});
    const Assignment b = hungarian_solve(anti);
    CHECK(b.permutation == std::vector<int>{1, 0});
    CHECK(b.total_cost == 0.0);
}

TEST_CASE("1x1 degenerate instance") {
    const CostMatrix m(1, {7.0});
    const Assignment brute = brute_force_solve(m);
    CHECK(brute.permutation == std::vector<int>{0});
    CHECK(brute.total_cost == 7.0);
    const Assignment fast = hungarian_solve(m);
    CHECK(fast.permutation == std::vector<int>{0});
    CHECK(fast.total_cost == 7.0);
}

TEST_CASE("seeded 5x5 matches exhaustive enumeration") {
    Rng rng(42);
    const CostMatrix m = random_matrix(5, rng);
    const Assignment fast = hungarian_solve(m);
    const Assignment brute = brute_force_solve(m);
    CHECK(fast.total_cost == doctest::Approx(brute.total_cost).epsilon(1e-12));
}

TEST_CASE("optimality vs oracle across sizes and seeds") {
    for (std::size_t n = 2; n <= 7; ++n) {
        Rng rng(1000 + n);
        for (int trial = 0; trial < 40; ++trial) {
            const CostMatrix m = random_matrix(n, rng);
            const Assignment fast = hungarian_solve(m);
            const Assignment brute = brute_force_solve(m);
            REQUIRE(is_bijection(fast.permutation));
            // uniform random costs make ties measure-zero: exact equality
            REQUIRE(fast.total_cost == doctest::Approx(brute.total_cost).epsilon(1e-12));
        }
    }
}

TEST_CASE("dominance over random permutations") {
    Rng rng(7);
    const std::size_t n = 23;
    const CostMatrix m = random_matrix(n, rng);
    const Assignment fast = hungarian_solve(m);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 500; ++trial) {
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(perm[i], perm[rng.below(i + 1)]);
        }
        CHECK(fast.total_cost <= assignment_cost(m, perm) + 1e-12);
    }
}

TEST_CASE("brute force dominates random sampling on 7x7") {
    Rng rng(99);
    const CostMatrix m = random_matrix(7, rng);
    const Assignment brute = brute_force_solve(m);
    std::vector<int> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 1000; ++trial) {
        for (std::size_t i = 6; i > 0; --i) {
            std::swap(perm[i], perm[rng.below(i + 1)]);
        }
        CHECK(brute.total_cost <= assignment_cost(m, perm) + 1e-12);
    }
}

TEST_CASE("row shift leaves the argmin optimal") {
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const CostMatrix m = random_matrix(6, rng);
        const Assignment base = hungarian_solve(m);

        CostMatrix shifted = m;
        const double c = 3.25;
        const std::size_t row = trial % 6;
        for (std::size_t j = 0; j < 6; ++j) shifted.at(row, j) += c;

        const Assignment after = hungarian_solve(shifted);
        CHECK(after.total_cost == doctest::Approx(base.total_cost + c).epsilon(1e-12));
        // the shifted optimum must also be optimal for the original costs
        CHECK(assignment_cost(m, after.permutation) ==
              doctest::Approx(base.total_cost).epsilon(1e-12));
    }
}

TEST_CASE("scale equivariance") {
    Rng rng(77);
    const CostMatrix m = random_matrix(9, rng);
    const double base = hungarian_solve(m).total_cost;
    for (double alpha : {0.25, 3.0, 1e6}) {
        CostMatrix scaled = m;
        for (auto& c : scaled.costs) c *= alpha;
        CHECK(hungarian_solve(scaled).total_cost ==
              doctest::Approx(alpha * base).epsilon(1e-12));
    }
}

TEST_CASE("determinism for fixed input") {
    Rng rng(5);
    const CostMatrix m = random_matrix(12, rng);
    const Assignment a = hungarian_solve(m);
    const Assignment b = hungarian_solve(m);
    CHECK(a.permutation == b.permutation);
    CHECK(a.total_cost == b.total_cost);
}

TEST_CASE("assignment_cost examples and validation") {
    const CostMatrix m(2, {0, 1, 1, 0});
    CHECK(assignment_cost(m, {0, 1}) == 0.0);
    CHECK(assignment_cost(m, {1, 0}) == 2.0);
    const Assignment opt = hungarian_solve(m);
    CHECK(assignment_cost(m, opt.permutation) == opt.total_cost);

    CHECK_THROWS_AS(assignment_cost(m, {0, 0}), ValidationError);
    CHECK_THROWS_AS(assignment_cost(m, {0}), ValidationError);
    CHECK_THROWS_AS(assignment_cost(m, {0, 2}), ValidationError);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(CostMatrix(0, {}), ValidationError);
    CHECK_THROWS_AS(CostMatrix(2, {1, 2, 3}), ValidationError);
    CHECK_THROWS_AS(CostMatrix(2, {1, 2, 3, -0.5}), ValidationError);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(CostMatrix(2, {1, 2, 3, inf}), ValidationError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(CostMatrix(2, {1, 2, 3, nan}), ValidationError);

    Rng rng(1);
    CHECK_THROWS_AS(brute_force_solve(random_matrix(11, rng)), ValidationError);
}
