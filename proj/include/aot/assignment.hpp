#pragma once

#include <cstddef>
#include <vector>

#include "aot/common.hpp"

namespace aot {

// Square matrix of pairing costs; entry (i, j) is the cost of assigning
// column item j to row item i. Entries must be finite and non-negative.
struct CostMatrix {
    std::size_t n = 0;
    std::vector<double> costs;  // row-major n x n

    CostMatrix() = default;
    CostMatrix(std::size_t n_, std::vector<double> costs_);

    double at(std::size_t i, std::size_t j) const { return costs[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return costs[i * n + j]; }
};

// A bijection row -> column together with its total cost.
struct Assignment {
    std::vector<int> permutation;
    double total_cost = 0.0;
};

// Kuhn-Munkres via shortest augmenting paths with row/column potentials,
// O(n^3). Deterministic: rows are inserted in index order and column scans
// run in index order, so ties always resolve the same way.
Assignment hungarian_solve(const CostMatrix& cost);

// Exhaustive minimum over all n! permutations. Test oracle; refuses n > 10.
Assignment brute_force_solve(const CostMatrix& cost);

// Total cost of a given permutation; validates that perm is a bijection.
double assignment_cost(const CostMatrix& cost, const std::vector<int>& perm);

}  // namespace aot
