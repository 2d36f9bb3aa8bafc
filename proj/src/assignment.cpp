#include "aot/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace aot {

CostMatrix::CostMatrix(std::size_t n_, std::vector<double> costs_)
    : n(n_), costs(std::move(costs_)) {
    if (n == 0) {
        throw ValidationError("CostMatrix: n must be >= 1");
    }
    if (costs.size() != n * n) {
        throw ValidationError("CostMatrix: expected " + std::to_string(n * n) +
                              " entries, got " + std::to_string(costs.size()));
    }
    for (double c : costs) {
        if (!std::isfinite(c) || c < 0.0) {
            throw ValidationError("CostMatrix: entries must be finite and >= 0");
        }
    }
}

Assignment hungarian_solve(const CostMatrix& cost) {
    const int n = static_cast<int>(cost.n);
    const double* w = cost.costs.data();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // 1-based potentials/matching; column 0 is the virtual unmatched slot.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), char{0});
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            const double* row = w + static_cast<std::size_t>(i0 - 1) * n;
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Assignment result;
    result.permutation.assign(n, -1);
    for (int j = 1; j <= n; ++j) {
        result.permutation[match[j] - 1] = j - 1;
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += cost.at(i, result.permutation[i]);
    }
    result.total_cost = total;
    return result;
}

Assignment brute_force_solve(const CostMatrix& cost) {
    const std::size_t n = cost.n;
    if (n > 10) {
        throw ValidationError("brute_force_solve: n > 10 would enumerate " +
                              std::to_string(n) + "! permutations");
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += cost.at(i, perm[i]);
        }
        if (total < best_cost) {
            best_cost = total;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return Assignment{std::move(best), best_cost};
}

double assignment_cost(const CostMatrix& cost, const std::vector<int>& perm) {
    const std::size_t n = cost.n;
    if (perm.size() != n) {
        throw ValidationError("assignment_cost: permutation length " +
                              std::to_string(perm.size()) + " != n = " + std::to_string(n));
    }
    std::vector<char> seen(n, 0);
    for (int j : perm) {
        if (j < 0 || static_cast<std::size_t>(j) >= n || seen[j]) {
            throw ValidationError("assignment_cost: perm is not a bijection on {0.." +
                                  std::to_string(n - 1) + "}");
        }
        seen[j] = 1;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += cost.at(i, perm[i]);
    }
    return total;
}

}  // namespace aot
