#pragma once

// Shared test fixtures. Random instances use strictly positive probability
// rows so every history has positive mass and every posterior stays
// interior; that makes brute-force argmins comparable to solver tables
// cell by cell, not just in value.

#include <random>
#include <string>
#include <vector>

#include "dynfer/dynfer.hpp"

namespace testutil {

inline dynfer::Vec random_row(std::mt19937_64& g, int len) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    dynfer::Vec row(static_cast<std::size_t>(len));
    double sum = 0.0;
    for (auto& v : row) {
        v = u(g);
        sum += v;
    }
    for (auto& v : row) v /= sum;
    return row;
}

inline dynfer::Mat random_rows(std::mt19937_64& g, int rows, int len) {
    dynfer::Mat m;
    for (int r = 0; r < rows; ++r) m.push_back(random_row(g, len));
    return m;
}

inline dynfer::Cube random_kernel(std::mt19937_64& g, int nx, int nyhat) {
    dynfer::Cube c;
    for (int x = 0; x < nx; ++x) c.push_back(random_rows(g, nyhat, nx));
    return c;
}

inline dynfer::Cube random_loss(std::mt19937_64& g, int nx, int ny, int nyhat) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    dynfer::Cube c(static_cast<std::size_t>(nx));
    for (auto& plane : c) {
        plane.resize(static_cast<std::size_t>(ny));
        for (auto& row : plane) {
            row.resize(static_cast<std::size_t>(nyhat));
            for (auto& v : row) v = u(g);
        }
    }
    return c;
}

inline dynfer::Scenario random_known_scenario(std::uint64_t seed, int nx, int ny, int nyhat,
                                              int n, bool shared = true) {
    std::mt19937_64 g(seed);
    dynfer::Scenario s;
    s.x_space.size = nx;
    s.y_space.size = ny;
    s.yhat_space.size = nyhat;
    s.horizon = n;
    s.init.p = random_row(g, nx);
    s.shared_kernel = shared;
    const int kernel_count = shared ? 1 : n - 1;
    for (int k = 0; k < kernel_count; ++k)
        s.obs_kernels.push_back(dynfer::ObservationKernel{random_kernel(g, nx, nyhat)});
    s.quantity = dynfer::QuantityKernel{random_rows(g, nx, ny)};
    s.loss = dynfer::LossTensor{random_loss(g, nx, ny, nyhat)};
    return s;
}

inline dynfer::Scenario random_learning_scenario(std::uint64_t seed, int nx, int ny, int nyhat,
                                                 int n, int nw, bool shared = true) {
    std::mt19937_64 g(seed);
    dynfer::Scenario s;
    s.x_space.size = nx;
    s.y_space.size = ny;
    s.yhat_space.size = nyhat;
    s.horizon = n;
    s.init.p = random_row(g, nx);
    s.shared_kernel = shared;
    const int kernel_count = shared ? 1 : n - 1;
    for (int k = 0; k < kernel_count; ++k)
        s.obs_kernels.push_back(dynfer::ObservationKernel{random_kernel(g, nx, nyhat)});
    dynfer::ParametricFamily fam;
    for (int w = 0; w < nw; ++w)
        fam.members.push_back(dynfer::QuantityKernel{random_rows(g, nx, ny)});
    s.family = std::move(fam);
    s.prior = dynfer::Belief{random_row(g, nw)};
    s.loss = dynfer::LossTensor{random_loss(g, nx, ny, nyhat)};
    return s;
}

// Fills a zero table with seeded uniform estimates.
inline dynfer::oracle::StrategyTable random_strategy(const dynfer::Scenario& s,
                                                     dynfer::oracle::StrategyClass cls,
                                                     std::uint64_t seed) {
    auto t = dynfer::oracle::make_strategy(s, cls);
    std::mt19937_64 g(seed);
    std::uniform_int_distribution<int> pick(0, s.nyhat() - 1);
    for (auto& round : t.entries)
        for (auto& cell : round) cell = pick(g);
    return t;
}

}  // namespace testutil
