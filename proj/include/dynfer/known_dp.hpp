#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dynfer/model.hpp"

namespace dynfer {

/**
 * Backward-induction solution for one scenario: per-round tables indexed by
 * the current observation.
 *
 * Invariants: estimate[i][x] is the lowest yhat minimizing q[i][x][.], and
 * value[i][x] is that minimum, bit for bit.
 */
struct KnownPolicy {
    std::vector<std::vector<int>> estimate;  // [round][x] -> yhat
    Mat value;                               // [round][x]
    Cube q;                                  // [round][x][yhat]
};

// Expected per-round loss with the hidden quantity integrated out under `k`.
inline double marginal_loss(const QuantityKernel& k, const LossTensor& loss, int x, int yhat) {
    const auto& py = k.t[static_cast<std::size_t>(x)];
    const auto& lx = loss.t[static_cast<std::size_t>(x)];
    double total = 0.0;
    for (std::size_t y = 0; y < py.size(); ++y) {
        total += py[y] * lx[y][static_cast<std::size_t>(yhat)];
    }
    return total;
}

inline double marginal_loss(const Scenario& s, int x, int yhat) {
    if (!s.quantity) throw std::invalid_argument("marginal_loss: scenario has no known quantity kernel");
    return marginal_loss(*s.quantity, s.loss, x, yhat);
}

namespace detail {

// Shared backward recursion. `base(x, yhat)` supplies the per-round expected
// loss; the continuation averages next-round values under the step kernel.
// Minima scan yhat ascending with strict improvement, so ties keep the
// lowest index and value[i][x] reuses the exact q entry.
template <class BaseLoss>
inline void solve_backward(const Scenario& s, BaseLoss&& base,
                           std::vector<std::vector<int>>& estimate, Mat& value, Cube& q) {
    const int n = s.n();
    const int nx = s.nx();
    const int nyh = s.nyhat();
    estimate.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(nx), 0));
    value.assign(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(nx), 0.0));
    q.assign(static_cast<std::size_t>(n), Mat(static_cast<std::size_t>(nx), Vec(static_cast<std::size_t>(nyh), 0.0)));

    for (int i = n - 1; i >= 0; --i) {
        const ObservationKernel* step = (i + 1 < n) ? &s.obs_kernel_for_transition(i) : nullptr;
        for (int x = 0; x < nx; ++x) {
            auto& qrow = q[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
            for (int yh = 0; yh < nyh; ++yh) {
                double acc = base(x, yh);
                if (step) {
                    const Vec& krow = step->t[static_cast<std::size_t>(x)][static_cast<std::size_t>(yh)];
                    const Vec& vnext = value[static_cast<std::size_t>(i) + 1];
                    for (int xn = 0; xn < nx; ++xn) {
                        acc += krow[static_cast<std::size_t>(xn)] * vnext[static_cast<std::size_t>(xn)];
                    }
                }
                qrow[static_cast<std::size_t>(yh)] = acc;
            }
            int best = 0;
            for (int yh = 1; yh < nyh; ++yh) {
                if (qrow[static_cast<std::size_t>(yh)] < qrow[static_cast<std::size_t>(best)]) best = yh;
            }
            estimate[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)] = best;
            value[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)] = qrow[static_cast<std::size_t>(best)];
        }
    }
}

}  // namespace detail

// Solves the known-model problem by backward induction over rounds.
inline KnownPolicy solve_known(const Scenario& s) {
    require_valid(s, "solve_known");
    if (s.learning()) throw std::invalid_argument("solve_known: scenario is in learning mode");
    KnownPolicy p;
    detail::solve_backward(
        s, [&s](int x, int yh) { return marginal_loss(*s.quantity, s.loss, x, yh); },
        p.estimate, p.value, p.q);
    return p;
}

// Expected total loss of the solved policy, averaged over the initial draw.
inline double value_known(const Scenario& s, const KnownPolicy& p) {
    if (p.value.empty() || static_cast<int>(p.value[0].size()) != s.nx())
        throw std::invalid_argument("value_known: policy shape does not match scenario");
    double total = 0.0;
    for (int x = 0; x < s.nx(); ++x) {
        total += s.init.p[static_cast<std::size_t>(x)] * p.value[0][static_cast<std::size_t>(x)];
    }
    return total;
}

/**
 * Expected remaining loss from (round i, observation x) when the estimate
 * tables of `p` are followed. Evaluated by exact recursive enumeration of the
 * remaining trajectory space; never reads p.value, so it prices perturbed
 * tables too.
 */
inline double loss_to_go_known(const Scenario& s, const KnownPolicy& p, int i, int x) {
    if (!s.quantity) throw std::invalid_argument("loss_to_go_known: scenario has no known quantity kernel");
    if (i < 0 || i >= s.n() || x < 0 || x >= s.nx())
        throw std::invalid_argument("loss_to_go_known: round or observation out of range");

    struct Walker {
        const Scenario& s;
        const std::vector<std::vector<int>>& est;

        double go(int i, int x) const {
            const int yhat = est[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
            double r = marginal_loss(*s.quantity, s.loss, x, yhat);
            if (i + 1 < s.n()) {
                const Vec& krow = s.obs_kernel_for_transition(i)
                                      .t[static_cast<std::size_t>(x)][static_cast<std::size_t>(yhat)];
                for (int xn = 0; xn < s.nx(); ++xn) {
                    if (krow[static_cast<std::size_t>(xn)] > 0.0) {
                        r += krow[static_cast<std::size_t>(xn)] * go(i + 1, xn);
                    }
                }
            }
            return r;
        }
    };
    return Walker{s, p.estimate}.go(i, x);
}

}  // namespace dynfer
