#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynfer/known_dp.hpp"
#include "dynfer/model.hpp"

namespace dynfer {

// Tables solved against one fixed belief over the parameter set. Shape and
// invariants match KnownPolicy; `belief` records what the tables price.
struct OfflinePolicy {
    Belief belief;
    std::vector<std::vector<int>> estimate;  // [round][x] -> yhat
    Mat value;                               // [round][x]
    Cube q;                                  // [round][x][yhat]
};

/**
 * Bayes posterior over family members after observing `d`.
 *
 * Likelihoods accumulate in log space with a max shift before
 * exponentiation, so long datasets cannot underflow. Pairs whose likelihood
 * is exactly zero under some member knock that member out. An empty dataset
 * returns the prior untouched.
 */
inline Belief posterior_from_dataset(const ParametricFamily& family, const Belief& prior,
                                     const Dataset& d) {
    const int nw = family.param_count();
    if (nw == 0) throw std::invalid_argument("posterior_from_dataset: empty family");
    if (static_cast<int>(prior.p.size()) != nw)
        throw std::invalid_argument("posterior_from_dataset: prior length does not match family size");
    if (d.pairs.empty()) return prior;

    const double neg_inf = -std::numeric_limits<double>::infinity();
    Vec loglik(static_cast<std::size_t>(nw), 0.0);
    for (int w = 0; w < nw; ++w) {
        if (prior.p[static_cast<std::size_t>(w)] <= 0.0) {
            loglik[static_cast<std::size_t>(w)] = neg_inf;
            continue;
        }
        const Mat& t = family.members[static_cast<std::size_t>(w)].t;
        double acc = 0.0;
        for (const auto& [x, y] : d.pairs) {
            if (x < 0 || x >= static_cast<int>(t.size()) || y < 0 ||
                y >= static_cast<int>(t[static_cast<std::size_t>(x)].size()))
                throw std::invalid_argument("posterior_from_dataset: pair index out of range");
            const double p = t[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
            if (p <= 0.0) {
                acc = neg_inf;
                break;
            }
            acc += std::log(p);
        }
        loglik[static_cast<std::size_t>(w)] = acc;
    }

    double shift = neg_inf;
    for (int w = 0; w < nw; ++w) shift = std::max(shift, loglik[static_cast<std::size_t>(w)]);
    if (shift == neg_inf)
        throw ImpossibleDataset(
            "posterior_from_dataset: every member the prior supports assigns zero likelihood");

    Belief post;
    post.p.assign(static_cast<std::size_t>(nw), 0.0);
    double norm = 0.0;
    for (int w = 0; w < nw; ++w) {
        const double ll = loglik[static_cast<std::size_t>(w)];
        const double mass =
            (ll == neg_inf) ? 0.0 : prior.p[static_cast<std::size_t>(w)] * std::exp(ll - shift);
        post.p[static_cast<std::size_t>(w)] = mass;
        norm += mass;
    }
    for (double& v : post.p) v /= norm;
    return post;
}

/**
 * Expected per-round loss with both the parameter and the hidden quantity
 * integrated out: sum_w sum_y belief[w] * member_w(y|x) * loss(x, y, yhat).
 * Point-mass beliefs reproduce marginal_loss of the selected member exactly
 * (zero-weight members contribute exact zeros in order).
 */
inline double mixture_loss(const ParametricFamily& family, const LossTensor& loss,
                           const Belief& belief, int x, int yhat) {
    if (belief.p.size() != family.members.size())
        throw std::invalid_argument("mixture_loss: belief length does not match family size");
    const auto& lx = loss.t[static_cast<std::size_t>(x)];
    double total = 0.0;
    for (std::size_t w = 0; w < family.members.size(); ++w) {
        const double bw = belief.p[w];
        const auto& py = family.members[w].t[static_cast<std::size_t>(x)];
        for (std::size_t y = 0; y < py.size(); ++y) {
            total += bw * py[y] * lx[y][static_cast<std::size_t>(yhat)];
        }
    }
    return total;
}

inline double mixture_loss(const Scenario& s, const Belief& belief, int x, int yhat) {
    if (!s.family) throw std::invalid_argument("mixture_loss: scenario has no parametric family");
    return mixture_loss(*s.family, s.loss, belief, x, yhat);
}

/**
 * Backward induction at one fixed belief. The belief never moves during the
 * recursion: training data is fixed before inference starts, so only the
 * observation transitions enter the continuation.
 */
inline OfflinePolicy solve_offline(const Scenario& s, const Belief& belief) {
    require_valid(s, "solve_offline");
    if (!s.learning()) throw std::invalid_argument("solve_offline: scenario is not in learning mode");
    if (belief.p.size() != s.family->members.size())
        throw std::invalid_argument("solve_offline: belief length does not match family size");
    for (double v : belief.p) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("solve_offline: belief entries must be finite and nonnegative");
    }

    OfflinePolicy p;
    p.belief = belief;
    detail::solve_backward(
        s, [&s, &belief](int x, int yh) { return mixture_loss(*s.family, s.loss, belief, x, yh); },
        p.estimate, p.value, p.q);
    return p;
}

// Posterior update followed by the fixed-belief solve.
inline OfflinePolicy offline_pipeline(const Scenario& s, const Dataset& d) {
    require_valid(s, "offline_pipeline");
    if (!s.learning()) throw std::invalid_argument("offline_pipeline: scenario is not in learning mode");
    return solve_offline(s, posterior_from_dataset(*s.family, *s.prior, d));
}

// Expected total loss of the solved tables at their belief.
inline double value_offline(const Scenario& s, const OfflinePolicy& p) {
    if (p.value.empty() || static_cast<int>(p.value[0].size()) != s.nx())
        throw std::invalid_argument("value_offline: policy shape does not match scenario");
    double total = 0.0;
    for (int x = 0; x < s.nx(); ++x) {
        total += s.init.p[static_cast<std::size_t>(x)] * p.value[0][static_cast<std::size_t>(x)];
    }
    return total;
}

/**
 * Expected remaining loss from (round i, observation x) under p's estimate
 * tables, with the parameter weighted by p.belief. Exact enumeration of the
 * remaining (parameter, trajectory) space; never reads p.value, so perturbed
 * tables price correctly. For the tables solve_offline returns this equals
 * value[i][x] up to roundoff; for any other tables it can only be larger.
 */
inline double loss_to_go_offline(const Scenario& s, const OfflinePolicy& p, int i, int x) {
    if (!s.family) throw std::invalid_argument("loss_to_go_offline: scenario has no parametric family");
    if (i < 0 || i >= s.n() || x < 0 || x >= s.nx())
        throw std::invalid_argument("loss_to_go_offline: round or observation out of range");
    if (p.belief.p.size() != s.family->members.size())
        throw std::invalid_argument("loss_to_go_offline: belief length does not match family size");

    struct Walker {
        const Scenario& s;
        const std::vector<std::vector<int>>& est;
        const QuantityKernel* member = nullptr;

        double go(int i, int x) const {
            const int yhat = est[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
            double r = marginal_loss(*member, s.loss, x, yhat);
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

    Walker walk{s, p.estimate, nullptr};
    double total = 0.0;
    for (std::size_t w = 0; w < s.family->members.size(); ++w) {
        const double bw = p.belief.p[w];
        if (bw == 0.0) continue;
        walk.member = &s.family->members[w];
        total += bw * walk.go(i, x);
    }
    return total;
}

}  // namespace dynfer
