#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynfer/model.hpp"
#include "dynfer/offline_dp.hpp"

namespace dynfer {

// Two beliefs are one node iff they agree to this L-inf tolerance.
inline constexpr double kBeliefTol = 1e-9;
// Hash-bucket quantization step; strictly finer than kBeliefTol.
inline constexpr double kBeliefQuant = 1e-10;

// Predictive mass of observing quantity value y at observation x under b.
inline double predictive(const ParametricFamily& family, const Belief& b, int x, int y) {
    double total = 0.0;
    for (std::size_t w = 0; w < family.members.size(); ++w) {
        total += b.p[w] * family.members[w].t[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
    }
    return total;
}

/**
 * One Bayes step: b'[w] proportional to b[w] * member_w(y | x).
 *
 * Exact at point masses: a Dirac belief returns itself bit for bit. Zero
 * predictive mass means the pair cannot occur under any supported member and
 * raises ImpossibleObservation.
 */
inline Belief belief_update(const ParametricFamily& family, const Belief& b, int x, int y) {
    if (b.p.size() != family.members.size())
        throw std::invalid_argument("belief_update: belief length does not match family size");
    Belief out;
    out.p.assign(b.p.size(), 0.0);
    double norm = 0.0;
    for (std::size_t w = 0; w < b.p.size(); ++w) {
        const double mass =
            b.p[w] * family.members[w].t[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
        out.p[w] = mass;
        norm += mass;
    }
    if (norm <= 0.0)
        throw ImpossibleObservation("belief_update: observation (x=" + std::to_string(x) +
                                    ", y=" + std::to_string(y) + ") has zero predictive mass");
    for (double& v : out.p) v /= norm;
    return out;
}

// One belief the inference process can hold at the start of `round`.
struct BeliefNode {
    int id = 0;     // position within its round
    int round = 0;  // 0-based
    Belief belief;
};

/**
 * All beliefs reachable from the prior, round by round, with the transition
 * structure between them.
 *
 * next[i][node][x][y] is the id of the round i+1 node reached after (x, y),
 * or -1 where the pair has zero predictive mass at that node.
 */
struct BeliefGraph {
    std::vector<std::vector<BeliefNode>> rounds;
    std::vector<std::vector<std::vector<std::vector<int>>>> next;

    std::vector<int> node_counts() const {
        std::vector<int> out;
        out.reserve(rounds.size());
        for (const auto& r : rounds) out.push_back(static_cast<int>(r.size()));
        return out;
    }
};

namespace detail {

inline std::vector<long long> quantize_belief(const Belief& b) {
    std::vector<long long> key;
    key.reserve(b.p.size());
    for (double v : b.p) key.push_back(std::llround(v / kBeliefQuant));
    return key;
}

inline bool belief_close(const Belief& a, const Belief& b, double tol) {
    for (std::size_t w = 0; w < a.p.size(); ++w) {
        if (std::fabs(a.p[w] - b.p[w]) > tol) return false;
    }
    return true;
}

// Dedup index for one round. The quantized map is only an accelerator; on a
// bucket miss the stored nodes are scanned at the documented tolerance, so
// identity is always decided by the L-inf test.
struct NodeIndex {
    std::map<std::vector<long long>, int> buckets;

    int find_or_insert(std::vector<BeliefNode>& nodes, const Belief& b, int round,
                       long long node_cap) {
        auto key = quantize_belief(b);
        auto it = buckets.find(key);
        if (it != buckets.end()) return it->second;
        for (const auto& node : nodes) {
            if (belief_close(node.belief, b, kBeliefTol)) {
                buckets.emplace(std::move(key), node.id);
                return node.id;
            }
        }
        if (static_cast<long long>(nodes.size()) + 1 > node_cap) {
            throw CapExceeded("reachable_beliefs: node count at round " + std::to_string(round + 1) +
                                  " exceeds cap " + std::to_string(node_cap),
                              static_cast<double>(nodes.size()) + 1.0, round + 1);
        }
        const int id = static_cast<int>(nodes.size());
        nodes.push_back(BeliefNode{id, round, b});
        buckets.emplace(std::move(key), id);
        return id;
    }
};

}  // namespace detail

/**
 * Breadth-first enumeration of the exact belief set reachable from the
 * prior. Pairs with zero predictive mass are pruned (next id -1). Raises
 * CapExceeded naming the 1-based round once any round outgrows node_cap.
 */
inline BeliefGraph reachable_beliefs(const Scenario& s, long long node_cap = 1000000) {
    require_valid(s, "reachable_beliefs");
    if (!s.learning())
        throw std::invalid_argument("reachable_beliefs: scenario is not in learning mode");

    const int n = s.n();
    const int nx = s.nx();
    const int ny = s.ny();
    const ParametricFamily& fam = *s.family;

    BeliefGraph g;
    g.rounds.resize(static_cast<std::size_t>(n));
    g.next.resize(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
    g.rounds[0].push_back(BeliefNode{0, 0, *s.prior});

    for (int i = 0; i + 1 < n; ++i) {
        const auto& cur = g.rounds[static_cast<std::size_t>(i)];
        auto& nxt = g.rounds[static_cast<std::size_t>(i) + 1];
        g.next[static_cast<std::size_t>(i)].assign(
            cur.size(), std::vector<std::vector<int>>(
                            static_cast<std::size_t>(nx),
                            std::vector<int>(static_cast<std::size_t>(ny), -1)));
        detail::NodeIndex index;
        for (std::size_t id = 0; id < cur.size(); ++id) {
            const Belief& b = cur[id].belief;
            for (int x = 0; x < nx; ++x) {
                for (int y = 0; y < ny; ++y) {
                    if (predictive(fam, b, x, y) <= 0.0) continue;
                    Belief nb = belief_update(fam, b, x, y);
                    const int nid = index.find_or_insert(nxt, nb, i + 1, node_cap);
                    g.next[static_cast<std::size_t>(i)][id][static_cast<std::size_t>(x)]
                          [static_cast<std::size_t>(y)] = nid;
                }
            }
        }
    }
    return g;
}

/**
 * Belief-augmented backward-induction solution. Tables are indexed by
 * (round, belief node, observation); transitions live in `graph`.
 */
struct OnlinePolicy {
    BeliefGraph graph;
    std::vector<std::vector<std::vector<int>>> estimate;  // [round][node][x] -> yhat
    std::vector<Mat> value;                               // [round][node][x]
    std::vector<Cube> q;                                  // [round][node][x][yhat]
};

/**
 * Backward induction over the reachable-belief graph. The continuation of
 * q[i][node][x][yhat] averages over the next quantity value (moving the
 * belief) and the next observation (moved by the estimate):
 *
 *   q = mixture_loss(b, x, yhat)
 *       + sum_y predictive(b, x, y) * sum_x' K_i(x'|x, yhat) * value[i+1][next(b,x,y)][x'].
 */
inline OnlinePolicy solve_online(const Scenario& s, long long node_cap = 1000000) {
    require_valid(s, "solve_online");
    if (!s.learning()) throw std::invalid_argument("solve_online: scenario is not in learning mode");

    const int n = s.n();
    const int nx = s.nx();
    const int ny = s.ny();
    const int nyh = s.nyhat();
    const ParametricFamily& fam = *s.family;

    OnlinePolicy p;
    p.graph = reachable_beliefs(s, node_cap);
    p.estimate.resize(static_cast<std::size_t>(n));
    p.value.resize(static_cast<std::size_t>(n));
    p.q.resize(static_cast<std::size_t>(n));

    for (int i = n - 1; i >= 0; --i) {
        const auto& nodes = p.graph.rounds[static_cast<std::size_t>(i)];
        p.estimate[static_cast<std::size_t>(i)].assign(
            nodes.size(), std::vector<int>(static_cast<std::size_t>(nx), 0));
        p.value[static_cast<std::size_t>(i)].assign(nodes.size(),
                                                    Vec(static_cast<std::size_t>(nx), 0.0));
        p.q[static_cast<std::size_t>(i)].assign(
            nodes.size(), Mat(static_cast<std::size_t>(nx), Vec(static_cast<std::size_t>(nyh), 0.0)));

        const ObservationKernel* step = (i + 1 < n) ? &s.obs_kernel_for_transition(i) : nullptr;
        for (std::size_t node = 0; node < nodes.size(); ++node) {
            const Belief& b = nodes[node].belief;
            for (int x = 0; x < nx; ++x) {
                auto& qrow = p.q[static_cast<std::size_t>(i)][node][static_cast<std::size_t>(x)];
                for (int yh = 0; yh < nyh; ++yh) {
                    double acc = mixture_loss(fam, s.loss, b, x, yh);
                    if (step) {
                        const Vec& krow =
                            step->t[static_cast<std::size_t>(x)][static_cast<std::size_t>(yh)];
                        for (int y = 0; y < ny; ++y) {
                            const int nid = p.graph.next[static_cast<std::size_t>(i)][node]
                                                        [static_cast<std::size_t>(x)]
                                                        [static_cast<std::size_t>(y)];
                            if (nid < 0) continue;
                            const double m = predictive(fam, b, x, y);
                            const Vec& vnext = p.value[static_cast<std::size_t>(i) + 1]
                                                      [static_cast<std::size_t>(nid)];
                            double inner = 0.0;
                            for (int xn = 0; xn < nx; ++xn) {
                                inner += krow[static_cast<std::size_t>(xn)] *
                                         vnext[static_cast<std::size_t>(xn)];
                            }
                            acc += m * inner;
                        }
                    }
                    qrow[static_cast<std::size_t>(yh)] = acc;
                }
                int best = 0;
                for (int yh = 1; yh < nyh; ++yh) {
                    if (qrow[static_cast<std::size_t>(yh)] < qrow[static_cast<std::size_t>(best)])
                        best = yh;
                }
                p.estimate[static_cast<std::size_t>(i)][node][static_cast<std::size_t>(x)] = best;
                p.value[static_cast<std::size_t>(i)][node][static_cast<std::size_t>(x)] =
                    qrow[static_cast<std::size_t>(best)];
            }
        }
    }
    return p;
}

// Expected total loss from the root node, averaged over the initial draw.
inline double value_online(const Scenario& s, const OnlinePolicy& p) {
    if (p.value.empty() || p.value[0].empty() ||
        static_cast<int>(p.value[0][0].size()) != s.nx())
        throw std::invalid_argument("value_online: policy shape does not match scenario");
    double total = 0.0;
    for (int x = 0; x < s.nx(); ++x) {
        total += s.init.p[static_cast<std::size_t>(x)] * p.value[0][0][static_cast<std::size_t>(x)];
    }
    return total;
}

/**
 * Decision lookup for a live history. Folds belief_update over the observed
 * (x, y) pairs starting at the prior, locates the stored node for the
 * current round, and returns the table's estimate at (node, x_now) together
 * with the folded belief. A fold that matches no stored node means the
 * policy and scenario disagree; that is NodeNotFound, not a user error.
 */
inline std::pair<int, Belief> act_online(const Scenario& s, const OnlinePolicy& p,
                                         const std::vector<std::pair<int, int>>& history,
                                         int x_now) {
    if (!s.learning()) throw std::invalid_argument("act_online: scenario is not in learning mode");
    const int k = static_cast<int>(history.size());
    if (k >= s.n()) throw std::invalid_argument("act_online: history as long as the horizon");
    if (x_now < 0 || x_now >= s.nx()) throw std::invalid_argument("act_online: x_now out of range");

    Belief b = *s.prior;
    for (const auto& [x, y] : history) {
        if (x < 0 || x >= s.nx() || y < 0 || y >= s.ny())
            throw std::invalid_argument("act_online: history pair out of range");
        b = belief_update(*s.family, b, x, y);
    }

    const auto& nodes = p.graph.rounds[static_cast<std::size_t>(k)];
    for (const auto& node : nodes) {
        if (detail::belief_close(node.belief, b, kBeliefTol)) {
            return {p.estimate[static_cast<std::size_t>(k)][static_cast<std::size_t>(node.id)]
                              [static_cast<std::size_t>(x_now)],
                    b};
        }
    }
    throw NodeNotFound("act_online: folded belief matches no stored node at round " +
                       std::to_string(k + 1));
}

/**
 * Expected remaining loss from (round i, node, observation x) under p's
 * estimate tables, parameter weighted by the node's belief. Follows the
 * stored transition structure; never reads p.value.
 */
inline double loss_to_go_online(const Scenario& s, const OnlinePolicy& p, int i, int node, int x) {
    if (!s.family) throw std::invalid_argument("loss_to_go_online: scenario has no parametric family");
    if (i < 0 || i >= s.n() || x < 0 || x >= s.nx())
        throw std::invalid_argument("loss_to_go_online: round or observation out of range");
    if (node < 0 || node >= static_cast<int>(p.graph.rounds[static_cast<std::size_t>(i)].size()))
        throw std::invalid_argument("loss_to_go_online: node out of range");

    struct Walker {
        const Scenario& s;
        const OnlinePolicy& p;
        const QuantityKernel* member = nullptr;

        double go(int i, int node, int x) const {
            const int yhat = p.estimate[static_cast<std::size_t>(i)][static_cast<std::size_t>(node)]
                                       [static_cast<std::size_t>(x)];
            const auto& py = member->t[static_cast<std::size_t>(x)];
            const auto& lx = s.loss.t[static_cast<std::size_t>(x)];
            double r = 0.0;
            if (i + 1 == s.n()) {
                for (std::size_t y = 0; y < py.size(); ++y) {
                    r += py[y] * lx[y][static_cast<std::size_t>(yhat)];
                }
                return r;
            }
            const Vec& krow = s.obs_kernel_for_transition(i)
                                  .t[static_cast<std::size_t>(x)][static_cast<std::size_t>(yhat)];
            for (std::size_t y = 0; y < py.size(); ++y) {
                if (py[y] <= 0.0) continue;
                const int nid = p.graph.next[static_cast<std::size_t>(i)]
                                            [static_cast<std::size_t>(node)]
                                            [static_cast<std::size_t>(x)][y];
                if (nid < 0)
                    throw NodeNotFound(
                        "loss_to_go_online: stored graph prunes a branch the weighted member reaches");
                double cont = 0.0;
                for (int xn = 0; xn < s.nx(); ++xn) {
                    if (krow[static_cast<std::size_t>(xn)] > 0.0) {
                        cont += krow[static_cast<std::size_t>(xn)] * go(i + 1, nid, xn);
                    }
                }
                r += py[y] * (lx[y][static_cast<std::size_t>(yhat)] + cont);
            }
            return r;
        }
    };

    const Belief& b = p.graph.rounds[static_cast<std::size_t>(i)][static_cast<std::size_t>(node)].belief;
    Walker walk{s, p, nullptr};
    double total = 0.0;
    for (std::size_t w = 0; w < s.family->members.size(); ++w) {
        if (b.p[w] == 0.0) continue;
        walk.member = &s.family->members[w];
        total += b.p[w] * walk.go(i, node, x);
    }
    return total;
}

}  // namespace dynfer
