#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynfer/known_dp.hpp"
#include "dynfer/model.hpp"
#include "dynfer/offline_dp.hpp"
#include "dynfer/online_dp.hpp"
#include "dynfer/rng.hpp"

// Ground-truth machinery, deliberately independent of the solvers: losses
// come from exhaustive joint enumeration or seeded simulation, optima from
// scanning every deterministic strategy in a class.
namespace dynfer::oracle {

/**
 * Strategy classes and their information sets at round i (0-based).
 *
 *   markov-known     current observation x_i                    cells: |X|
 *   history-known    observations x_1..x_i                      cells: |X|^i
 *   markov-offline   x_i, tables priced at one fixed posterior  cells: |X|
 *   history-offline  x_1..x_i at one fixed posterior            cells: |X|^i
 *   markov-online    (reachable-belief node, x_i)               cells: nodes_i * |X|
 *   history-online   (x_1..x_i, y_1..y_{i-1})                   cells: |X|^i * |Y|^{i-1}
 *
 * History cells omit past estimates: a deterministic strategy reproduces its
 * own earlier estimates from the earlier observations, so the omission loses
 * no generality for minimization while keeping enumeration flat. Cell
 * indices are mixed-radix with the earliest element most significant; the
 * history-online index is x-code * |Y|^{i-1} + y-code. Zero-probability
 * histories still own a cell so counts stay exact; they contribute nothing
 * to expected loss.
 */
enum class StrategyClass {
    markov_known,
    history_known,
    markov_offline,
    history_offline,
    markov_online,
    history_online,
};

inline const char* to_string(StrategyClass c) {
    switch (c) {
        case StrategyClass::markov_known: return "markov-known";
        case StrategyClass::history_known: return "history-known";
        case StrategyClass::markov_offline: return "markov-offline";
        case StrategyClass::history_offline: return "history-offline";
        case StrategyClass::markov_online: return "markov-online";
        case StrategyClass::history_online: return "history-online";
    }
    return "?";
}

inline std::optional<StrategyClass> parse_strategy_class(const std::string& s) {
    if (s == "markov-known") return StrategyClass::markov_known;
    if (s == "history-known") return StrategyClass::history_known;
    if (s == "markov-offline") return StrategyClass::markov_offline;
    if (s == "history-offline") return StrategyClass::history_offline;
    if (s == "markov-online") return StrategyClass::markov_online;
    if (s == "history-online") return StrategyClass::history_online;
    return std::nullopt;
}

inline bool is_known_class(StrategyClass c) {
    return c == StrategyClass::markov_known || c == StrategyClass::history_known;
}
inline bool is_offline_class(StrategyClass c) {
    return c == StrategyClass::markov_offline || c == StrategyClass::history_offline;
}
inline bool is_online_class(StrategyClass c) {
    return c == StrategyClass::markov_online || c == StrategyClass::history_online;
}
inline bool is_history_class(StrategyClass c) {
    return c == StrategyClass::history_known || c == StrategyClass::history_offline ||
           c == StrategyClass::history_online;
}

/**
 * One deterministic strategy: per round, one yhat index per information
 * cell. markov-online tables carry the belief graph their node ids refer to.
 */
struct StrategyTable {
    StrategyClass cls = StrategyClass::markov_known;
    std::vector<std::vector<int>> entries;  // [round][cell] -> yhat
    std::shared_ptr<const BeliefGraph> graph;
};

// Per-round information-cell counts for a class on a scenario.
// markov-online needs the belief graph the table will run against.
inline std::vector<long long> strategy_cells(const Scenario& s, StrategyClass cls,
                                             const BeliefGraph* graph = nullptr) {
    const int n = s.n();
    const long long nx = s.nx();
    const long long ny = s.ny();
    std::vector<long long> cells(static_cast<std::size_t>(n), 0);

    // Exact integer product with an overflow guard; counts must stay
    // indexable well before any enumeration cap applies.
    auto grow = [](long long cur, long long factor, int round) {
        if (cur > 4000000000000000LL / factor)
            throw CapExceeded("strategy_cells: cell count at round " + std::to_string(round + 1) +
                                  " does not fit an index",
                              static_cast<double>(cur) * static_cast<double>(factor), round + 1);
        return cur * factor;
    };

    for (int i = 0; i < n; ++i) {
        long long c = 1;
        switch (cls) {
            case StrategyClass::markov_known:
            case StrategyClass::markov_offline:
                c = nx;
                break;
            case StrategyClass::history_known:
            case StrategyClass::history_offline:
                for (int k = 0; k <= i; ++k) c = grow(c, nx, i);
                break;
            case StrategyClass::markov_online:
                if (graph == nullptr || static_cast<int>(graph->rounds.size()) != n)
                    throw std::invalid_argument(
                        "strategy_cells: markov-online needs the scenario's belief graph");
                c = grow(static_cast<long long>(graph->rounds[static_cast<std::size_t>(i)].size()),
                         nx, i);
                break;
            case StrategyClass::history_online:
                for (int k = 0; k <= i; ++k) c = grow(c, nx, i);
                for (int k = 0; k < i; ++k) c = grow(c, ny, i);
                break;
        }
        cells[static_cast<std::size_t>(i)] = c;
    }
    return cells;
}

// Zero-initialized table of the right shape. Builds the belief graph on
// demand for markov-online when none is supplied.
inline StrategyTable make_strategy(const Scenario& s, StrategyClass cls,
                                   std::shared_ptr<const BeliefGraph> graph = nullptr) {
    StrategyTable t;
    t.cls = cls;
    if (cls == StrategyClass::markov_online && !graph)
        graph = std::make_shared<const BeliefGraph>(reachable_beliefs(s));
    t.graph = std::move(graph);
    auto cells = strategy_cells(s, cls, t.graph.get());
    t.entries.resize(cells.size());
    long long total = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        total += cells[i];
        if (total > 100000000LL)
            throw CapExceeded("make_strategy: table would need " + std::to_string(total) +
                                  " cells",
                              static_cast<double>(total));
        t.entries[i].assign(static_cast<std::size_t>(cells[i]), 0);
    }
    return t;
}

inline StrategyTable strategy_from_known(const KnownPolicy& p) {
    StrategyTable t;
    t.cls = StrategyClass::markov_known;
    t.entries = p.estimate;
    return t;
}

inline StrategyTable strategy_from_offline(const OfflinePolicy& p) {
    StrategyTable t;
    t.cls = StrategyClass::markov_offline;
    t.entries = p.estimate;
    return t;
}

// Flattens (node, x) to node * |X| + x and shares the policy's graph.
inline StrategyTable strategy_from_online(const Scenario& s, const OnlinePolicy& p) {
    StrategyTable t;
    t.cls = StrategyClass::markov_online;
    t.graph = std::make_shared<const BeliefGraph>(p.graph);
    t.entries.resize(p.estimate.size());
    for (std::size_t i = 0; i < p.estimate.size(); ++i) {
        auto& flat = t.entries[i];
        flat.reserve(p.estimate[i].size() * static_cast<std::size_t>(s.nx()));
        for (const auto& per_node : p.estimate[i]) {
            for (int v : per_node) flat.push_back(v);
        }
    }
    return t;
}

namespace detail {

inline void check_class_mode(const Scenario& s, const StrategyTable& t, const Dataset* d,
                             int dataset_len, const char* who) {
    if (is_known_class(t.cls)) {
        if (s.learning())
            throw std::invalid_argument(std::string(who) + ": known-mode class on a learning scenario");
        if (d != nullptr || dataset_len != 0)
            throw std::invalid_argument(std::string(who) + ": known-mode classes take no dataset");
    } else {
        if (!s.learning())
            throw std::invalid_argument(std::string(who) + ": learning class on a known-model scenario");
        if (is_online_class(t.cls) && (d != nullptr || dataset_len != 0))
            throw std::invalid_argument(std::string(who) + ": online classes take no dataset");
    }
    if (t.cls == StrategyClass::markov_online && !t.graph)
        throw std::invalid_argument(std::string(who) + ": markov-online table carries no belief graph");
    if (dataset_len < 0) throw std::invalid_argument(std::string(who) + ": negative dataset length");
    if (is_offline_class(t.cls) && d != nullptr && dataset_len != 0)
        throw std::invalid_argument(std::string(who) +
                                    ": dataset length applies only when no dataset is given");
}

// Powers of |Y| for the history-online cell index. Saturates instead of
// overflowing; saturated entries are only reachable for tables whose cell
// counts already failed the index guard.
inline std::vector<long long> ny_powers(const Scenario& s) {
    constexpr long long cap = 4000000000000000LL;
    std::vector<long long> p(static_cast<std::size_t>(s.n()) + 1, 1);
    for (std::size_t i = 1; i < p.size(); ++i) {
        p[i] = (p[i - 1] > cap / s.ny()) ? cap : p[i - 1] * s.ny();
    }
    return p;
}

// Full-joint walk over (X^n, Y^n) for one quantity kernel. `history` picks
// the observation-history cell index, otherwise the current x indexes the
// table. Losses accumulate along each branch and weigh in at the leaves.
struct ChainRawEval {
    const Scenario& s;
    const std::vector<std::vector<int>>& entries;
    bool history;
    const QuantityKernel* qk = nullptr;
    double total = 0.0;

    void run() {
        for (int x = 0; x < s.nx(); ++x) {
            const double p0 = s.init.p[static_cast<std::size_t>(x)];
            if (p0 > 0.0) rec(0, x, x, p0, 0.0);
        }
    }

    void rec(int i, int x, long long code, double prob, double acc) {
        const auto& row = entries[static_cast<std::size_t>(i)];
        const int yhat = history ? row[static_cast<std::size_t>(code)]
                                 : row[static_cast<std::size_t>(x)];
        const auto& py = qk->t[static_cast<std::size_t>(x)];
        const auto& lx = s.loss.t[static_cast<std::size_t>(x)];
        if (i + 1 == s.n()) {
            for (std::size_t y = 0; y < py.size(); ++y) {
                if (py[y] > 0.0)
                    total += prob * py[y] * (acc + lx[y][static_cast<std::size_t>(yhat)]);
            }
            return;
        }
        const Vec& krow =
            s.obs_kernel_for_transition(i).t[static_cast<std::size_t>(x)][static_cast<std::size_t>(yhat)];
        for (std::size_t y = 0; y < py.size(); ++y) {
            if (py[y] <= 0.0) continue;
            const double p2 = prob * py[y];
            const double l2 = acc + lx[y][static_cast<std::size_t>(yhat)];
            for (int xn = 0; xn < s.nx(); ++xn) {
                const double px = krow[static_cast<std::size_t>(xn)];
                if (px > 0.0) rec(i + 1, xn, history ? code * s.nx() + xn : 0, p2 * px, l2);
            }
        }
    }
};

// Same walk with the quantity integrated out per round: only the observation
// path is enumerated and `base(x, yhat)` prices each round.
template <class BaseLoss>
struct ChainMarginalEval {
    const Scenario& s;
    const std::vector<std::vector<int>>& entries;
    bool history;
    BaseLoss base;
    double total = 0.0;

    void run() {
        for (int x = 0; x < s.nx(); ++x) {
            const double p0 = s.init.p[static_cast<std::size_t>(x)];
            if (p0 > 0.0) rec(0, x, x, p0, 0.0);
        }
    }

    void rec(int i, int x, long long code, double prob, double acc) {
        const auto& row = entries[static_cast<std::size_t>(i)];
        const int yhat = history ? row[static_cast<std::size_t>(code)]
                                 : row[static_cast<std::size_t>(x)];
        const double l2 = acc + base(x, yhat);
        if (i + 1 == s.n()) {
            total += prob * l2;
            return;
        }
        const Vec& krow =
            s.obs_kernel_for_transition(i).t[static_cast<std::size_t>(x)][static_cast<std::size_t>(yhat)];
        for (int xn = 0; xn < s.nx(); ++xn) {
            const double px = krow[static_cast<std::size_t>(xn)];
            if (px > 0.0) rec(i + 1, xn, history ? code * s.nx() + xn : 0, prob * px, l2);
        }
    }
};

// Full-joint walk for online classes under one fixed family member.
// markov-online looks cells up through the graph's transition ids,
// history-online through the (x-code, y-code) pair.
struct OnlineRawEval {
    const Scenario& s;
    const std::vector<std::vector<int>>& entries;
    bool history;
    const BeliefGraph* graph = nullptr;
    const QuantityKernel* member = nullptr;
    const std::vector<long long>* nyp = nullptr;
    double total = 0.0;

    void run() {
        for (int x = 0; x < s.nx(); ++x) {
            const double p0 = s.init.p[static_cast<std::size_t>(x)];
            if (p0 > 0.0) rec(0, x, 0, x, 0, p0, 0.0);
        }
    }

    void rec(int i, int x, int node, long long cx, long long cy, double prob, double acc) {
        const auto& row = entries[static_cast<std::size_t>(i)];
        const int yhat =
            history ? row[static_cast<std::size_t>(cx * (*nyp)[static_cast<std::size_t>(i)] + cy)]
                    : row[static_cast<std::size_t>(static_cast<long long>(node) * s.nx() + x)];
        const auto& py = member->t[static_cast<std::size_t>(x)];
        const auto& lx = s.loss.t[static_cast<std::size_t>(x)];
        if (i + 1 == s.n()) {
            for (std::size_t y = 0; y < py.size(); ++y) {
                if (py[y] > 0.0)
                    total += prob * py[y] * (acc + lx[y][static_cast<std::size_t>(yhat)]);
            }
            return;
        }
        const Vec& krow =
            s.obs_kernel_for_transition(i).t[static_cast<std::size_t>(x)][static_cast<std::size_t>(yhat)];
        for (std::size_t y = 0; y < py.size(); ++y) {
            if (py[y] <= 0.0) continue;
            int nid = 0;
            if (!history) {
                nid = graph->next[static_cast<std::size_t>(i)][static_cast<std::size_t>(node)]
                                 [static_cast<std::size_t>(x)][y];
                if (nid < 0)
                    throw NodeNotFound(
                        "oracle: stored belief graph prunes a positive-probability branch");
            }
            const double p2 = prob * py[y];
            const double l2 = acc + lx[y][static_cast<std::size_t>(yhat)];
            const long long ncx = history ? cx * s.nx() : 0;
            const long long ncy = history ? cy * s.ny() + static_cast<long long>(y) : 0;
            for (int xn = 0; xn < s.nx(); ++xn) {
                const double px = krow[static_cast<std::size_t>(xn)];
                if (px > 0.0) rec(i + 1, xn, nid, history ? ncx + xn : 0, ncy, p2 * px, l2);
            }
        }
    }
};

// Online walk pricing rounds with the mixture loss at the folded belief.
// The quantity path is still enumerated, it drives the belief.
struct OnlineMarginalEval {
    const Scenario& s;
    const std::vector<std::vector<int>>& entries;
    bool history;
    const BeliefGraph* graph = nullptr;
    const QuantityKernel* member = nullptr;
    const std::vector<long long>* nyp = nullptr;
    double total = 0.0;

    void run() {
        for (int x = 0; x < s.nx(); ++x) {
            const double p0 = s.init.p[static_cast<std::size_t>(x)];
            if (p0 > 0.0) rec(0, x, 0, *s.prior, x, 0, p0, 0.0);
        }
    }

    void rec(int i, int x, int node, const Belief& b, long long cx, long long cy, double prob,
             double acc) {
        const auto& row = entries[static_cast<std::size_t>(i)];
        const int yhat =
            history ? row[static_cast<std::size_t>(cx * (*nyp)[static_cast<std::size_t>(i)] + cy)]
                    : row[static_cast<std::size_t>(static_cast<long long>(node) * s.nx() + x)];
        const double l2 = acc + mixture_loss(*s.family, s.loss, b, x, yhat);
        if (i + 1 == s.n()) {
            total += prob * l2;
            return;
        }
        const auto& py = member->t[static_cast<std::size_t>(x)];
        const Vec& krow =
            s.obs_kernel_for_transition(i).t[static_cast<std::size_t>(x)][static_cast<std::size_t>(yhat)];
        for (std::size_t y = 0; y < py.size(); ++y) {
            if (py[y] <= 0.0) continue;
            int nid = 0;
            if (!history) {
                nid = graph->next[static_cast<std::size_t>(i)][static_cast<std::size_t>(node)]
                                 [static_cast<std::size_t>(x)][y];
                if (nid < 0)
                    throw NodeNotFound(
                        "oracle: stored belief graph prunes a positive-probability branch");
            }
            const Belief nb = belief_update(*s.family, b, x, static_cast<int>(y));
            const double p2 = prob * py[y];
            const long long ncx = history ? cx * s.nx() : 0;
            const long long ncy = history ? cy * s.ny() + static_cast<long long>(y) : 0;
            for (int xn = 0; xn < s.nx(); ++xn) {
                const double px = krow[static_cast<std::size_t>(xn)];
                if (px > 0.0) rec(i + 1, xn, nid, nb, history ? ncx + xn : 0, ncy, p2 * px, l2);
            }
        }
    }
};

// Enumerates every dataset of length m in draw order and hands each leaf's
// probability under the generating member to `sink(prob, dataset)`.
template <class Sink>
inline void for_each_dataset(const Scenario& s, const QuantityKernel& member, int m, Sink&& sink) {
    if (m >= 2) {
        if (s.obs_kernels.empty())
            throw std::invalid_argument(
                "oracle: scenario has no observation kernel to chain dataset pairs with");
        if (s.ny() > s.nyhat())
            throw std::invalid_argument(
                "oracle: quantity alphabet exceeds the estimate alphabet, datasets of length >= 2 "
                "cannot be generated");
    }
    Dataset buf;
    buf.pairs.resize(static_cast<std::size_t>(m));

    struct Rec {
        const Scenario& s;
        const QuantityKernel& member;
        int m;
        Dataset& buf;
        Sink& sink;

        void go(int j, int x, double prob) {
            const auto& py = member.t[static_cast<std::size_t>(x)];
            for (std::size_t y = 0; y < py.size(); ++y) {
                if (py[y] <= 0.0) continue;
                buf.pairs[static_cast<std::size_t>(j)] = {x, static_cast<int>(y)};
                const double p2 = prob * py[y];
                if (j + 1 == m) {
                    sink(p2, buf);
                    continue;
                }
                const Vec& krow = s.obs_kernel_for_step(j).t[static_cast<std::size_t>(x)][y];
                for (int xn = 0; xn < s.nx(); ++xn) {
                    if (krow[static_cast<std::size_t>(xn)] > 0.0)
                        go(j + 1, xn, p2 * krow[static_cast<std::size_t>(xn)]);
                }
            }
        }
    } rec{s, member, m, buf, sink};

    if (m == 0) {
        sink(1.0, buf);
        return;
    }
    for (int x = 0; x < s.nx(); ++x) {
        if (s.init.p[static_cast<std::size_t>(x)] > 0.0)
            rec.go(0, x, s.init.p[static_cast<std::size_t>(x)]);
    }
}

}  // namespace detail

// Exact conditional loss of an offline-class table with the parameter
// weighted by an explicit belief instead of a dataset's posterior.
inline double exact_loss_given_belief(const Scenario& s, const StrategyTable& t,
                                      const Belief& belief) {
    require_valid(s, "exact_loss_given_belief");
    if (!is_offline_class(t.cls))
        throw std::invalid_argument("exact_loss_given_belief: table is not an offline class");
    const ParametricFamily& fam = *s.family;
    if (belief.p.size() != fam.members.size())
        throw std::invalid_argument("exact_loss_given_belief: belief length does not match family");
    double total = 0.0;
    for (int w = 0; w < fam.param_count(); ++w) {
        const double pw = belief.p[static_cast<std::size_t>(w)];
        if (pw == 0.0) continue;
        detail::ChainRawEval ev{s, t.entries, is_history_class(t.cls),
                                &fam.members[static_cast<std::size_t>(w)], 0.0};
        ev.run();
        total += pw * ev.total;
    }
    return total;
}

/**
 * Expected accumulated loss of one strategy table, by exhaustive summation
 * over the full joint support: (X^n, Y^n) in known mode, additionally W for
 * learning classes. Offline classes condition on `d` when given (parameter
 * weighted by its posterior); with d absent the loss is unconditional and
 * datasets of length `dataset_len` are enumerated too.
 */
inline double exact_loss(const Scenario& s, const StrategyTable& t, const Dataset* d = nullptr,
                         int dataset_len = 0) {
    require_valid(s, "exact_loss");
    detail::check_class_mode(s, t, d, dataset_len, "exact_loss");

    if (is_known_class(t.cls)) {
        detail::ChainRawEval ev{s, t.entries, is_history_class(t.cls), &*s.quantity, 0.0};
        ev.run();
        return ev.total;
    }

    if (is_offline_class(t.cls)) {
        const ParametricFamily& fam = *s.family;
        if (d != nullptr) {
            return exact_loss_given_belief(s, t, posterior_from_dataset(fam, *s.prior, *d));
        }
        // Unconditional: the table ignores the dataset but the joint
        // enumeration still walks every Z^m branch.
        double total = 0.0;
        for (int w = 0; w < fam.param_count(); ++w) {
            const double pw = s.prior->p[static_cast<std::size_t>(w)];
            if (pw == 0.0) continue;
            detail::ChainRawEval ev{s, t.entries, is_history_class(t.cls),
                                    &fam.members[static_cast<std::size_t>(w)], 0.0};
            ev.run();
            double zmass = 0.0;
            detail::for_each_dataset(s, fam.members[static_cast<std::size_t>(w)], dataset_len,
                                     [&](double pz, const Dataset&) { zmass += pz; });
            total += pw * zmass * ev.total;
        }
        return total;
    }

    const ParametricFamily& fam = *s.family;
    const auto nyp = detail::ny_powers(s);
    double total = 0.0;
    for (int w = 0; w < fam.param_count(); ++w) {
        const double pw = s.prior->p[static_cast<std::size_t>(w)];
        if (pw == 0.0) continue;
        detail::OnlineRawEval ev{s,       t.entries,
                                 is_history_class(t.cls), t.graph.get(),
                                 &fam.members[static_cast<std::size_t>(w)], &nyp,
                                 0.0};
        ev.run();
        total += pw * ev.total;
    }
    return total;
}

/**
 * The same expectation computed through the per-round marginalized loss:
 * marginal_loss in known mode, mixture_loss at the fixed posterior for
 * offline classes, mixture_loss at the folded belief for online classes.
 * Agreement with exact_loss is the loss-equivalence property the solvers
 * rest on.
 */
inline double exact_loss_marginal(const Scenario& s, const StrategyTable& t,
                                  const Dataset* d = nullptr, int dataset_len = 0) {
    require_valid(s, "exact_loss_marginal");
    detail::check_class_mode(s, t, d, dataset_len, "exact_loss_marginal");
    const bool hist = is_history_class(t.cls);

    if (is_known_class(t.cls)) {
        auto base = [&s](int x, int yh) { return marginal_loss(*s.quantity, s.loss, x, yh); };
        detail::ChainMarginalEval<decltype(base)> ev{s, t.entries, hist, base, 0.0};
        ev.run();
        return ev.total;
    }

    if (is_offline_class(t.cls)) {
        const ParametricFamily& fam = *s.family;
        if (d != nullptr) {
            const Belief post = posterior_from_dataset(fam, *s.prior, *d);
            auto base = [&](int x, int yh) { return mixture_loss(fam, s.loss, post, x, yh); };
            detail::ChainMarginalEval<decltype(base)> ev{s, t.entries, hist, base, 0.0};
            ev.run();
            return ev.total;
        }
        // Unconditional: each dataset reweights the posterior the rounds are
        // priced with, so the Z^m enumeration matters here.
        double total = 0.0;
        for (int w = 0; w < fam.param_count(); ++w) {
            const double pw = s.prior->p[static_cast<std::size_t>(w)];
            if (pw == 0.0) continue;
            detail::for_each_dataset(
                s, fam.members[static_cast<std::size_t>(w)], dataset_len,
                [&](double pz, const Dataset& z) {
                    const Belief post = posterior_from_dataset(fam, *s.prior, z);
                    auto base = [&](int x, int yh) {
                        return mixture_loss(fam, s.loss, post, x, yh);
                    };
                    detail::ChainMarginalEval<decltype(base)> ev{s, t.entries, hist, base, 0.0};
                    ev.run();
                    total += pw * pz * ev.total;
                });
        }
        return total;
    }

    const ParametricFamily& fam = *s.family;
    const auto nyp = detail::ny_powers(s);
    double total = 0.0;
    for (int w = 0; w < fam.param_count(); ++w) {
        const double pw = s.prior->p[static_cast<std::size_t>(w)];
        if (pw == 0.0) continue;
        detail::OnlineMarginalEval ev{s,       t.entries,
                                      is_history_class(t.cls), t.graph.get(),
                                      &fam.members[static_cast<std::size_t>(w)], &nyp,
                                      0.0};
        ev.run();
        total += pw * ev.total;
    }
    return total;
}

/**
 * Scans every deterministic strategy in the class and returns a minimizer
 * with its exact loss. Enumeration is lexicographic over the flattened
 * entries (last cell fastest), and ties keep the first minimizer, so the
 * result is the lexicographically smallest optimum. Offline classes run
 * conditionally on `d`; a missing dataset means the empty one (prior).
 * Raises CapExceeded before any allocation once the projected count passes
 * strategy_cap.
 */
inline std::pair<StrategyTable, double> brute_force_optimum(const Scenario& s, StrategyClass cls,
                                                            const Dataset* d = nullptr,
                                                            double strategy_cap = 1.0e7,
                                                            long long node_cap = 1000000) {
    require_valid(s, "brute_force_optimum");
    if (!is_offline_class(cls) && d != nullptr)
        throw std::invalid_argument("brute_force_optimum: only offline classes take a dataset");
    std::shared_ptr<const BeliefGraph> graph;
    if (cls == StrategyClass::markov_online)
        graph = std::make_shared<const BeliefGraph>(reachable_beliefs(s, node_cap));

    const auto cells = strategy_cells(s, cls, graph.get());
    double total_cells = 0.0;
    for (long long c : cells) total_cells += static_cast<double>(c);
    const double count_estimate =
        (s.nyhat() == 1) ? 1.0 : std::exp(total_cells * std::log(static_cast<double>(s.nyhat())));
    if (!(count_estimate <= strategy_cap))
        throw CapExceeded("brute_force_optimum: " + std::string(to_string(cls)) +
                              " strategy count estimate " + std::to_string(count_estimate) +
                              " exceeds cap " + std::to_string(strategy_cap),
                          count_estimate);

    Dataset empty;
    if (is_offline_class(cls) && d == nullptr) d = &empty;

    StrategyTable t = make_strategy(s, cls, graph);
    detail::check_class_mode(s, t, is_offline_class(cls) ? d : nullptr, 0, "brute_force_optimum");

    // Evaluation context fixed across the scan.
    std::optional<Belief> post;
    if (is_offline_class(cls)) post = posterior_from_dataset(*s.family, *s.prior, *d);
    const auto nyp = detail::ny_powers(s);
    const bool hist = is_history_class(cls);

    auto evaluate = [&]() -> double {
        if (is_known_class(cls)) {
            detail::ChainRawEval ev{s, t.entries, hist, &*s.quantity, 0.0};
            ev.run();
            return ev.total;
        }
        const ParametricFamily& fam = *s.family;
        double total = 0.0;
        if (is_offline_class(cls)) {
            for (int w = 0; w < fam.param_count(); ++w) {
                const double pw = post->p[static_cast<std::size_t>(w)];
                if (pw == 0.0) continue;
                detail::ChainRawEval ev{s, t.entries, hist,
                                        &fam.members[static_cast<std::size_t>(w)], 0.0};
                ev.run();
                total += pw * ev.total;
            }
            return total;
        }
        for (int w = 0; w < fam.param_count(); ++w) {
            const double pw = s.prior->p[static_cast<std::size_t>(w)];
            if (pw == 0.0) continue;
            detail::OnlineRawEval ev{s,       t.entries,
                                     hist,    t.graph.get(),
                                     &fam.members[static_cast<std::size_t>(w)], &nyp,
                                     0.0};
            ev.run();
            total += pw * ev.total;
        }
        return total;
    };

    StrategyTable best = t;
    double best_loss = std::numeric_limits<double>::infinity();
    while (true) {
        const double loss = evaluate();
        if (loss < best_loss) {
            best_loss = loss;
            best.entries = t.entries;
        }
        // Advance the odometer, last cell fastest.
        bool carried = true;
        for (std::size_t i = t.entries.size(); i-- > 0 && carried;) {
            auto& row = t.entries[i];
            for (std::size_t c = row.size(); c-- > 0;) {
                if (++row[c] < s.nyhat()) {
                    carried = false;
                    break;
                }
                row[c] = 0;
            }
        }
        if (carried) break;
    }
    return {best, best_loss};
}

/**
 * Exact or sampled evaluation outcome. `seed` is set for sampled runs only;
 * std_error is 0 for exact results.
 */
struct EvaluationReport {
    std::string mode;  // "exact" or "monte-carlo"
    double loss = 0.0;
    double std_error = 0.0;
    long long samples = 0;
    std::optional<std::uint64_t> seed;
};

/**
 * Seeded simulation of the full generative process under the strategy:
 * draw W for learning classes (posterior of d for offline, prior otherwise),
 * roll the chain with the table's estimates feeding the step kernel, and
 * average the accumulated loss. Offline without a dataset also simulates the
 * Z^m draw (length dataset_len). Trajectory k runs on its own stream derived
 * from (seed, k), so results are reproducible and order-independent.
 */
inline EvaluationReport monte_carlo_loss(const Scenario& s, const StrategyTable& t,
                                         long long samples, std::uint64_t seed,
                                         const Dataset* d = nullptr, int dataset_len = 0);

// Sampled conditional loss of an offline-class table at an explicit belief.
inline EvaluationReport monte_carlo_loss_given_belief(const Scenario& s, const StrategyTable& t,
                                                      long long samples, std::uint64_t seed,
                                                      const Belief& belief);

namespace detail {

inline EvaluationReport mc_core(const Scenario& s, const StrategyTable& t, long long samples,
                                std::uint64_t seed, const Belief* post, int dataset_len) {
    if (samples < 1) throw std::invalid_argument("monte_carlo_loss: need at least one sample");

    const bool hist = is_history_class(t.cls);
    const auto nyp = detail::ny_powers(s);
    const int n = s.n();

    Vec losses(static_cast<std::size_t>(samples), 0.0);
    for (long long k = 0; k < samples; ++k) {
        SampleStream stream(derive_stream_seed(seed, static_cast<std::uint64_t>(k)));

        const QuantityKernel* qk = nullptr;
        if (is_known_class(t.cls)) {
            qk = &*s.quantity;
        } else if (is_offline_class(t.cls)) {
            const int w = (post != nullptr) ? stream.sample(post->p) : stream.sample(s.prior->p);
            qk = &s.family->members[static_cast<std::size_t>(w)];
            if (!post) {
                // Unconditional run: the dataset draw is part of the process
                // even though the table never reads it.
                int xd = (dataset_len > 0) ? stream.sample(s.init.p) : 0;
                for (int j = 0; j < dataset_len; ++j) {
                    const int yd = stream.sample(qk->t[static_cast<std::size_t>(xd)]);
                    if (j + 1 < dataset_len) {
                        xd = stream.sample(
                            s.obs_kernel_for_step(j).t[static_cast<std::size_t>(xd)]
                                [static_cast<std::size_t>(yd)]);
                    }
                }
            }
        } else {
            const int w = stream.sample(s.prior->p);
            qk = &s.family->members[static_cast<std::size_t>(w)];
        }

        double acc = 0.0;
        int x = stream.sample(s.init.p);
        int node = 0;
        long long cx = x, cy = 0;
        for (int i = 0; i < n; ++i) {
            int yhat;
            if (!is_online_class(t.cls)) {
                yhat = hist ? t.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(cx)]
                            : t.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
            } else if (hist) {
                yhat = t.entries[static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(cx * nyp[static_cast<std::size_t>(i)] + cy)];
            } else {
                yhat = t.entries[static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(static_cast<long long>(node) * s.nx() + x)];
            }
            const int y = stream.sample(qk->t[static_cast<std::size_t>(x)]);
            acc += s.loss.t[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]
                           [static_cast<std::size_t>(yhat)];
            if (i + 1 < n) {
                if (is_online_class(t.cls) && !hist) {
                    node = t.graph->next[static_cast<std::size_t>(i)][static_cast<std::size_t>(node)]
                                        [static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
                    if (node < 0)
                        throw ImpossibleObservation(
                            "monte_carlo_loss: sampled a branch the stored belief graph prunes, "
                            "internal defect");
                }
                const int xn = stream.sample(
                    s.obs_kernel_for_transition(i).t[static_cast<std::size_t>(x)]
                        [static_cast<std::size_t>(yhat)]);
                if (hist) {
                    cx = cx * s.nx() + xn;
                    cy = cy * s.ny() + y;
                }
                x = xn;
            }
        }
        losses[static_cast<std::size_t>(k)] = acc;
    }

    double sum = 0.0;
    for (double v : losses) sum += v;
    const double mean = sum / static_cast<double>(samples);
    double std_error = 0.0;
    if (samples >= 2) {
        double m2 = 0.0;
        for (double v : losses) m2 += (v - mean) * (v - mean);
        std_error = std::sqrt(m2 / static_cast<double>(samples - 1)) /
                    std::sqrt(static_cast<double>(samples));
    }

    EvaluationReport r;
    r.mode = "monte-carlo";
    r.loss = mean;
    r.std_error = std_error;
    r.samples = samples;
    r.seed = seed;
    return r;
}

}  // namespace detail

inline EvaluationReport monte_carlo_loss(const Scenario& s, const StrategyTable& t,
                                         long long samples, std::uint64_t seed, const Dataset* d,
                                         int dataset_len) {
    require_valid(s, "monte_carlo_loss");
    detail::check_class_mode(s, t, d, dataset_len, "monte_carlo_loss");
    if (is_offline_class(t.cls) && d == nullptr && dataset_len >= 2) {
        if (s.obs_kernels.empty())
            throw std::invalid_argument(
                "monte_carlo_loss: scenario has no observation kernel to chain dataset pairs with");
        if (s.ny() > s.nyhat())
            throw std::invalid_argument(
                "monte_carlo_loss: quantity alphabet exceeds the estimate alphabet");
    }
    std::optional<Belief> post;
    if (is_offline_class(t.cls) && d != nullptr)
        post = posterior_from_dataset(*s.family, *s.prior, *d);
    return detail::mc_core(s, t, samples, seed, post ? &*post : nullptr, dataset_len);
}

inline EvaluationReport monte_carlo_loss_given_belief(const Scenario& s, const StrategyTable& t,
                                                      long long samples, std::uint64_t seed,
                                                      const Belief& belief) {
    require_valid(s, "monte_carlo_loss_given_belief");
    detail::check_class_mode(s, t, nullptr, 0, "monte_carlo_loss_given_belief");
    if (!is_offline_class(t.cls))
        throw std::invalid_argument("monte_carlo_loss_given_belief: table is not an offline class");
    if (belief.p.size() != s.family->members.size())
        throw std::invalid_argument("monte_carlo_loss_given_belief: belief length does not match family");
    return detail::mc_core(s, t, samples, seed, &belief, 0);
}

/**
 * Both sides of the irrelevant-information identity for a deterministic
 * statistic y = f(x): the best estimate built on x directly against the best
 * estimate built on f(x) alone. Both minima are honest scans over every
 * deterministic map.
 *
 *   lhs = min over g : X -> Yhat of sum_x px(x) loss(f(x), g(x))
 *   rhs = min over h : Y -> Yhat of sum_x px(x) loss(f(x), h(f(x)))
 */
inline std::pair<double, double> check_blackwell(const Mat& loss, const std::vector<int>& f,
                                                 const Distribution& px) {
    const int nx = static_cast<int>(px.p.size());
    const int ny = static_cast<int>(loss.size());
    if (ny == 0 || loss[0].empty()) throw std::invalid_argument("check_blackwell: empty loss table");
    const int nyh = static_cast<int>(loss[0].size());
    if (static_cast<int>(f.size()) != nx)
        throw std::invalid_argument("check_blackwell: f length does not match px");
    for (int v : f) {
        if (v < 0 || v >= ny) throw std::invalid_argument("check_blackwell: f value out of range");
    }

    auto scan = [&](int domain, auto&& price) {
        std::vector<int> g(static_cast<std::size_t>(domain), 0);
        double best = std::numeric_limits<double>::infinity();
        while (true) {
            const double v = price(g);
            if (v < best) best = v;
            int pos = domain - 1;
            while (pos >= 0) {
                if (++g[static_cast<std::size_t>(pos)] < nyh) break;
                g[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
        return best;
    };

    const double lhs = scan(nx, [&](const std::vector<int>& g) {
        double v = 0.0;
        for (int x = 0; x < nx; ++x) {
            v += px.p[static_cast<std::size_t>(x)] *
                 loss[static_cast<std::size_t>(f[static_cast<std::size_t>(x)])]
                     [static_cast<std::size_t>(g[static_cast<std::size_t>(x)])];
        }
        return v;
    });
    const double rhs = scan(ny, [&](const std::vector<int>& h) {
        double v = 0.0;
        for (int x = 0; x < nx; ++x) {
            v += px.p[static_cast<std::size_t>(x)] *
                 loss[static_cast<std::size_t>(f[static_cast<std::size_t>(x)])]
                     [static_cast<std::size_t>(h[static_cast<std::size_t>(f[static_cast<std::size_t>(x)])])];
        }
        return v;
    });
    return {lhs, rhs};
}

}  // namespace dynfer::oracle
