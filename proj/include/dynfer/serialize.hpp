#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dynfer/errors.hpp"
#include "dynfer/known_dp.hpp"
#include "dynfer/model.hpp"
#include "dynfer/offline_dp.hpp"
#include "dynfer/online_dp.hpp"
#include "dynfer/oracle.hpp"

// File formats: scenario configs, datasets, policies, reports (all JSON with
// sorted keys, so byte-identical for identical inputs) and the loss-to-go
// CSV. Numbers round-trip exactly through the JSON layer.
namespace dynfer::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON shape helpers

namespace detail {

inline const json& need(const json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(std::string(where) + ": missing key \"" + key + "\"");
    return *it;
}

inline double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<int>();
}

inline Vec as_vec(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    Vec out;
    out.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) {
        out.push_back(as_number(j[k], where + "[" + std::to_string(k) + "]"));
    }
    return out;
}

inline Mat as_mat(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of arrays");
    Mat out;
    out.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) {
        out.push_back(as_vec(j[k], where + "[" + std::to_string(k) + "]"));
    }
    return out;
}

inline Cube as_cube(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected a 3-d array");
    Cube out;
    out.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) {
        out.push_back(as_mat(j[k], where + "[" + std::to_string(k) + "]"));
    }
    return out;
}

// True when the value is a 3-d array (first leaf sits three levels deep).
// Distinguishes one 3-d kernel from a list of them by depth: a cube bottoms
// out in numbers after three levels, a kernel list after four.
inline bool looks_cube(const json& j) {
    return j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() &&
           j[0][0].is_array() && !j[0][0].empty() && j[0][0][0].is_number();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario config

/**
 * Builds a Scenario from a parsed config document. Schema errors raise
 * ConfigError; numeric defects are left for validate_scenario so they can be
 * reported together. Label blocks are accepted and ignored.
 */
inline Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    Scenario s;

    const json& spaces = detail::need(j, "spaces", "config");
    s.x_space.size = detail::as_int(detail::need(spaces, "x", "config.spaces"), "config.spaces.x");
    s.y_space.size = detail::as_int(detail::need(spaces, "y", "config.spaces"), "config.spaces.y");
    s.yhat_space.size =
        detail::as_int(detail::need(spaces, "yhat", "config.spaces"), "config.spaces.yhat");
    s.horizon = detail::as_int(detail::need(j, "horizon", "config"), "config.horizon");
    s.init.p = detail::as_vec(detail::need(j, "init", "config"), "config.init");

    const json& kernels = detail::need(j, "obs_kernels", "config");
    if (detail::looks_cube(kernels)) {
        s.shared_kernel = true;
        s.obs_kernels.push_back(ObservationKernel{detail::as_cube(kernels, "config.obs_kernels")});
    } else if (kernels.is_array()) {
        s.shared_kernel = false;
        for (std::size_t k = 0; k < kernels.size(); ++k) {
            s.obs_kernels.push_back(ObservationKernel{
                detail::as_cube(kernels[k], "config.obs_kernels[" + std::to_string(k) + "]")});
        }
    } else {
        throw ConfigError("config.obs_kernels: expected a 3-d array or a list of them");
    }

    const json& mode = detail::need(j, "mode", "config");
    if (!mode.is_string()) throw ConfigError("config.mode: expected \"known\" or \"learning\"");
    const std::string mode_s = mode.get<std::string>();
    if (mode_s == "known") {
        if (j.contains("family") || j.contains("prior"))
            throw ConfigError("config: mode \"known\" does not take family or prior");
        s.quantity = QuantityKernel{detail::as_mat(detail::need(j, "quantity", "config"),
                                                   "config.quantity")};
    } else if (mode_s == "learning") {
        if (j.contains("quantity"))
            throw ConfigError("config: mode \"learning\" does not take a quantity kernel");
        const json& fam = detail::need(j, "family", "config");
        if (!fam.is_array() || fam.empty())
            throw ConfigError("config.family: expected a nonempty array of 2-d arrays");
        ParametricFamily family;
        for (std::size_t w = 0; w < fam.size(); ++w) {
            family.members.push_back(QuantityKernel{
                detail::as_mat(fam[w], "config.family[" + std::to_string(w) + "]")});
        }
        s.family = std::move(family);
        s.prior = Belief{detail::as_vec(detail::need(j, "prior", "config"), "config.prior")};
    } else {
        throw ConfigError("config.mode: unknown mode \"" + mode_s + "\"");
    }

    s.loss = LossTensor{detail::as_cube(detail::need(j, "loss", "config"), "config.loss")};
    return s;
}

// Reads and parses a config file. JSON syntax errors propagate as
// nlohmann parse_error (line and column in the message); everything else
// raises ConfigError.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open \"" + path + "\"");
    json j = json::parse(in);  // may throw json::parse_error
    return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Content hash

namespace detail {

inline void hash_append(std::string& buf, const std::string& s) {
    buf += s;
    buf += '|';
}

inline void hash_append(std::string& buf, double v) {
    char tmp[40];
    std::snprintf(tmp, sizeof(tmp), "%.17g", v);
    buf += tmp;
    buf += ',';
}

inline void hash_append(std::string& buf, const Vec& v) {
    for (double x : v) hash_append(buf, x);
    buf += '|';
}

inline void hash_append(std::string& buf, const Mat& m) {
    for (const auto& r : m) hash_append(buf, r);
}

inline void hash_append(std::string& buf, const Cube& c) {
    for (const auto& m : c) hash_append(buf, m);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

/**
 * Content hash of the canonicalized numeric tensors (17 significant digits),
 * 16 hex characters. Independent of labels, formatting, and key order in the
 * source file; any numeric or structural change moves it.
 */
inline std::string scenario_hash(const Scenario& s) {
    std::string buf;
    buf.reserve(4096);
    detail::hash_append(buf, std::string("dynfer-scenario-v1"));
    detail::hash_append(buf, "dims=" + std::to_string(s.nx()) + "," + std::to_string(s.ny()) + "," +
                                 std::to_string(s.nyhat()) + ",n=" + std::to_string(s.n()));
    detail::hash_append(buf, std::string("init"));
    detail::hash_append(buf, s.init.p);
    detail::hash_append(buf, std::string(s.shared_kernel ? "kernels-shared" : "kernels-per-round"));
    for (const auto& k : s.obs_kernels) detail::hash_append(buf, k.t);
    if (s.quantity) {
        detail::hash_append(buf, std::string("mode-known"));
        detail::hash_append(buf, s.quantity->t);
    }
    if (s.family) {
        detail::hash_append(buf, std::string("mode-learning"));
        for (const auto& m : s.family->members) detail::hash_append(buf, m.t);
        detail::hash_append(buf, std::string("prior"));
        detail::hash_append(buf, s.prior->p);
    }
    detail::hash_append(buf, std::string("loss"));
    detail::hash_append(buf, s.loss.t);

    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(buf)));
    return out;
}

// ---------------------------------------------------------------------------
// Datasets

inline json dataset_to_json(const Dataset& d, std::optional<int> w = std::nullopt,
                            std::optional<std::uint64_t> seed = std::nullopt) {
    json j;
    j["kind"] = "dataset";
    j["m"] = d.size();
    json pairs = json::array();
    for (const auto& [x, y] : d.pairs) pairs.push_back(json::array({x, y}));
    j["pairs"] = std::move(pairs);
    if (w) j["w"] = *w;
    if (seed) j["seed"] = *seed;
    return j;
}

inline Dataset dataset_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("dataset: expected a JSON object");
    const json& pairs = detail::need(j, "pairs", "dataset");
    if (!pairs.is_array()) throw ConfigError("dataset.pairs: expected an array");
    Dataset d;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const json& p = pairs[k];
        const std::string where = "dataset.pairs[" + std::to_string(k) + "]";
        if (!p.is_array() || p.size() != 2) throw ConfigError(where + ": expected [x, y]");
        d.pairs.emplace_back(detail::as_int(p[0], where + "[0]"), detail::as_int(p[1], where + "[1]"));
    }
    if (j.contains("m") && detail::as_int(j["m"], "dataset.m") != d.size())
        throw ConfigError("dataset: stated m does not match the pair count");
    return d;
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open \"" + path + "\"");
    return dataset_from_json(json::parse(in));
}

// ---------------------------------------------------------------------------
// Policies

namespace detail {

inline json rounds_to_json(const std::vector<std::vector<int>>& est, const Mat& val, const Cube& q) {
    json rounds = json::array();
    for (std::size_t i = 0; i < est.size(); ++i) {
        json r;
        r["round"] = i + 1;  // file convention: rounds are labeled 1..n
        r["psi"] = est[i];
        r["v"] = val[i];
        r["q"] = q[i];
        rounds.push_back(std::move(r));
    }
    return rounds;
}

inline void rounds_from_json(const json& rounds, std::vector<std::vector<int>>& est, Mat& val,
                             Cube& q) {
    if (!rounds.is_array()) throw ConfigError("policy.rounds: expected an array");
    est.clear();
    val.clear();
    q.clear();
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        const json& r = rounds[i];
        const std::string where = "policy.rounds[" + std::to_string(i) + "]";
        if (as_int(need(r, "round", where.c_str()), where + ".round") != static_cast<int>(i) + 1)
            throw ConfigError(where + ": rounds must be labeled 1..n in order");
        const json& psi = need(r, "psi", where.c_str());
        if (!psi.is_array()) throw ConfigError(where + ".psi: expected an array");
        est.emplace_back();
        for (std::size_t k = 0; k < psi.size(); ++k)
            est.back().push_back(as_int(psi[k], where + ".psi[" + std::to_string(k) + "]"));
        val.push_back(as_vec(need(r, "v", where.c_str()), where + ".v"));
        q.push_back(as_mat(need(r, "q", where.c_str()), where + ".q"));
    }
}

}  // namespace detail

inline json known_policy_to_json(const KnownPolicy& p, const std::string& hash) {
    json j;
    j["kind"] = "policy";
    j["mode"] = "known";
    j["scenario_hash"] = hash;
    j["rounds"] = detail::rounds_to_json(p.estimate, p.value, p.q);
    return j;
}

inline json offline_policy_to_json(const OfflinePolicy& p, const std::string& hash) {
    json j;
    j["kind"] = "policy";
    j["mode"] = "offline";
    j["scenario_hash"] = hash;
    j["belief"] = p.belief.p;
    j["rounds"] = detail::rounds_to_json(p.estimate, p.value, p.q);
    return j;
}

inline json online_policy_to_json(const OnlinePolicy& p, const std::string& hash) {
    json j;
    j["kind"] = "policy";
    j["mode"] = "online";
    j["scenario_hash"] = hash;
    json rounds = json::array();
    for (std::size_t i = 0; i < p.estimate.size(); ++i) {
        json r;
        r["round"] = i + 1;
        json nodes = json::array();
        for (const auto& node : p.graph.rounds[i]) {
            json nj;
            nj["id"] = node.id;
            nj["belief"] = node.belief.p;
            nodes.push_back(std::move(nj));
        }
        r["nodes"] = std::move(nodes);
        r["psi"] = p.estimate[i];
        r["v"] = p.value[i];
        r["q"] = p.q[i];
        if (i + 1 < p.estimate.size()) r["transitions"] = p.graph.next[i];
        rounds.push_back(std::move(r));
    }
    j["rounds"] = std::move(rounds);
    return j;
}

struct LoadedPolicy {
    std::string mode;  // "known", "offline" or "online"
    std::string hash;
    KnownPolicy known;
    OfflinePolicy offline;
    OnlinePolicy online;
};

inline LoadedPolicy policy_from_json(const json& j) {
    if (!j.is_object() || detail::need(j, "kind", "policy").get<std::string>() != "policy")
        throw ConfigError("policy: not a policy document");
    LoadedPolicy out;
    out.mode = detail::need(j, "mode", "policy").get<std::string>();
    out.hash = detail::need(j, "scenario_hash", "policy").get<std::string>();

    if (out.mode == "known") {
        detail::rounds_from_json(detail::need(j, "rounds", "policy"), out.known.estimate,
                                 out.known.value, out.known.q);
    } else if (out.mode == "offline") {
        out.offline.belief.p = detail::as_vec(detail::need(j, "belief", "policy"), "policy.belief");
        detail::rounds_from_json(detail::need(j, "rounds", "policy"), out.offline.estimate,
                                 out.offline.value, out.offline.q);
    } else if (out.mode == "online") {
        const json& rounds = detail::need(j, "rounds", "policy");
        if (!rounds.is_array() || rounds.empty())
            throw ConfigError("policy.rounds: expected a nonempty array");
        auto& p = out.online;
        const std::size_t n = rounds.size();
        p.graph.rounds.resize(n);
        p.graph.next.resize(n - 1);
        p.estimate.resize(n);
        p.value.resize(n);
        p.q.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const json& r = rounds[i];
            const std::string where = "policy.rounds[" + std::to_string(i) + "]";
            const json& nodes = detail::need(r, "nodes", where.c_str());
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                BeliefNode node;
                node.id = detail::as_int(detail::need(nodes[k], "id", where.c_str()),
                                         where + ".nodes.id");
                node.round = static_cast<int>(i);
                node.belief.p = detail::as_vec(detail::need(nodes[k], "belief", where.c_str()),
                                               where + ".nodes.belief");
                if (node.id != static_cast<int>(k))
                    throw ConfigError(where + ": node ids must be 0..count-1 in order");
                p.graph.rounds[i].push_back(std::move(node));
            }
            {
                const json& psi = detail::need(r, "psi", where.c_str());
                if (!psi.is_array()) throw ConfigError(where + ".psi: expected an array");
                for (const auto& per_node : psi) {
                    std::vector<int> row;
                    for (const auto& v : per_node) row.push_back(detail::as_int(v, where + ".psi"));
                    p.estimate[i].push_back(std::move(row));
                }
            }
            p.value[i] = detail::as_mat(detail::need(r, "v", where.c_str()), where + ".v");
            p.q[i] = detail::as_cube(detail::need(r, "q", where.c_str()), where + ".q");
            if (i + 1 < n) {
                const json& tr = detail::need(r, "transitions", where.c_str());
                if (!tr.is_array()) throw ConfigError(where + ".transitions: expected an array");
                for (const auto& per_node : tr) {
                    std::vector<std::vector<int>> nx;
                    for (const auto& per_x : per_node) {
                        std::vector<int> row;
                        for (const auto& v : per_x)
                            row.push_back(detail::as_int(v, where + ".transitions"));
                        nx.push_back(std::move(row));
                    }
                    p.graph.next[i].push_back(std::move(nx));
                }
            }
        }
    } else {
        throw ConfigError("policy.mode: unknown mode \"" + out.mode + "\"");
    }
    return out;
}

inline LoadedPolicy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open \"" + path + "\"");
    return policy_from_json(json::parse(in));
}

// ---------------------------------------------------------------------------
// Reports

inline json report_to_json(const oracle::EvaluationReport& r, const std::string& strategy_class,
                           const std::string& hash) {
    json j;
    j["kind"] = "report";
    j["mode"] = r.mode;
    j["loss"] = r.loss;
    j["stderr"] = r.std_error;
    j["samples"] = r.samples;
    if (r.seed) j["seed"] = *r.seed;
    j["strategy_class"] = strategy_class;
    j["scenario_hash"] = hash;
    return j;
}

// ---------------------------------------------------------------------------
// Loss-to-go CSV

namespace detail {

inline std::string csv_value(double v) {
    char tmp[40];
    std::snprintf(tmp, sizeof(tmp), "%.17g", v);
    return tmp;
}

}  // namespace detail

// Columns round,node,x,value with rounds labeled 1..n. Known and offline
// policies have a single implicit node 0 per round.
inline std::string loss_to_go_csv_known(const Scenario& s, const KnownPolicy& p) {
    std::string out = "round,node,x,value\n";
    for (int i = 0; i < s.n(); ++i) {
        for (int x = 0; x < s.nx(); ++x) {
            out += std::to_string(i + 1) + ",0," + std::to_string(x) + "," +
                   detail::csv_value(loss_to_go_known(s, p, i, x)) + "\n";
        }
    }
    return out;
}

inline std::string loss_to_go_csv_offline(const Scenario& s, const OfflinePolicy& p) {
    std::string out = "round,node,x,value\n";
    for (int i = 0; i < s.n(); ++i) {
        for (int x = 0; x < s.nx(); ++x) {
            out += std::to_string(i + 1) + ",0," + std::to_string(x) + "," +
                   detail::csv_value(loss_to_go_offline(s, p, i, x)) + "\n";
        }
    }
    return out;
}

inline std::string loss_to_go_csv_online(const Scenario& s, const OnlinePolicy& p) {
    std::string out = "round,node,x,value\n";
    for (int i = 0; i < s.n(); ++i) {
        for (const auto& node : p.graph.rounds[static_cast<std::size_t>(i)]) {
            for (int x = 0; x < s.nx(); ++x) {
                out += std::to_string(i + 1) + "," + std::to_string(node.id) + "," +
                       std::to_string(x) + "," +
                       detail::csv_value(loss_to_go_online(s, p, i, node.id, x)) + "\n";
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// File helpers

// Two-space indentation, sorted keys, trailing newline. Writing the same
// document twice yields byte-identical files.
inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write \"" + path + "\"");
    out << j.dump(2) << "\n";
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write \"" + path + "\"");
    out << text;
}

}  // namespace dynfer::io
