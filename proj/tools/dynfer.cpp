// Command-line front end: validate configs, solve instances, evaluate
// policies, cross-check solver output against brute-force search, and
// sample datasets.
//
// Exit codes:
//   0  success
//   1  malformed JSON (unparseable input file)
//   2  structural or semantic rejection (schema, validation, bad arguments)
//   3  scenario hash mismatch between a policy file and the config
//   4  an enumeration or node cap was exceeded
//   5  impossible data (dataset or observation with zero probability)

#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynfer/dynfer.hpp"

namespace {

using dynfer::Belief;
using dynfer::Dataset;
using dynfer::Scenario;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Scenario load_checked(const std::string& path) {
    Scenario s = dynfer::io::load_scenario(path);
    auto res = dynfer::validate_scenario(s);
    if (!res.ok()) {
        for (const auto& v : res.violations) std::fprintf(stderr, "%s\n", v.text().c_str());
        throw dynfer::ValidationError("scenario rejected with " +
                                      std::to_string(res.violations.size()) + " violation(s)");
    }
    return s;
}

int cmd_validate(const std::string& config) {
    Scenario s = dynfer::io::load_scenario(config);
    auto res = dynfer::validate_scenario(s);
    if (res.ok()) {
        std::printf("OK\n");
        return 0;
    }
    for (const auto& v : res.violations) std::printf("%s\n", v.text().c_str());
    return 2;
}

int cmd_solve(const std::string& config, const std::string& mode, const std::string& out,
              const std::string& dataset_path, const std::vector<double>& belief_arg,
              long long node_cap) {
    Scenario s = load_checked(config);
    const std::string hash = dynfer::io::scenario_hash(s);

    if (mode == "known") {
        if (!dataset_path.empty() || !belief_arg.empty())
            throw std::invalid_argument("solve: known mode takes no dataset or belief");
        auto p = dynfer::solve_known(s);
        dynfer::io::write_json_file(out, dynfer::io::known_policy_to_json(p, hash));
        std::printf("value = %s\n", fmt17(dynfer::value_known(s, p)).c_str());
        return 0;
    }
    if (mode == "offline") {
        if (dataset_path.empty() == belief_arg.empty())
            throw std::invalid_argument("solve: offline mode needs exactly one of a dataset "
                                        "file or --belief");
        dynfer::OfflinePolicy p;
        if (!dataset_path.empty()) {
            Dataset d = dynfer::io::load_dataset(dataset_path);
            p = dynfer::offline_pipeline(s, d);
        } else {
            p = dynfer::solve_offline(s, Belief{belief_arg});
        }
        dynfer::io::write_json_file(out, dynfer::io::offline_policy_to_json(p, hash));
        std::printf("value = %s\n", fmt17(dynfer::value_offline(s, p)).c_str());
        return 0;
    }
    if (mode == "online") {
        if (!dataset_path.empty() || !belief_arg.empty())
            throw std::invalid_argument("solve: online mode takes no dataset or belief");
        auto p = dynfer::solve_online(s, node_cap);
        dynfer::io::write_json_file(out, dynfer::io::online_policy_to_json(p, hash));
        std::printf("reachable beliefs per round:");
        for (int c : p.graph.node_counts()) std::printf(" %d", c);
        std::printf("\n");
        std::printf("value = %s\n", fmt17(dynfer::value_online(s, p)).c_str());
        return 0;
    }
    throw std::invalid_argument("solve: unknown mode '" + mode +
                                "' (expected known, offline, or online)");
}

int cmd_evaluate(const std::string& config, const std::string& policy_path,
                 const std::string& dataset_path, bool exact, long long mc_samples,
                 std::uint64_t seed, const std::string& out, std::string csv) {
    Scenario s = load_checked(config);
    const std::string hash = dynfer::io::scenario_hash(s);
    dynfer::io::LoadedPolicy p = dynfer::io::load_policy(policy_path);
    if (p.hash != hash) {
        std::fprintf(stderr,
                     "scenario hash mismatch: policy was solved for %s, config hashes to %s\n",
                     p.hash.c_str(), hash.c_str());
        return 3;
    }
    if (exact == (mc_samples > 0))
        throw std::invalid_argument("evaluate: pass exactly one of --exact or --mc N");

    dynfer::oracle::StrategyTable table;
    const Belief* belief = nullptr;
    if (p.mode == "known") {
        table = dynfer::oracle::strategy_from_known(p.known);
    } else if (p.mode == "offline") {
        table = dynfer::oracle::strategy_from_offline(p.offline);
        belief = &p.offline.belief;
        if (!dataset_path.empty()) {
            Dataset d = dynfer::io::load_dataset(dataset_path);
            Belief post = dynfer::posterior_from_dataset(*s.family, *s.prior, d);
            if (!dynfer::detail::belief_close(post, p.offline.belief, dynfer::kBeliefTol))
                throw std::invalid_argument(
                    "evaluate: dataset posterior disagrees with the policy's stored belief");
        }
    } else {
        table = dynfer::oracle::strategy_from_online(s, p.online);
    }
    if (p.mode != "offline" && !dataset_path.empty())
        throw std::invalid_argument("evaluate: a dataset only applies to offline policies");

    dynfer::oracle::EvaluationReport rep;
    if (exact) {
        rep.mode = "exact";
        rep.loss = belief ? dynfer::oracle::exact_loss_given_belief(s, table, *belief)
                          : dynfer::oracle::exact_loss(s, table);
        rep.std_error = 0.0;
        rep.samples = 0;
    } else {
        rep = belief ? dynfer::oracle::monte_carlo_loss_given_belief(s, table, mc_samples, seed,
                                                                     *belief)
                     : dynfer::oracle::monte_carlo_loss(s, table, mc_samples, seed);
    }
    dynfer::io::write_json_file(
        out, dynfer::io::report_to_json(rep, dynfer::oracle::to_string(table.cls), hash));

    if (exact) {
        if (csv.empty()) csv = out + ".csv";
        std::string body;
        if (p.mode == "known")
            body = dynfer::io::loss_to_go_csv_known(s, p.known);
        else if (p.mode == "offline")
            body = dynfer::io::loss_to_go_csv_offline(s, p.offline);
        else
            body = dynfer::io::loss_to_go_csv_online(s, p.online);
        dynfer::io::write_text_file(csv, body);
        std::printf("loss = %s\n", fmt17(rep.loss).c_str());
    } else {
        std::printf("loss = %s stderr = %s\n", fmt17(rep.loss).c_str(),
                    fmt17(rep.std_error).c_str());
    }
    return 0;
}

int cmd_oracle(const std::string& config, const std::string& cls_name,
               const std::string& dataset_path, double strategy_cap, long long node_cap) {
    Scenario s = load_checked(config);
    auto cls_opt = dynfer::oracle::parse_strategy_class(cls_name);
    if (!cls_opt)
        throw std::invalid_argument("oracle: unknown strategy class '" + cls_name + "'");
    auto cls = *cls_opt;

    std::optional<Dataset> d;
    if (!dataset_path.empty()) d = dynfer::io::load_dataset(dataset_path);

    double brute = dynfer::oracle::brute_force_optimum(s, cls, d ? &*d : nullptr, strategy_cap,
                                                       node_cap)
                       .second;

    double solver = 0.0;
    if (dynfer::oracle::is_known_class(cls)) {
        solver = dynfer::value_known(s, dynfer::solve_known(s));
    } else if (dynfer::oracle::is_offline_class(cls)) {
        Dataset empty;
        auto p = dynfer::offline_pipeline(s, d ? *d : empty);
        solver = dynfer::value_offline(s, p);
    } else {
        solver = dynfer::value_online(s, dynfer::solve_online(s, node_cap));
    }

    double diff = std::abs(brute - solver);
    std::printf("brute force loss = %s\n", fmt17(brute).c_str());
    std::printf("solver value = %s\n", fmt17(solver).c_str());
    std::printf("difference = %s\n", fmt17(diff).c_str());
    return diff <= 1e-9 ? 0 : 2;
}

int cmd_gen_data(const std::string& config, const std::string& out, int w, int m,
                 std::uint64_t seed) {
    Scenario s = load_checked(config);
    Dataset d = dynfer::generate_dataset(s, w, m, seed);
    dynfer::io::write_json_file(out, dynfer::io::dataset_to_json(d, w, seed));
    std::printf("wrote %s (w = %d, m = %d, seed = %llu)\n", out.c_str(), w, m,
                static_cast<unsigned long long>(seed));
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"finite dynamic inference: solve, evaluate, and cross-check"};
    app.require_subcommand(1);

    std::string config, out, dataset, policy, mode, cls, csv;
    std::vector<double> belief;
    long long mc_samples = 0, node_cap = 1000000;
    double strategy_cap = 10000000.0;
    std::uint64_t seed = 0;
    int w = 0, m = 0;
    bool exact = false;

    auto* validate = app.add_subcommand("validate", "check a scenario config");
    validate->add_option("config", config, "scenario config file")->required();

    auto* solve = app.add_subcommand("solve", "solve a scenario and write a policy file");
    solve->add_option("config", config, "scenario config file")->required();
    solve->add_option("mode", mode, "known, offline, or online")->required();
    solve->add_option("out", out, "policy output file")->required();
    solve->add_option("dataset", dataset, "dataset file (offline mode)");
    solve->add_option("--belief", belief, "belief weights (offline mode, comma separated)")
        ->delimiter(',');
    solve->add_option("--node-cap", node_cap, "belief node cap per round (online mode)");

    auto* evaluate = app.add_subcommand("evaluate", "evaluate a stored policy");
    evaluate->add_option("config", config, "scenario config file")->required();
    evaluate->add_option("policy", policy, "policy file")->required();
    evaluate->add_option("dataset", dataset, "dataset consistency check (offline policies)");
    evaluate->add_flag("--exact", exact, "exact expected loss");
    evaluate->add_option("--mc", mc_samples, "Monte Carlo sample count");
    evaluate->add_option("--seed", seed, "Monte Carlo seed");
    evaluate->add_option("--out", out, "report output file")->required();
    evaluate->add_option("--csv", csv, "loss-to-go table output (exact mode)");

    auto* oracle = app.add_subcommand("oracle",
                                      "brute-force a strategy class and compare to the solver");
    oracle->add_option("config", config, "scenario config file")->required();
    oracle->add_option("dataset", dataset, "dataset file (offline classes)");
    oracle->add_option("--class", cls, "strategy class")->required();
    oracle->add_option("--cap", strategy_cap, "strategy enumeration cap");
    oracle->add_option("--node-cap", node_cap, "belief node cap per round");

    auto* gen = app.add_subcommand("gen-data", "sample a dataset from one family member");
    gen->add_option("config", config, "scenario config file")->required();
    gen->add_option("out", out, "dataset output file")->required();
    gen->add_option("--w", w, "family member index")->required();
    gen->add_option("--m", m, "dataset size")->required();
    gen->add_option("--seed", seed, "sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    if (validate->parsed()) return cmd_validate(config);
    if (solve->parsed()) return cmd_solve(config, mode, out, dataset, belief, node_cap);
    if (evaluate->parsed())
        return cmd_evaluate(config, policy, dataset, exact, mc_samples, seed, out, csv);
    if (oracle->parsed()) return cmd_oracle(config, cls, dataset, strategy_cap, node_cap);
    if (gen->parsed()) return cmd_gen_data(config, out, w, m, seed);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const nlohmann::json::parse_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const dynfer::CapExceeded& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 4;
    } catch (const dynfer::ImpossibleDataset& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 5;
    } catch (const dynfer::ImpossibleObservation& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
}
