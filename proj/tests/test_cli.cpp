// Drives the installed binary through every subcommand and checks the
// documented exit codes end to end.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace {

using json = nlohmann::json;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

RunResult run(const std::string& args) {
    const std::string out = "tmp_cli_stdout.txt";
    const std::string err = "tmp_cli_stderr.txt";
    const std::string cmd = std::string(DYNFER_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    std::remove(out.c_str());
    std::remove(err.c_str());
    return r;
}

std::string sample(const char* name) { return std::string(DYNFER_SAMPLES_DIR) + "/" + name; }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

}  // namespace

TEST_CASE("validate reports clean and broken configs", "[cli]") {
    REQUIRE(run("validate " + sample("sentry.json")).code == 0);
    REQUIRE(run("validate " + sample("assay.json")).out == "OK\n");

    write_file("tmp_cli_broken.json", "{ not json");
    auto bad = run("validate tmp_cli_broken.json");
    REQUIRE(bad.code == 1);
    std::remove("tmp_cli_broken.json");

    // Well-formed JSON, bad probabilities.
    json j = json::parse(slurp(sample("sentry.json")));
    j["init"] = {0.9, 0.0, 0.0};
    write_file("tmp_cli_invalid.json", j.dump());
    auto invalid = run("validate tmp_cli_invalid.json");
    REQUIRE(invalid.code == 2);
    REQUIRE(invalid.out.find("init") != std::string::npos);
    std::remove("tmp_cli_invalid.json");

    REQUIRE(run("validate no_such_file.json").code == 2);
}

TEST_CASE("solve writes policies for all three modes", "[cli]") {
    auto known = run("solve " + sample("sentry.json") + " known tmp_cli_known.json");
    REQUIRE(known.code == 0);
    REQUIRE(known.out.find("value = 0.766") != std::string::npos);
    auto kj = json::parse(slurp("tmp_cli_known.json"));
    REQUIRE(kj["kind"] == "policy");
    REQUIRE(kj["mode"] == "known");

    auto online = run("solve " + sample("assay.json") + " online tmp_cli_online.json");
    REQUIRE(online.code == 0);
    REQUIRE(online.out.find("reachable beliefs per round: 1 4") != std::string::npos);
    REQUIRE(online.out.find("value = 0.76") != std::string::npos);

    auto belief = run("solve " + sample("assay.json") +
                      " offline tmp_cli_offline.json --belief 0.5,0.5");
    REQUIRE(belief.code == 0);
    auto oj = json::parse(slurp("tmp_cli_offline.json"));
    REQUIRE(oj["mode"] == "offline");
    REQUIRE(oj["belief"] == json::array({0.5, 0.5}));

    REQUIRE(run("solve " + sample("assay.json") + " offline tmp_cli_x.json").code == 2);
    REQUIRE(run("solve " + sample("sentry.json") + " sideways tmp_cli_x.json").code == 2);
    REQUIRE(run("solve " + sample("sentry.json") + " offline tmp_cli_x.json --belief 1.0").code ==
            2);

    std::remove("tmp_cli_known.json");
    std::remove("tmp_cli_online.json");
    std::remove("tmp_cli_offline.json");
}

TEST_CASE("gen data chains into offline solving", "[cli]") {
    auto gen = run("gen-data " + sample("assay.json") +
                   " tmp_cli_data.json --w 0 --m 3 --seed 42");
    REQUIRE(gen.code == 0);
    auto dj = json::parse(slurp("tmp_cli_data.json"));
    REQUIRE(dj["kind"] == "dataset");
    REQUIRE(dj["m"] == 3);
    REQUIRE(dj["w"] == 0);
    REQUIRE(dj["seed"] == 42);
    REQUIRE(dj["pairs"].size() == 3);

    // Same seed, byte-identical file.
    auto first = slurp("tmp_cli_data.json");
    REQUIRE(run("gen-data " + sample("assay.json") +
                " tmp_cli_data.json --w 0 --m 3 --seed 42")
                .code == 0);
    REQUIRE(slurp("tmp_cli_data.json") == first);

    auto solved = run("solve " + sample("assay.json") +
                      " offline tmp_cli_offline.json tmp_cli_data.json");
    REQUIRE(solved.code == 0);
    REQUIRE(solved.out.find("value = ") != std::string::npos);

    REQUIRE(run("gen-data " + sample("assay.json") + " tmp_cli_x.json --w 9 --m 3 --seed 1")
                .code == 2);
    REQUIRE(run("gen-data " + sample("sentry.json") + " tmp_cli_x.json --w 0 --m 3 --seed 1")
                .code == 2);

    std::remove("tmp_cli_data.json");
    std::remove("tmp_cli_offline.json");
}

TEST_CASE("impossible datasets exit with the dedicated code", "[cli]") {
    // Member 0 never emits y=1 at x=0 and the prior rules member 1 out.
    json j = json::parse(slurp(sample("assay.json")));
    j["family"][0] = {{1.0, 0.0}, {0.6, 0.4}};
    j["prior"] = {1.0, 0.0};
    write_file("tmp_cli_point.json", j.dump());
    write_file("tmp_cli_bad_data.json",
               R"({"kind": "dataset", "m": 1, "pairs": [[0, 1]]})");

    auto r = run("solve tmp_cli_point.json offline tmp_cli_x.json tmp_cli_bad_data.json");
    REQUIRE(r.code == 5);

    std::remove("tmp_cli_point.json");
    std::remove("tmp_cli_bad_data.json");
}

TEST_CASE("evaluate checks hashes and writes reports", "[cli]") {
    REQUIRE(run("solve " + sample("sentry.json") + " known tmp_cli_pol.json").code == 0);

    auto exact = run("evaluate " + sample("sentry.json") +
                     " tmp_cli_pol.json --exact --out tmp_cli_rep.json");
    REQUIRE(exact.code == 0);
    const auto loss_at = exact.out.find("loss = ");
    REQUIRE(loss_at != std::string::npos);
    REQUIRE(std::stod(exact.out.substr(loss_at + 7)) == Catch::Approx(0.766).epsilon(1e-12));
    auto rj = json::parse(slurp("tmp_cli_rep.json"));
    REQUIRE(rj["kind"] == "report");
    REQUIRE(rj["mode"] == "exact");
    REQUIRE(rj["samples"] == 0);
    REQUIRE_FALSE(rj.contains("seed"));

    // Exact evaluation also drops the loss-to-go table next to the report.
    auto csv = slurp("tmp_cli_rep.json.csv");
    REQUIRE(csv.rfind("round,node,x,value\n", 0) == 0);

    auto mc = run("evaluate " + sample("sentry.json") +
                  " tmp_cli_pol.json --mc 5000 --seed 3 --out tmp_cli_mc.json");
    REQUIRE(mc.code == 0);
    auto mj = json::parse(slurp("tmp_cli_mc.json"));
    REQUIRE(mj["mode"] == "monte-carlo");
    REQUIRE(mj["samples"] == 5000);
    REQUIRE(mj["seed"] == 3);

    // Same seed, byte-identical report.
    auto first = slurp("tmp_cli_mc.json");
    REQUIRE(run("evaluate " + sample("sentry.json") +
                " tmp_cli_pol.json --mc 5000 --seed 3 --out tmp_cli_mc.json")
                .code == 0);
    REQUIRE(slurp("tmp_cli_mc.json") == first);

    // A policy solved for a different scenario is rejected by hash.
    auto mismatch = run("evaluate " + sample("assay.json") +
                        " tmp_cli_pol.json --exact --out tmp_cli_x.json");
    REQUIRE(mismatch.code == 3);

    // Exactly one evaluation flavor must be chosen.
    REQUIRE(run("evaluate " + sample("sentry.json") +
                " tmp_cli_pol.json --out tmp_cli_x.json")
                .code == 2);
    REQUIRE(run("evaluate " + sample("sentry.json") +
                " tmp_cli_pol.json --exact --mc 10 --out tmp_cli_x.json")
                .code == 2);

    std::remove("tmp_cli_pol.json");
    std::remove("tmp_cli_rep.json");
    std::remove("tmp_cli_rep.json.csv");
    std::remove("tmp_cli_mc.json");
}

TEST_CASE("offline evaluation cross checks dataset against stored belief", "[cli]") {
    REQUIRE(run("gen-data " + sample("assay.json") +
                " tmp_cli_d1.json --w 0 --m 3 --seed 11")
                .code == 0);
    REQUIRE(run("solve " + sample("assay.json") +
                " offline tmp_cli_opol.json tmp_cli_d1.json")
                .code == 0);

    REQUIRE(run("evaluate " + sample("assay.json") +
                " tmp_cli_opol.json tmp_cli_d1.json --exact --out tmp_cli_orep.json")
                .code == 0);

    // A different dataset yields a different posterior: rejected.
    REQUIRE(run("gen-data " + sample("assay.json") +
                " tmp_cli_d2.json --w 1 --m 3 --seed 99")
                .code == 0);
    REQUIRE(run("evaluate " + sample("assay.json") +
                " tmp_cli_opol.json tmp_cli_d2.json --exact --out tmp_cli_x.json")
                .code == 2);

    for (const char* f : {"tmp_cli_d1.json", "tmp_cli_d2.json", "tmp_cli_opol.json",
                          "tmp_cli_orep.json", "tmp_cli_orep.json.csv"})
        std::remove(f);
}

TEST_CASE("oracle compares brute force against the solver", "[cli]") {
    auto r = run("oracle " + sample("relay.json") + " --class history-known");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("brute force loss = ") != std::string::npos);
    REQUIRE(r.out.find("solver value = ") != std::string::npos);
    REQUIRE(r.out.find("difference = ") != std::string::npos);

    REQUIRE(run("oracle " + sample("assay.json") + " --class markov-online").code == 0);

    // The sentry history class needs 2^39 tables: over any sane cap.
    REQUIRE(run("oracle " + sample("sentry.json") + " --class history-known").code == 4);
    REQUIRE(run("oracle " + sample("relay.json") + " --class history-known --cap 3").code == 4);
    REQUIRE(run("oracle " + sample("relay.json") + " --class no-such-class").code == 2);
}

TEST_CASE("usage errors exit with the argument code", "[cli]") {
    REQUIRE(run("frobnicate x.json").code == 2);
    REQUIRE(run("solve").code == 2);
    REQUIRE(run("--help").code == 0);
}
