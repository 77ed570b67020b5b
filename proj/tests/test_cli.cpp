#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const std::string cmd = env_prefix + PATHCALC_CLI_PATH + " " + args;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) result.out.append(buf, got);
    const int status = pclose(pipe);
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string strip_timestamp(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("generated_at") == std::string::npos) out << line << '\n';
    }
    return out.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("usage errors exit with code one") {
    REQUIRE(run_cli("2>/dev/null").code == 1);
    REQUIRE(run_cli("--help >/dev/null 2>&1").code == 0);
    REQUIRE(run_cli("tanaka --nope 2>/dev/null").code == 1);
    REQUIRE(run_cli("ito --functional nope --paths 2 --steps 64 2>/dev/null").code == 1);

    RunResult bad = run_cli("tanaka --convention bogus --paths 2 --steps 100 2>&1");
    REQUIRE(bad.code == 1);
    REQUIRE(bad.out.find("error: unknown convention: bogus") != std::string::npos);

    REQUIRE(run_cli("tanaka --checkpoints '' --paths 2 --steps 64 2>/dev/null").code == 0);
    REQUIRE(run_cli("maxmart --checkpoints '9' --paths 4 --steps 64 2>/dev/null").code == 1);
    REQUIRE(run_cli("simulate --config /nope/missing.json 2>/dev/null").code == 1);
}

TEST_CASE("exact identity run emits recomposable json") {
    RunResult r = run_cli("ito --functional quadratic_variation --steps 200 --paths 4 --seed 2 2>/dev/null");
    REQUIRE(r.code == 0);

    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.at("schema_version") == 1);
    REQUIRE(j.at("identity") == "functional_ito_ensemble");
    REQUIRE(j.at("pass") == true);
    REQUIRE(j.contains("generated_at"));

    double rhs = 0.0;
    for (const auto& t : j.at("terms")) rhs += t.at("value").get<double>();
    REQUIRE(rhs == j.at("rhs").get<double>());
    REQUIRE(j.at("lhs").get<double>() - rhs == j.at("residual").get<double>());
}

TEST_CASE("failed gates exit with code two") {
    REQUIRE(run_cli("maxmart --paths 400 --steps 400 --seed 1 >/dev/null 2>&1").code == 0);
    REQUIRE(run_cli("maxmart --kind drifted_brownian --mu 1 --paths 200 --steps 200 --seed 1 "
                    ">/dev/null 2>&1").code == 2);
}

TEST_CASE("output is identical across thread counts") {
    const std::string args = "tanaka --paths 8 --steps 500 --seed 3";
    RunResult one = run_cli(args + " --threads 1 2>/dev/null");
    RunResult three = run_cli(args + " --threads 3 2>/dev/null");
    REQUIRE(one.code == 0);
    REQUIRE(three.code == 0);
    REQUIRE(strip_timestamp(one.out) == strip_timestamp(three.out));
}

TEST_CASE("seed precedence: flag beats config beats environment") {
    const std::string cfg = std::string(PATHCALC_CLI_PATH) + "_test_config.json";
    {
        std::ofstream out(cfg);
        out << R"({"seed": 5, "steps": 6, "paths": 2})";
    }
    auto seed_of = [](const RunResult& r) {
        return nlohmann::json::parse(r.out).at("seed").get<std::uint64_t>();
    };

    REQUIRE(seed_of(run_cli("simulate --config " + cfg + " 2>/dev/null")) == 5);
    REQUIRE(seed_of(run_cli("simulate --config " + cfg + " --seed 9 2>/dev/null")) == 9);
    REQUIRE(seed_of(run_cli("simulate --steps 6 --paths 2 2>/dev/null",
                            "PATHCALC_SEED=123 ")) == 123);
    REQUIRE(seed_of(run_cli("simulate --config " + cfg + " 2>/dev/null",
                            "PATHCALC_SEED=123 ")) == 5);
    std::remove(cfg.c_str());
}

TEST_CASE("simulate csv has one column per path and one row per knot") {
    RunResult r = run_cli("simulate --steps 8 --paths 3 --format csv --seed 4 2>/dev/null");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("t,x0,x1,x2\n", 0) == 0);
    REQUIRE(count_lines(r.out) == 10);

    RunResult again = run_cli("simulate --steps 8 --paths 3 --format csv --seed 4 2>/dev/null");
    REQUIRE(again.out == r.out);
}

TEST_CASE("smoothing ladder csv") {
    RunResult r = run_cli("mollify-report --functional terminal_value --steps 64 --seed 7 "
                          "--format csv 2>/dev/null");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("n,f_n,dx_f_n,gap_to_f\n", 0) == 0);
    REQUIRE(count_lines(r.out) == 9);
}

TEST_CASE("output file lands on disk") {
    const std::string path = std::string(PATHCALC_CLI_PATH) + "_test_out.json";
    RunResult r = run_cli("condition-h --psi square --out " + path + " 2>/dev/null");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.empty());
    std::ifstream in(path);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    REQUIRE(j.at("identity") == "martingale_shape_conditions");
    REQUIRE(j.at("pass") == true);
    std::remove(path.c_str());
}
