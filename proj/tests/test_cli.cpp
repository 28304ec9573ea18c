#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "experiment.hpp"

using namespace ftrlink;
namespace fs = std::filesystem;

namespace {

fs::path scratch()
{
    fs::path d = fs::temp_directory_path() / "ftrlink_cli_test";
    fs::create_directories(d);
    return d;
}

fs::path write(const std::string& name, const std::string& text)
{
    fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

int run_cli(const std::string& args)
{
    std::string cmd = std::string(FTRLINK_CLI) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& text)
{
    try {
        cli::plan(cli::parse_config_text(text, "cfg.json"));
    } catch (const cli::config_error& e) {
        return e.what();
    }
    return "";
}

const char* hop = R"({"m": 5, "K": 3, "delta": 0.5, "sigma2": 0.5})";

}  // namespace

TEST_CASE("malformed JSON reports line and column")
{
    std::string msg = error_of("{\n  \"experiment\": {\n    \"kind\": \"ftr-stats\",,\n  }\n}\n");
    CHECK(msg.find("cfg.json:3:") == 0);
}

TEST_CASE("schema errors name the field")
{
    CHECK(error_of(R"({"experiment": {"kind": "nope"}})").find("experiment.kind") != std::string::npos);
    CHECK(error_of(R"({"other": 1})").find("top-level") != std::string::npos);
    std::string bad_trials = std::string(R"({"experiment": {"kind": "ftr-stats", "trials": 10, "hop": )") + hop +
                             R"(, "sweep": {"variable": "x", "values": [1]}}})";
    CHECK(error_of(bad_trials).find("experiment.trials") != std::string::npos);

    std::string no_hw = std::string(R"({"experiment": {"kind": "af-op", "af": {"hop1": )") + hop + R"(, "hop2": )" + hop +
                        R"(, "P_db": 10, "hardware_mode": "impaired"}, "sweep": {"variable": "P_db", "values": [10]}}})";
    CHECK(error_of(no_hw).find("experiment.af.hardware") != std::string::npos);

    std::string wrong_var = std::string(R"({"experiment": {"kind": "ftr-stats", "hop": )") + hop +
                            R"(, "sweep": {"variable": "P_db", "values": [1]}}})";
    CHECK(error_of(wrong_var).find("experiment.sweep.variable") != std::string::npos);
}

TEST_CASE("closed-form dimension cap")
{
    std::string cfg = std::string(R"({"experiment": {"kind": "ris-op", "ris": {"L": 8, "h": )") + hop + R"(, "g": )" + hop +
                      R"(}, "sweep": {"variable": "P_db", "values": [0, 10]}}})";
    std::string msg = error_of(cfg);
    CHECK(msg.find("L <= 4") != std::string::npos);
    CHECK(msg.find("mc-validate") != std::string::npos);

    // the same surface without the analytic column is fine
    std::string mc = cfg;
    mc.replace(mc.find("\"L\": 8"), 6, "\"L\": 8, \"analytic\": false");
    CHECK(error_of(mc).empty());
}

TEST_CASE("validate lists the planned work")
{
    auto e = cli::parse_config(CONFIG_DIR "/fig7_op_power_af_optimal.json");
    auto lines = cli::plan(e);
    REQUIRE(lines.size() >= 3);
    CHECK(lines[1].find("13 points") != std::string::npos);
    CHECK(run_cli("validate " CONFIG_DIR "/fig7_op_power_af_optimal.json") == 0);
}

TEST_CASE("exit codes")
{
    fs::path out = scratch() / "empty_out";
    fs::remove_all(out);
    auto empty = write("empty.json", std::string(R"({"experiment": {"kind": "ftr-stats", "hop": )") + hop +
                                         R"(, "sweep": {"variable": "x", "from": 1, "to": 2, "points": 0}}})");
    CHECK(run_cli("run " + empty.string() + " --out " + out.string()) == 2);
    CHECK(!fs::exists(out / "empty.csv"));
    CHECK(run_cli("validate " + empty.string()) == 2);
    CHECK(run_cli("run /nonexistent.json") == 2);
    CHECK(run_cli("bogus") == 2);

    // a fixed contour grid too coarse for the requested accuracy is a numerical failure
    auto tight = write("tight.json", std::string(R"({"experiment": {"kind": "product-stats", "statistic": "pdf",)") +
                                         R"("contour": {"rel_tol": 1e-12, "resolution": 16}, "hops": [)" + hop + "," + hop +
                                         R"(], "sweep": {"variable": "x", "values": [1.0]}}})");
    CHECK(run_cli("run " + tight.string() + " --out " + out.string()) == 3);
    CHECK(!fs::exists(out / "tight.csv"));
}

TEST_CASE("truncation table")
{
    auto t = cli::run_experiment(cli::parse_config(CONFIG_DIR "/table2_truncation.json"));
    REQUIRE(t.rows.size() == 4);
    CHECK(t.header[0] == "row");
    // first row matches its reference to two significant figures
    CHECK(std::fabs(t.rows[0][1] - 6.52e-6) < 0.005e-5);
}

TEST_CASE("reruns are byte-identical")
{
    fs::path out = scratch() / "rerun";
    fs::remove_all(out);
    std::string cfg = CONFIG_DIR "/compare_single_point.json";
    REQUIRE(run_cli("run " + cfg + " --no-timing --out " + (out / "a").string()) == 0);
    REQUIRE(run_cli("run " + cfg + " --no-timing --threads 2 --out " + (out / "b").string()) == 0);
    std::string a = slurp(out / "a" / "compare_single_point.csv"), b = slurp(out / "b" / "compare_single_point.csv");
    CHECK(!a.empty());
    CHECK(a == b);

    // both systems side by side with the overlap flag
    auto t = cli::run_experiment(cli::parse_config(cfg));
    REQUIRE(t.rows.size() == 1);
    CHECK(t.header.back() == "overlap");
    CHECK(t.rows[0].size() == t.header.size());
    CHECK((t.rows[0].back() == 0.0 || t.rows[0].back() == 1.0));

    // a different seed changes the Monte Carlo columns
    REQUIRE(run_cli("run " + cfg + " --no-timing --seed 99 --out " + (out / "c").string()) == 0);
    CHECK(slurp(out / "c" / "compare_single_point.csv") != a);
}

TEST_CASE("CSV formatting")
{
    cli::Table t{{"x", "y"}, {{0.1, std::nan("")}, {1.0 / 3.0, 2.0}}};
    CHECK(cli::format_csv(t) == "x,y\n0.10000000000000001,\n0.33333333333333331,2\n");
}
