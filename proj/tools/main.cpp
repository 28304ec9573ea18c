// ftrlink run <config.json> [--out DIR] [--seed N] [--threads N] [--no-timing]
// ftrlink validate <config.json>
//
// exit codes: 0 ok, 2 bad config or infeasible request, 3 numerical failure

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <omp.h>

#include "CLI11.hpp"
#include "experiment.hpp"

namespace fs = std::filesystem;
using namespace ftrlink;

namespace {

std::string csv_name(const cli::Experiment& e, const std::string& config)
{
    if (!e.output.empty()) return e.output;
    return fs::path(config).stem().string() + ".csv";
}

int do_validate(const std::string& config)
{
    try {
        auto e = cli::parse_config(config);
        auto lines = cli::plan(e);
        std::cout << "ok\n";
        for (const auto& l : lines) std::cout << "  " << l << '\n';
        return 0;
    } catch (const cli::config_error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
}

int do_run(const std::string& config, const std::string& out_dir, long long seed, int threads, bool no_timing)
{
    cli::Experiment e;
    try {
        e = cli::parse_config(config);
        if (seed >= 0) e.seed = static_cast<std::uint64_t>(seed);
        if (no_timing) e.timing = false;
        cli::plan(e);
    } catch (const cli::config_error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }

    if (threads <= 0)
        if (const char* env = std::getenv("FTRLINK_THREADS")) threads = std::atoi(env);
    if (threads > 0) omp_set_num_threads(threads);

    cli::Table t;
    try {
        t = cli::run_experiment(e);
    } catch (const cli::config_error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "numerical failure: " << err.what() << '\n';
        return 3;
    }

    fs::path dir(out_dir.empty() ? "." : out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::path file = dir / csv_name(e, config);
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << file << '\n';
        return 2;
    }
    out << cli::format_csv(t);
    std::cout << file.string() << ": " << t.rows.size() << " rows\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"RIS and AF relay link statistics over FTR fading"};
    app.require_subcommand(1);

    std::string config, out_dir;
    long long seed = -1;
    int threads = 0;
    bool no_timing = false;

    auto* run = app.add_subcommand("run", "evaluate an experiment config and write its CSV");
    run->add_option("config", config, "experiment JSON")->required();
    run->add_option("--out", out_dir, "output directory (default: current)");
    run->add_option("--seed", seed, "override the config seed")->check(CLI::NonNegativeNumber);
    run->add_option("--threads", threads, "worker threads (also FTRLINK_THREADS)")->check(CLI::PositiveNumber);
    run->add_flag("--no-timing", no_timing, "leave the wall-time column empty");

    auto* val = app.add_subcommand("validate", "check a config without computing anything");
    val->add_option("config", config, "experiment JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int rc = app.exit(err);
        return rc == 0 ? 0 : 2;
    }

    if (*run) return do_run(config, out_dir, seed, threads, no_timing);
    return do_validate(config);
}
