#pragma once

// Experiment configs for the command-line runner.  A config is a JSON
// document with one top-level "experiment" object; see configs/ for examples.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftrlink/monte_carlo.hpp"

namespace ftrlink::cli {

// anything wrong with the config itself; the runner exits with 2
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Sweep {
    std::string variable;
    std::vector<double> values;
};

struct RisSetup {
    RisLink link;
    double P_db = 0.0, noise_db = 0.0;
    bool uniform = true;         // all elements alike; L may be swept
    bool random_theta = false;   // draw θ1, θ2 from the experiment seed
    phase_mode phases = phase_mode::optimal;
    bool analytic = true;
};

struct AfSetup {
    AfLink link;
    double P1_db = 0.0, P2_db = 0.0, noise_db = 0.0;
    power_mode power = power_mode::any;
    hw_mode hardware = hw_mode::ideal;
    bool analytic = true;
};

struct OptimizerSetup {
    PhaseOptimizerConfig cfg;
    bool exact_oracle = true;
    int series_terms = -1;  // moment series for E[h g]; -1 = the experiment's series control
    int repeats = 1;        // random θ draws averaged per point
};

struct TruncationRow {
    std::size_t L = 1, N = 2;
    FtrParams hop;
    int M = 0;
    std::optional<double> reference;
};

struct Experiment {
    std::string kind;
    std::string comment;
    std::string output;  // CSV file name; empty = derived from the config name
    std::uint64_t seed = 1;
    std::size_t trials = 100000;
    bool timing = true;
    SeriesControl ctrl;
    mb_options contour;

    std::string statistic = "cdf";  // ftr-stats, product-stats
    std::vector<FtrParams> chain;   // ftr-stats uses the first hop
    std::vector<TruncationRow> rows;
    std::optional<RisSetup> ris;
    std::optional<AfSetup> af;
    std::optional<OptimizerSetup> optimizer;

    std::string metric;      // op or abep for compare and mc-validate
    std::string system;      // ris or af for mc-validate
    double gamma_th_db = 0.0;
    double p = 0.5, q = 1.0;
    Sweep sweep;
};

// parse and check the schema; line-precise messages for malformed JSON
Experiment parse_config_text(const std::string& text, const std::string& name);
Experiment parse_config(const std::string& path);

// feasibility check without computing anything; returns the planned evaluations
std::vector<std::string> plan(const Experiment& e);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // NaN = empty cell
};

// numerical failures propagate as the library's exceptions
Table run_experiment(const Experiment& e);

// 17 significant digits, NaN as an empty field
std::string format_csv(const Table& t);

double from_db(double db);

}  // namespace ftrlink::cli
