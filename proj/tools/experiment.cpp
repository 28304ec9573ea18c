#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace ftrlink::cli {

namespace {

using json = nlohmann::json;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(const std::string& path, const std::string& msg)
{
    throw config_error(path + ": " + msg);
}

const json* find(const json& o, const char* key)
{
    auto it = o.find(key);
    return it == o.end() ? nullptr : &*it;
}

double get_num(const json& o, const char* key, const std::string& path, std::optional<double> def = {})
{
    const json* v = find(o, key);
    if (!v) {
        if (def) return *def;
        fail(path + "." + key, "missing");
    }
    if (!v->is_number()) fail(path + "." + key, "expected a number");
    double x = v->get<double>();
    if (!std::isfinite(x)) fail(path + "." + key, "not finite");
    return x;
}

long long get_int(const json& o, const char* key, const std::string& path, std::optional<long long> def = {})
{
    const json* v = find(o, key);
    if (!v) {
        if (def) return *def;
        fail(path + "." + key, "missing");
    }
    if (!v->is_number_integer()) fail(path + "." + key, "expected an integer");
    return v->get<long long>();
}

std::string get_str(const json& o, const char* key, const std::string& path, std::optional<std::string> def = {})
{
    const json* v = find(o, key);
    if (!v) {
        if (def) return *def;
        fail(path + "." + key, "missing");
    }
    if (!v->is_string()) fail(path + "." + key, "expected a string");
    return v->get<std::string>();
}

bool get_bool(const json& o, const char* key, const std::string& path, bool def)
{
    const json* v = find(o, key);
    if (!v) return def;
    if (!v->is_boolean()) fail(path + "." + key, "expected true or false");
    return v->get<bool>();
}

std::string pick(const json& o, const char* key, const std::string& path, std::vector<std::string> allowed)
{
    std::string s = get_str(o, key, path, allowed.front());
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(path + "." + key, "\"" + s + "\" is not one of " + list);
    }
    return s;
}

std::vector<double> get_array(const json& o, const char* key, const std::string& path)
{
    const json* v = find(o, key);
    if (!v || !v->is_array()) fail(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : *v) {
        if (!x.is_number()) fail(path + "." + key, "expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

const json& block(const json& o, const char* key, const std::string& path)
{
    const json* v = find(o, key);
    if (!v) fail(path + "." + key, "missing block");
    if (!v->is_object()) fail(path + "." + key, "expected an object");
    return *v;
}

// m, K, delta plus one of sigma2, upsilon, upsilon_db
FtrParams parse_hop(const json& o, const std::string& path)
{
    if (!o.is_object()) fail(path, "expected an object");
    FtrParams p;
    p.m = get_num(o, "m", path);
    p.K = get_num(o, "K", path);
    p.delta = get_num(o, "delta", path);
    int scales = (find(o, "sigma2") != nullptr) + (find(o, "upsilon") != nullptr) + (find(o, "upsilon_db") != nullptr);
    if (scales != 1) fail(path, "give exactly one of sigma2, upsilon, upsilon_db");
    if (find(o, "sigma2")) {
        p.sigma2 = get_num(o, "sigma2", path);
    } else {
        double u = find(o, "upsilon") ? get_num(o, "upsilon", path) : from_db(get_num(o, "upsilon_db", path));
        if (!(u > 0.0)) fail(path, "upsilon must be positive");
        p.sigma2 = u / (2.0 * (1.0 + p.K));
    }
    try {
        p.validate();
    } catch (const domain_error& e) {
        fail(path, e.what());
    }
    return p;
}

Sweep parse_sweep(const json& o, const std::string& path)
{
    Sweep s;
    s.variable = get_str(o, "variable", path);
    if (find(o, "values")) {
        s.values = get_array(o, "values", path);
    } else {
        double a = get_num(o, "from", path), b = get_num(o, "to", path);
        long long n = get_int(o, "points", path);
        bool log = pick(o, "scale", path, {"linear", "log"}) == "log";
        if (n < 1) fail(path, "empty range (points must be at least 1)");
        if (log && !(a > 0.0 && b > 0.0)) fail(path, "log scale needs positive end points");
        for (long long i = 0; i < n; ++i) {
            double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            s.values.push_back(log ? a * std::pow(b / a, t) : a + (b - a) * t);
        }
    }
    if (s.values.empty()) fail(path, "empty range");
    return s;
}

RisSetup parse_ris(const json& o, const std::string& path)
{
    RisSetup r;
    if (find(o, "elements")) {
        const json& el = o["elements"];
        if (!el.is_array() || el.empty()) fail(path + ".elements", "expected a non-empty array");
        for (std::size_t i = 0; i < el.size(); ++i) {
            std::string p = path + ".elements[" + std::to_string(i) + "]";
            r.link.elements.push_back({parse_hop(block(el[i], "h", p), p + ".h"), parse_hop(block(el[i], "g", p), p + ".g")});
        }
        r.uniform = false;
    } else {
        long long L = get_int(o, "L", path);
        if (L < 1) fail(path + ".L", "must be at least 1");
        r.link = RisLink::uniform(static_cast<std::size_t>(L), parse_hop(block(o, "h", path), path + ".h"),
                                  parse_hop(block(o, "g", path), path + ".g"));
    }
    const std::size_t L = r.link.size();
    r.link.theta1.assign(L, 0.0);
    r.link.theta2.assign(L, 0.0);
    r.link.phi.assign(L, 0.0);
    if (find(o, "theta") && o["theta"].is_string()) {
        r.random_theta = pick(o, "theta", path, {"zero", "random"}) == "random";
    } else {
        for (const char* key : {"theta1", "theta2", "phi"}) {
            if (!find(o, key)) continue;
            auto v = get_array(o, key, path);
            if (v.size() != L) fail(path + "." + key, "needs one entry per element");
            (key[0] == 'p' ? r.link.phi : key[5] == '1' ? r.link.theta1 : r.link.theta2) = v;
        }
    }
    r.P_db = get_num(o, "P_db", path, 0.0);
    r.noise_db = get_num(o, "noise_db", path, 0.0);
    r.link.P = from_db(r.P_db);
    r.link.noise = from_db(r.noise_db);
    r.phases = pick(o, "phases", path, {"optimal", "given"}) == "optimal" ? phase_mode::optimal : phase_mode::given;
    r.analytic = get_bool(o, "analytic", path, true);
    return r;
}

AfSetup parse_af(const json& o, const std::string& path)
{
    AfSetup a;
    a.link.hop1 = parse_hop(block(o, "hop1", path), path + ".hop1");
    a.link.hop2 = parse_hop(block(o, "hop2", path), path + ".hop2");
    if (find(o, "P_db")) {
        a.P1_db = a.P2_db = get_num(o, "P_db", path);
    } else {
        a.P1_db = get_num(o, "P1_db", path);
        a.P2_db = get_num(o, "P2_db", path);
    }
    a.noise_db = get_num(o, "noise_db", path, 0.0);
    a.link.P1 = from_db(a.P1_db);
    a.link.P2 = from_db(a.P2_db);
    a.link.noise = from_db(a.noise_db);
    a.power = pick(o, "power", path, {"fixed", "optimal"}) == "optimal" ? power_mode::optimal : power_mode::any;
    a.hardware = pick(o, "hardware_mode", path, {"ideal", "impaired"}) == "impaired" ? hw_mode::impaired : hw_mode::ideal;
    if (a.hardware == hw_mode::impaired) {
        if (!find(o, "hardware")) fail(path + ".hardware", "required when hardware_mode is \"impaired\"");
        const json& h = block(o, "hardware", path);
        a.link.hardware.kappa1 = get_num(h, "kappa1", path + ".hardware");
        a.link.hardware.kappa2 = get_num(h, "kappa2", path + ".hardware");
        try {
            a.link.hardware.validate();
        } catch (const domain_error& e) {
            fail(path + ".hardware", e.what());
        }
    }
    a.analytic = get_bool(o, "analytic", path, true);
    return a;
}

const std::vector<std::string> kinds{"ftr-stats", "product-stats", "truncation-table", "optimize-phases", "ris-op",
                                     "ris-abep", "af-op", "af-abep", "compare", "mc-validate"};

std::vector<std::string> sweep_variables(const Experiment& e)
{
    const std::string& k = e.kind;
    if (k == "ftr-stats" || k == "product-stats") return {"x"};
    if (k == "truncation-table") return {};
    if (k == "optimize-phases") return {"M1", "M2", "L"};
    std::vector<std::string> v{"P_db", "upsilon_db", "noise_db"};
    bool op = k == "ris-op" || k == "af-op" || ((k == "compare" || k == "mc-validate") && e.metric == "op");
    if (op) v.push_back("gamma_th_db");
    if (e.ris && e.ris->uniform) v.push_back("L");
    return v;
}

std::string path_of(const std::string& name) { return name.empty() ? "experiment" : name + ": experiment"; }

void set_upsilon(FtrParams& p, double db) { p.sigma2 = from_db(db) / (2.0 * (1.0 + p.K)); }

struct Point {
    std::optional<RisSetup> ris;
    std::optional<AfSetup> af;
    double gamma_th = 1.0;
    PhaseOptimizerConfig opt;
};

Point at(const Experiment& e, double v)
{
    Point pt{e.ris, e.af, from_db(e.gamma_th_db), e.optimizer ? e.optimizer->cfg : PhaseOptimizerConfig{}};
    const std::string& var = e.sweep.variable;
    if (var == "P_db") {
        if (pt.ris) pt.ris->link.P = from_db(v);
        if (pt.af) pt.af->link.P1 = pt.af->link.P2 = from_db(v);
    } else if (var == "noise_db") {
        if (pt.ris) pt.ris->link.noise = from_db(v);
        if (pt.af) pt.af->link.noise = from_db(v);
    } else if (var == "upsilon_db") {
        if (pt.ris)
            for (auto& el : pt.ris->link.elements) {
                set_upsilon(el.h, v);
                set_upsilon(el.g, v);
            }
        if (pt.af) {
            set_upsilon(pt.af->link.hop1, v);
            set_upsilon(pt.af->link.hop2, v);
        }
    } else if (var == "gamma_th_db") {
        pt.gamma_th = from_db(v);
    } else if (var == "L") {
        auto& l = pt.ris->link;
        const auto L = static_cast<std::size_t>(v);
        l = RisLink::uniform(L, l.elements[0].h, l.elements[0].g, l.P, l.noise);
    } else if (var == "M1") {
        pt.opt.M1 = static_cast<int>(v);
    } else if (var == "M2") {
        pt.opt.M2 = static_cast<int>(v);
    }
    return pt;
}

std::size_t max_L(const Experiment& e)
{
    if (!e.ris) return 0;
    std::size_t L = e.ris->link.size();
    if (e.sweep.variable == "L")
        for (double v : e.sweep.values) L = std::max(L, static_cast<std::size_t>(v));
    return L;
}

double ris_eps(const RisLink& l, const SeriesControl& c)
{
    ChainBank b = l.bank();
    return truncation_error(b, truncation_index(b.all_hops(), c));
}

double af_eps(const AfLink& l, const SeriesControl& c)
{
    return truncation_error(HopChain{{l.hop1, l.hop2}}, truncation_index({l.hop1, l.hop2}, c));
}

AfLink analytic_link(const AfSetup& a)
{
    AfLink l = a.link;
    if (a.hardware == hw_mode::ideal) l.hardware = {};
    return l;
}

void draw_theta(RisLink& l, std::uint64_t seed, std::uint64_t rep)
{
    philox_stream rng(seed ^ 0x7e7a5eedULL, rep);
    for (std::size_t i = 0; i < l.size(); ++i) {
        l.theta1[i] = 2.0 * std::numbers::pi * rng.uniform();
        l.theta2[i] = 2.0 * std::numbers::pi * rng.uniform();
    }
}

struct Metric {
    double analytic = nan, mc = nan, se = nan, eps = nan;
};

Metric eval_ris(const Experiment& e, const Point& pt, bool want_analytic)
{
    Metric m;
    RisLink l = pt.ris->link;
    if (pt.ris->random_theta) draw_theta(l, e.seed, 0);
    const bool op = e.kind == "ris-op" || e.metric == "op";
    if (want_analytic && pt.ris->analytic && (!op || l.size() <= max_closed_form_dim)) {
        m.analytic = op ? ris_outage(l, pt.gamma_th, e.ctrl, e.contour) : ris_abep(l, e.p, e.q, e.ctrl, e.contour);
        m.eps = ris_eps(l, e.ctrl);
    }
    McSamples s = simulate_ris_snr(l, pt.ris->phases, McConfig{e.trials, e.seed});
    McEstimate est = op ? empirical_outage(s, pt.gamma_th) : empirical_abep(s, e.p, e.q);
    m.mc = est.mean;
    m.se = est.std_error;
    return m;
}

Metric eval_af(const Experiment& e, const Point& pt, bool want_analytic)
{
    Metric m;
    const AfSetup& a = *pt.af;
    const bool op = e.kind == "af-op" || e.metric == "op";
    if (want_analytic && a.analytic) {
        AfLink l = analytic_link(a);
        m.analytic = op ? af_outage(l, pt.gamma_th, a.power, e.ctrl, e.contour)
                : af_abep(l, e.p, e.q, a.power, e.ctrl, e.contour);
        m.eps = af_eps(l, e.ctrl);
    }
    // a different stream family from the surface in side-by-side runs
    McSamples s = simulate_af_snr(a.link, a.power, a.hardware, McConfig{e.trials, e.seed + 0x9e3779b9ULL});
    McEstimate est = op ? empirical_outage(s, pt.gamma_th) : empirical_abep(s, e.p, e.q);
    m.mc = est.mean;
    m.se = est.std_error;
    return m;
}

// mean of the co-phasing error |Σ h g e^{iψ}| and its standard error at fixed shifts
McEstimate measured_amplitude(const RisLink& l, const std::vector<double>& phi, const McConfig& cfg)
{
    RisLink u = l;
    u.phi = phi;
    u.P = u.noise = 1.0;
    McSamples s = simulate_ris_snr(u, phase_mode::given, cfg);
    for (auto& v : s.snr) v = std::sqrt(v);
    return empirical_mean(s);
}

std::vector<double> optimize_row(const Experiment& e, const Point& pt)
{
    const OptimizerSetup& o = *e.optimizer;
    SeriesControl ce = o.series_terms >= 0 ? SeriesControl{o.series_terms, 1e-300} : e.ctrl;
    double e_opt = 0.0, e_re = 0.0, mc = 0.0, se2 = 0.0, var = 0.0, common = nan;
    RisLink l = pt.ris->link;
    for (int rep = 0; rep < o.repeats; ++rep) {
        if (pt.ris->random_theta) draw_theta(l, e.seed, rep);
        McConfig mc_cfg{e.trials, e.seed + static_cast<std::uint64_t>(rep)};
        MeasurementOracle oracle = o.exact_oracle
                                       ? make_exact_oracle(l, ce)
                                       : make_measurement_oracle(l, McConfig{static_cast<std::size_t>(o.cfg.oracle_trials),
                                                                             e.seed + static_cast<std::uint64_t>(rep)});
        PhaseSearchResult r = optimize_phases(l, pt.opt, oracle);
        auto exact = make_exact_oracle(l, ce);
        e_opt = expectation_opt(l, ce).total;
        e_re += exact(r.phi);
        McEstimate m = measured_amplitude(l, r.phi, mc_cfg);
        mc += m.mean;
        se2 += m.std_error * m.std_error;
        // total phases around element 1, variance over elements
        auto th = l.channel_phases();
        double ref = th[0] + r.phi[0], mean = 0.0, v = 0.0;
        std::vector<double> a;
        for (std::size_t i = 0; i < th.size(); ++i) {
            a.push_back(std::remainder(th[i] + r.phi[i] - ref, 2.0 * std::numbers::pi));
            mean += a.back() / static_cast<double>(th.size());
        }
        for (double x : a) v += (x - mean) * (x - mean) / static_cast<double>(a.size());
        var += v;
        if (rep == 0) common = r.common_phase;
    }
    const double n = o.repeats;
    ChainBank b = l.bank();
    double eps = truncation_error(b, truncation_index(b.all_hops(), ce));
    return {e_re / n, mc / n, std::sqrt(se2) / n, eps, e_opt, e_opt - e_re / n, var / n, common,
            static_cast<double>(pt.opt.M1 * pt.opt.M2)};
}

}  // namespace

double from_db(double db) { return std::pow(10.0, db / 10.0); }

Experiment parse_config_text(const std::string& text, const std::string& name)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        // locate the byte offset
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < err.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = err.what();
        auto pos = msg.find("parse error");
        throw config_error(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                           (pos == std::string::npos ? msg : msg.substr(pos)));
    }
    const std::string P = path_of(name);
    if (!doc.is_object() || !find(doc, "experiment")) fail(name, "expected one top-level \"experiment\" object");
    const json& o = block(doc, "experiment", name);

    Experiment e;
    e.kind = get_str(o, "kind", P);
    if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) fail(P + ".kind", "unknown kind \"" + e.kind + "\"");
    e.comment = get_str(o, "comment", P, "");
    e.output = get_str(o, "output", P, "");
    long long seed = get_int(o, "seed", P, 1);
    if (seed < 0) fail(P + ".seed", "must be non-negative");
    e.seed = static_cast<std::uint64_t>(seed);
    long long trials = get_int(o, "trials", P, 100000);
    if (trials < 1000) fail(P + ".trials", "at least 1000 trials are needed");
    e.trials = static_cast<std::size_t>(trials);
    e.timing = get_bool(o, "timing", P, true);
    if (find(o, "series")) {
        const json& s = block(o, "series", P);
        e.ctrl.max_terms = static_cast<int>(get_int(s, "max_terms", P + ".series", e.ctrl.max_terms));
        e.ctrl.target_epsilon = get_num(s, "epsilon", P + ".series", e.ctrl.target_epsilon);
        if (e.ctrl.max_terms < 1 || e.ctrl.max_terms > 2000) fail(P + ".series.max_terms", "must be in [1, 2000]");
        if (!(e.ctrl.target_epsilon > 0.0 && e.ctrl.target_epsilon < 1.0)) fail(P + ".series.epsilon", "must be in (0, 1)");
    }

    if (find(o, "contour")) {
        const json& c = block(o, "contour", P);
        e.contour.rel_tol = get_num(c, "rel_tol", P + ".contour", e.contour.rel_tol);
        e.contour.abs_tol = get_num(c, "abs_tol", P + ".contour", e.contour.abs_tol);
        if (!(e.contour.rel_tol > 0.0 && e.contour.rel_tol < 1.0)) fail(P + ".contour.rel_tol", "must be in (0, 1)");
        if (!(e.contour.abs_tol >= 0.0)) fail(P + ".contour.abs_tol", "must be non-negative");
        e.contour.resolution = static_cast<int>(get_int(c, "resolution", P + ".contour", 0));
        if (e.contour.resolution != 0 && e.contour.resolution < 16) fail(P + ".contour.resolution", "use 0 (adaptive) or at least 16 points");
    }

    const std::string& k = e.kind;
    if (k == "ftr-stats" || k == "product-stats") {
        e.statistic = pick(o, "statistic", P, {"cdf", "pdf"});
        if (k == "ftr-stats") {
            e.chain.push_back(parse_hop(block(o, "hop", P), P + ".hop"));
        } else {
            const json* h = find(o, "hops");
            if (!h || !h->is_array() || h->empty()) fail(P + ".hops", "expected a non-empty array of hops");
            for (std::size_t i = 0; i < h->size(); ++i)
                e.chain.push_back(parse_hop((*h)[i], P + ".hops[" + std::to_string(i) + "]"));
        }
    }
    if (k == "truncation-table") {
        const json* r = find(o, "rows");
        if (!r || !r->is_array() || r->empty()) fail(P + ".rows", "expected a non-empty array of rows");
        for (std::size_t i = 0; i < r->size(); ++i) {
            std::string p = P + ".rows[" + std::to_string(i) + "]";
            const json& row = (*r)[i];
            if (!row.is_object()) fail(p, "expected an object");
            TruncationRow t;
            long long L = get_int(row, "L", p), N = get_int(row, "N", p, 2), M = get_int(row, "M", p);
            if (L < 1 || N < 1) fail(p, "L and N must be at least 1");
            if (M < 0 || M > 2000) fail(p + ".M", "must be in [0, 2000]");
            t.L = static_cast<std::size_t>(L);
            t.N = static_cast<std::size_t>(N);
            t.M = static_cast<int>(M);
            t.hop = parse_hop(block(row, "hop", p), p + ".hop");
            if (find(row, "reference")) t.reference = get_num(row, "reference", p);
            e.rows.push_back(t);
        }
    }
    if (k == "compare" || k == "mc-validate") e.metric = pick(o, "metric", P, {"op", "abep"});
    if (k == "mc-validate") e.system = pick(o, "system", P, {"ris", "af"});

    const bool needs_ris = k == "optimize-phases" || k == "ris-op" || k == "ris-abep" || k == "compare" ||
                           (k == "mc-validate" && e.system == "ris");
    const bool needs_af = k == "af-op" || k == "af-abep" || k == "compare" || (k == "mc-validate" && e.system == "af");
    if (needs_ris) e.ris = parse_ris(block(o, "ris", P), P + ".ris");
    if (needs_af) e.af = parse_af(block(o, "af", P), P + ".af");

    if (k == "optimize-phases") {
        OptimizerSetup s;
        if (find(o, "optimizer")) {
            const json& b = block(o, "optimizer", P);
            const std::string p = P + ".optimizer";
            s.cfg.M1 = static_cast<int>(get_int(b, "M1", p, s.cfg.M1));
            s.cfg.M2 = static_cast<int>(get_int(b, "M2", p, s.cfg.M2));
            s.cfg.oracle_trials = static_cast<int>(get_int(b, "oracle_trials", p, s.cfg.oracle_trials));
            s.exact_oracle = pick(b, "oracle", p, {"exact", "monte-carlo"}) == "exact";
            s.series_terms = static_cast<int>(get_int(b, "series_terms", p, -1));
            s.repeats = static_cast<int>(get_int(b, "repeats", p, 1));
            if (s.repeats < 1) fail(p + ".repeats", "must be at least 1");
            if (!s.exact_oracle && s.cfg.oracle_trials < 1000) fail(p + ".oracle_trials", "at least 1000 trials are needed");
            try {
                s.cfg.validate();
            } catch (const domain_error& err) {
                fail(p, err.what());
            }
        }
        e.optimizer = s;
    }

    const bool op = k == "ris-op" || k == "af-op" || e.metric == "op";
    const bool abep = k == "ris-abep" || k == "af-abep" || e.metric == "abep";
    if (op) e.gamma_th_db = get_num(o, "gamma_th_db", P, 0.0);
    if (abep) {
        e.p = get_num(o, "p", P, 0.5);
        e.q = get_num(o, "q", P, 1.0);
        if (!(e.p > 0.0) || !(e.q > 0.0)) fail(P, "p and q must be positive");
    }

    auto vars = sweep_variables(e);
    if (vars.empty()) {
        if (find(o, "sweep")) fail(P + ".sweep", "not used by kind " + k);
    } else {
        e.sweep = parse_sweep(block(o, "sweep", P), P + ".sweep");
        if (std::find(vars.begin(), vars.end(), e.sweep.variable) == vars.end()) {
            std::string list;
            for (const auto& v : vars) list += (list.empty() ? "" : ", ") + v;
            fail(P + ".sweep.variable", "\"" + e.sweep.variable + "\" cannot be swept for " + k + " (use " + list + ")");
        }
        const std::string& var = e.sweep.variable;
        if (var == "L" || var == "M1" || var == "M2")
            for (double v : e.sweep.values)
                if (!(v >= 1.0) || v != std::floor(v)) fail(P + ".sweep", var + " values must be positive integers");
        if (var == "x")
            for (double v : e.sweep.values)
                if (!(v > 0.0)) fail(P + ".sweep", "x values must be positive");
    }
    return e;
}

Experiment parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw config_error(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::vector<std::string> plan(const Experiment& e)
{
    std::vector<std::string> out;
    const std::string& k = e.kind;
    std::ostringstream os;
    os << "kind " << k;
    if (!e.comment.empty()) os << " (" << e.comment << ")";
    out.push_back(os.str());

    if (!e.sweep.values.empty()) {
        auto [lo, hi] = std::minmax_element(e.sweep.values.begin(), e.sweep.values.end());
        std::ostringstream s;
        s << "sweep " << e.sweep.variable << ": " << e.sweep.values.size() << " points in [" << *lo << ", " << *hi << "]";
        out.push_back(s.str());
    }
    const std::size_t n = std::max<std::size_t>(e.sweep.values.size(), 1);

    const bool op = k == "ris-op" || e.metric == "op";
    const bool ris_used = k == "ris-op" || k == "ris-abep" || k == "compare";
    if (ris_used && op && e.ris->analytic && max_L(e) > max_closed_form_dim) {
        std::ostringstream s;
        s << "closed-form RIS outage is limited to L <= " << max_closed_form_dim << " elements (got L = " << max_L(e)
          << "); set \"ris.analytic\": false for Monte Carlo only, or use kind \"mc-validate\"";
        throw config_error(s.str());
    }
    if (e.af && e.af->power == power_mode::optimal && e.af->hardware == hw_mode::impaired)
        throw config_error("experiment.af: the optimal power split assumes ideal hardware; use hardware_mode \"ideal\"");
    if (k == "optimize-phases" && e.sweep.variable == "L" && !e.ris->uniform)
        throw config_error("experiment.sweep: L can only be swept for a uniform surface (L, h, g)");

    auto count = [&](const std::string& what, std::size_t evals) {
        std::ostringstream s;
        s << what << ": " << evals << " evaluations";
        out.push_back(s.str());
    };
    if (k == "ftr-stats") count(std::string("cdf_squared / pdf_squared (") + e.statistic + ")", n);
    if (k == "product-stats") count("product " + e.statistic + " of " + std::to_string(e.chain.size()) + " hops", n);
    if (k == "truncation-table") count("truncation_error", e.rows.size());
    if (k == "optimize-phases") {
        std::ostringstream s;
        s << "optimize_phases with " << (e.optimizer->exact_oracle ? "exact" : "Monte Carlo") << " oracle, "
          << e.optimizer->repeats << " repeat(s) per point";
        out.push_back(s.str());
        count("phase searches", n * e.optimizer->repeats);
    }
    if (ris_used || e.system == "ris") {
        bool closed = e.ris->analytic && (!op || max_L(e) <= max_closed_form_dim);
        std::ostringstream s;
        s << "RIS " << (op ? "outage" : "ABEP") << ": "
          << (closed ? (op || max_L(e) <= max_closed_form_dim ? "closed form" : "characteristic-function inversion")
                     : "no analytic value")
          << ", L up to " << max_L(e);
        out.push_back(s.str());
    }
    if (e.af) {
        std::ostringstream s;
        s << "AF " << (k == "af-op" || e.metric == "op" ? "outage" : "ABEP") << ": "
          << (e.af->analytic ? "closed form" : "no analytic value") << ", "
          << (e.af->power == power_mode::optimal ? "optimal" : "fixed") << " power, "
          << (e.af->hardware == hw_mode::impaired ? "impaired" : "ideal") << " hardware";
        out.push_back(s.str());
    }
    if (k != "truncation-table" && !(k == "ftr-stats" && e.statistic == "pdf") &&
        !(k == "product-stats" && e.statistic == "pdf")) {
        std::ostringstream s;
        std::size_t systems = k == "compare" ? 2 : 1;
        s << "Monte Carlo: " << n * systems << " x " << e.trials << " trials, seed " << e.seed;
        out.push_back(s.str());
    }
    return out;
}

Table run_experiment(const Experiment& e)
{
    plan(e);
    Table t;
    const std::string& k = e.kind;
    t.header = {k == "truncation-table" ? "row" : e.sweep.variable, "analytic", "mc_mean", "mc_std_error",
                "truncation_eps", "wall_time_s"};
    if (k == "truncation-table") t.header.insert(t.header.end(), {"L", "N", "M", "reference"});
    if (k == "optimize-phases")
        t.header.insert(t.header.end(), {"e_opt", "expectation_error", "phase_variance", "common_phase", "probes_per_element"});
    if (k == "compare")
        t.header.insert(t.header.end(), {"af_analytic", "af_mc_mean", "af_mc_std_error", "af_truncation_eps", "overlap"});
    if (k == "mc-validate") t.header.insert(t.header.end(), {"z_score", "within_3se"});

    using clock = std::chrono::steady_clock;

    if (k == "truncation-table") {
        for (std::size_t i = 0; i < e.rows.size(); ++i) {
            const auto& r = e.rows[i];
            auto t0 = clock::now();
            ChainBank b;
            b.chains.assign(r.L, HopChain{std::vector<FtrParams>(r.N, r.hop)});
            double eps = truncation_error(b, r.M);
            double wall = e.timing ? std::chrono::duration<double>(clock::now() - t0).count() : nan;
            t.rows.push_back({double(i + 1), eps, nan, nan, eps, wall, double(r.L), double(r.N), double(r.M),
                              r.reference.value_or(nan)});
        }
        return t;
    }

    for (double v : e.sweep.values) {
        auto t0 = clock::now();
        std::vector<double> row{v};
        if (k == "ftr-stats" || k == "product-stats") {
            HopChain c{e.chain};
            int M = truncation_index(c.hops, e.ctrl);
            double a;
            if (k == "ftr-stats")
                a = e.statistic == "cdf" ? cdf_squared(c.hops[0], v, e.ctrl) : pdf_squared(c.hops[0], v, e.ctrl);
            else
                a = e.statistic == "cdf" ? product_cdf(c, v, e.ctrl, e.contour) : product_pdf(c, v, e.ctrl, e.contour);
            double mc = nan, se = nan;
            if (e.statistic == "cdf") {
                // |q|² for one hop, the envelope product otherwise
                McSamples s{std::vector<double>(e.trials, 1.0), e.seed};
                for (std::size_t h = 0; h < c.size(); ++h) {
                    auto r = sample_envelope(c.hops[h], e.trials, e.seed + h);
                    for (std::size_t i = 0; i < e.trials; ++i) s.snr[i] *= k == "ftr-stats" ? r[i] * r[i] : r[i];
                }
                McEstimate est = empirical_outage(s, v);
                mc = est.mean;
                se = est.std_error;
            }
            double eps = k == "ftr-stats" ? series_deficit(c.hops[0], M) : truncation_error(c, M);
            row.insert(row.end(), {a, mc, se, eps});
        } else if (k == "optimize-phases") {
            auto r = optimize_row(e, at(e, v));
            row.insert(row.end(), r.begin(), r.begin() + 4);
            row.push_back(nan);  // wall time slot, filled below
            row.insert(row.end(), r.begin() + 4, r.end());
        } else {
            Point pt = at(e, v);
            Metric m, a2;
            bool has_af = false;
            if (k == "ris-op" || k == "ris-abep" || k == "compare" || e.system == "ris") m = eval_ris(e, pt, true);
            if (k == "af-op" || k == "af-abep" || e.system == "af") m = eval_af(e, pt, true);
            if (k == "compare") {
                a2 = eval_af(e, pt, true);
                has_af = true;
            }
            row.insert(row.end(), {m.analytic, m.mc, m.se, m.eps});
            if (has_af) {
                row.push_back(nan);
                bool overlap = std::fabs(m.mc - a2.mc) <= 3.0 * (m.se + a2.se);
                row.insert(row.end(), {a2.analytic, a2.mc, a2.se, a2.eps, overlap ? 1.0 : 0.0});
            } else if (k == "mc-validate") {
                row.push_back(nan);
                double z = nan;
                if (!std::isnan(m.analytic)) z = m.se > 0.0 ? (m.mc - m.analytic) / m.se : (m.mc == m.analytic ? 0.0 : nan);
                row.insert(row.end(), {z, std::isnan(z) ? nan : (std::fabs(z) <= 3.0 ? 1.0 : 0.0)});
            }
        }
        double wall = e.timing ? std::chrono::duration<double>(clock::now() - t0).count() : nan;
        if (row.size() == 5)
            row.push_back(wall);
        else
            row[5] = wall;
        t.rows.push_back(row);
    }
    return t;
}

std::string format_csv(const Table& t)
{
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
    out += '\n';
    char buf[40];
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            if (std::isnan(r[i])) continue;
            std::snprintf(buf, sizeof buf, "%.17g", r[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace ftrlink::cli
