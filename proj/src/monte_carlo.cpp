#include "ftrlink/monte_carlo.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <memory>
#include <omp.h>

#include "ftrlink/rng.hpp"

namespace ftrlink {

namespace {

// restores the OpenMP thread count on scope exit
struct thread_scope {
    int saved;
    explicit thread_scope(int n) : saved(omp_get_max_threads())
    {
        if (n > 0) omp_set_num_threads(n);
    }
    ~thread_scope() { omp_set_num_threads(saved); }
};

double ris_trial(const RisLink& link, phase_mode mode, philox_stream& rng)
{
    double re = 0.0, im = 0.0;
    for (std::size_t l = 0; l < link.size(); ++l) {
        double a = draw_envelope(link.elements[l].h, rng);
        a *= draw_envelope(link.elements[l].g, rng);
        if (mode == phase_mode::optimal) {
            re += a;
        } else {
            double ph = link.theta1[l] + link.theta2[l] + link.phi[l];
            re += a * std::cos(ph);
            im += a * std::sin(ph);
        }
    }
    return (re * re + im * im) * link.P / link.noise;
}

McEstimate summarize(const McSamples& s, auto f)
{
    if (s.snr.empty()) throw domain_error("monte carlo: empty sample set");
    const double n = static_cast<double>(s.snr.size());
    double mean = detail::pairwise_sum(s.snr, f) / n;
    double ss = detail::pairwise_sum(s.snr, [&](double x) {
        double d = f(x) - mean;
        return d * d;
    });
    McEstimate e;
    e.mean = mean;
    e.std_error = s.snr.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    e.trials = s.snr.size();
    e.seed = s.seed;
    return e;
}

}  // namespace

void McConfig::validate() const
{
    if (trials < 1000) throw domain_error("McConfig: trials must be at least 1000");
    if (block_size < 1) throw domain_error("McConfig: block_size must be positive");
    if (threads < 0) throw domain_error("McConfig: threads must be non-negative");
}

McSamples simulate_ris_snr(const RisLink& link, phase_mode mode, const McConfig& cfg)
{
    link.validate();
    cfg.validate();
    thread_scope ts(cfg.threads);
    McSamples out{std::vector<double>(cfg.trials), cfg.seed};
    const auto chunk = static_cast<int>(cfg.block_size);
#pragma omp parallel for schedule(dynamic, chunk)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cfg.trials); ++i) {
        philox_stream rng(cfg.seed, i);
        out.snr[i] = ris_trial(link, mode, rng);
    }
    return out;
}

McSamples detail::simulate_ris_snr_serial(const RisLink& link, phase_mode mode, const McConfig& cfg)
{
    link.validate();
    cfg.validate();
    McSamples out{std::vector<double>(cfg.trials), cfg.seed};
    for (std::size_t i = 0; i < cfg.trials; ++i) {
        philox_stream rng(cfg.seed, i);
        out.snr[i] = ris_trial(link, mode, rng);
    }
    return out;
}

McSamples simulate_af_snr(const AfLink& link, power_mode pmode, hw_mode hmode, const McConfig& cfg)
{
    link.validate();
    cfg.validate();
    if (pmode == power_mode::optimal && hmode == hw_mode::impaired && !link.hardware.ideal())
        throw domain_error("simulate_af_snr: the optimal power split assumes ideal hardware");
    const HardwareProfile hw = hmode == hw_mode::ideal ? HardwareProfile{} : link.hardware;
    const double P = 0.5 * (link.P1 + link.P2);
    thread_scope ts(cfg.threads);
    McSamples out{std::vector<double>(cfg.trials), cfg.seed};
    const auto chunk = static_cast<int>(cfg.block_size);
#pragma omp parallel for schedule(dynamic, chunk)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cfg.trials); ++i) {
        philox_stream rng(cfg.seed, i);
        double r1 = draw_envelope(link.hop1, rng), r2 = draw_envelope(link.hop2, rng);
        if (pmode == power_mode::optimal) {
            PowerSplit ps = optimal_power_split(r1, r2, P);
            out.snr[i] = af_snr_approx(ps.P1 * r1 * r1 / link.noise, ps.P2 * r2 * r2 / link.noise);
        } else {
            out.snr[i] = af_snr_approx(link.P1 * r1 * r1 / link.noise, link.P2 * r2 * r2 / link.noise, hw);
        }
    }
    return out;
}

McEstimate empirical_outage(const McSamples& s, double gamma_th)
{
    return summarize(s, [gamma_th](double x) { return x < gamma_th ? 1.0 : 0.0; });
}

McEstimate empirical_abep(const McSamples& s, double p, double q)
{
    if (!(p > 0.0) || !(q > 0.0)) throw domain_error("empirical_abep: p and q must be positive");
    return summarize(s, [p, q](double x) { return 0.5 * boost::math::gamma_q(p, q * x); });
}

McEstimate empirical_mean(const McSamples& s)
{
    return summarize(s, [](double x) { return x; });
}

MeasurementOracle make_measurement_oracle(const RisLink& link, const McConfig& cfg)
{
    link.validate();
    cfg.validate();
    const std::size_t L = link.size(), n = cfg.trials;
    // amplitudes trial-major, drawn once
    auto amp = std::make_shared<std::vector<double>>(n * L);
    {
        thread_scope ts(cfg.threads);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            philox_stream rng(cfg.seed, i);
            for (std::size_t l = 0; l < L; ++l) {
                double a = draw_envelope(link.elements[l].h, rng);
                (*amp)[i * L + l] = a * draw_envelope(link.elements[l].g, rng);
            }
        }
    }
    const auto th = link.channel_phases();
    return [amp, th, L, n](const std::vector<double>& phi) {
        if (phi.size() != L) throw domain_error("measurement oracle: wrong number of shifts");
        std::vector<double> c(L), s(L), mod(n);
        for (std::size_t l = 0; l < L; ++l) {
            c[l] = std::cos(th[l] + phi[l]);
            s[l] = std::sin(th[l] + phi[l]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            double re = 0.0, im = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                re += (*amp)[i * L + l] * c[l];
                im += (*amp)[i * L + l] * s[l];
            }
            mod[i] = std::hypot(re, im);
        }
        return detail::pairwise_sum(mod, [](double x) { return x; }) / static_cast<double>(n);
    };
}

MeasurementOracle make_exact_oracle(const RisLink& link, const SeriesControl& ctrl)
{
    const auto E = expectation_opt(link, ctrl).per_element;
    const auto th = link.channel_phases();
    return [E, th](const std::vector<double>& phi) {
        if (phi.size() != E.size()) throw domain_error("measurement oracle: wrong number of shifts");
        std::complex<double> s = 0.0;
        for (std::size_t l = 0; l < E.size(); ++l) s += E[l] * std::polar(1.0, th[l] + phi[l]);
        return std::abs(s);
    };
}

}  // namespace ftrlink
