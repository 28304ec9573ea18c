#pragma once

// Trial-based estimators for both systems.  Trial i draws from the philox
// substream (seed, i), so results do not depend on the number of threads.

#include <cstdint>
#include <vector>

#include "ftrlink/af_relay.hpp"
#include "ftrlink/ris_system.hpp"

namespace ftrlink {

struct McConfig {
    std::size_t trials = 1000000;
    std::uint64_t seed = 1;
    std::size_t block_size = 4096;  // trials per parallel chunk
    int threads = 0;                // 0 = OpenMP default
    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample std / sqrt(trials)
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

struct McSamples {
    std::vector<double> snr;
    std::uint64_t seed = 0;
};

enum class phase_mode { optimal, given };
enum class hw_mode { ideal, impaired };

// co-phased (optimal) or with the link's own shifts (given)
McSamples simulate_ris_snr(const RisLink& link, phase_mode mode, const McConfig& cfg);

// fixed powers use the approximate relay SNR; optimal re-splits P1 + P2 per trial
McSamples simulate_af_snr(const AfLink& link, power_mode pmode, hw_mode hmode, const McConfig& cfg);

McEstimate empirical_outage(const McSamples& s, double gamma_th);
// mean of Γ(p, qγ)/(2Γ(p))
McEstimate empirical_abep(const McSamples& s, double p, double q);
McEstimate empirical_mean(const McSamples& s);

// E|Σ h g e^{i(θ1+θ2+φ)}| averaged over cfg.trials amplitude draws.  The draws
// are fixed when the oracle is built, so repeated calls with the same φ agree.
MeasurementOracle make_measurement_oracle(const RisLink& link, const McConfig& cfg);

// |Σ E[h g] e^{i(θ1+θ2+φ)}| from the per-element first moments
MeasurementOracle make_exact_oracle(const RisLink& link, const SeriesControl& ctrl = {});

namespace detail {

// single-threaded reference, same draws as simulate_ris_snr
McSamples simulate_ris_snr_serial(const RisLink& link, phase_mode mode, const McConfig& cfg);

// blockwise then pairwise sum of f(x_i); fixed order for any thread count
template <class F>
double pairwise_sum(const std::vector<double>& x, F f, std::size_t block = 1024);

}  // namespace detail

}  // namespace ftrlink

#include "ftrlink/detail/pairwise_sum.hpp"
