#pragma once

// Single-antenna link through an L-element reflecting surface.  Element ℓ sees
// the cascade h_ℓ g_ℓ with channel phases θ_{ℓ,1} + θ_{ℓ,2} and its own shift φ_ℓ.

#include <functional>
#include <vector>

#include "ftrlink/product_sum_stats.hpp"

namespace ftrlink {

struct RisElement {
    FtrParams h;  // source to surface
    FtrParams g;  // surface to user
};

struct RisLink {
    std::vector<RisElement> elements;
    std::vector<double> theta1, theta2, phi;  // radians, one per element
    double P = 1.0;      // transmit power, watts
    double noise = 1.0;  // o², watts

    std::size_t size() const { return elements.size(); }
    ChainBank bank() const;
    // θ_{ℓ,1} + θ_{ℓ,2}
    std::vector<double> channel_phases() const;
    void validate() const;

    // all elements alike, phases zero
    static RisLink uniform(std::size_t L, const FtrParams& h, const FtrParams& g, double P = 1.0,
                           double noise = 1.0);
};

struct PhaseOptimizerConfig {
    int M1 = 20;  // interval halvings per element and sweep
    int M2 = 2;   // sweeps over all elements
    int oracle_trials = 10000;
    void validate() const;
};

// estimate of E|Σ h g e^{i(θ1+θ2+φ)}| for a full shift vector
using MeasurementOracle = std::function<double(const std::vector<double>& phi)>;

struct PhaseSearchResult {
    std::vector<double> phi;    // final shifts in [0, 2π)
    std::vector<double> trace;  // best measurement after every comparison
    double common_phase = 0.0;  // θ1 + θ2 + φ of element 1, mod 2π
    int probes_per_element = 0;
};

struct ExpectationOpt {
    double total = 0.0;
    std::vector<double> per_element;  // E[h_ℓ g_ℓ]
};

double snr_instant(const RisLink& link, const std::vector<double>& h, const std::vector<double>& g);
double snr_max(const RisLink& link, const std::vector<double>& h, const std::vector<double>& g);

// SNR under co-phasing, (P/o²)(Σ h g)²; closed form for L <= max_closed_form_dim
double ris_snr_pdf(const RisLink& link, double z, const SeriesControl& ctrl = {},
                   const mb_options& opt = {});
double ris_snr_cdf(const RisLink& link, double z, const SeriesControl& ctrl = {},
                   const mb_options& opt = {});

PhaseSearchResult optimize_phases(const RisLink& link, const PhaseOptimizerConfig& cfg,
                                  const MeasurementOracle& oracle);

ExpectationOpt expectation_opt(const RisLink& link, const SeriesControl& ctrl = {});

// limit of the element-by-element averaging, 2/(L²-L) Σ_{ℓ>=2} (ℓ-1) α_ℓ
double phase_fixed_point(const std::vector<double>& alpha);

double ris_outage(const RisLink& link, double gamma_th, const SeriesControl& ctrl = {},
                  const mb_options& opt = {});

// P_e = q^p/(2Γ(p)) ∫ z^{p-1} e^{-qz} F(z) dz under co-phasing
double ris_abep(const RisLink& link, double p, double q, const SeriesControl& ctrl = {},
                const mb_options& opt = {});

namespace detail {

// cdf of Σ h g by characteristic-function inversion; no dimension cap
class sum_cdf_numeric {
public:
    sum_cdf_numeric(const ChainBank& bank, const SeriesControl& ctrl);
    double operator()(double y) const;
    double upper() const { return y_hi_; }  // beyond this the cdf is 1 to 1e-13

private:
    std::vector<double> t_, w_;  // frequency nodes and weights
    std::vector<double> re_, im_;
    double y_hi_ = 0.0;
    double mass_ = 1.0;
};

double ris_abep_numeric(const RisLink& link, double p, double q, const SeriesControl& ctrl = {});

}  // namespace detail

}  // namespace ftrlink
