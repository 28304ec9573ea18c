#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ftrlink/errors.hpp"
#include "ftrlink/rng.hpp"

namespace ftrlink {

struct FtrParams {
    double m = 1.0;       // fading severity
    double K = 0.0;       // specular-to-diffuse power ratio
    double delta = 0.0;   // similarity of the two specular waves
    double sigma2 = 0.5;  // diffuse variance per dimension

    double upsilon() const { return 2.0 * sigma2 * (1.0 + K); }
    void validate() const;

    static FtrParams from_upsilon(double m, double K, double delta, double upsilon);
};

struct SeriesControl {
    int max_terms = 150;           // highest series index kept, j = 0..max_terms
    double target_epsilon = 1e-10; // stop earlier once the truncation error is below this
};

// receives "series truncated" notices; default prints to stderr
using warning_handler = std::function<void(const std::string&)>;
void set_warning_handler(warning_handler h);
void warn(const std::string& msg);

// clamps a probability into [0, hi]; truncated series can overshoot a little,
// anything beyond 1e-6 is reported through warn()
double clamp_probability(double v, const char* what, double hi = 1.0);

double coefficient_d(int n, const FtrParams& p);

// mixture weights w_j = m^m K^j d_j / (Γ(m) j!) and exact tails 1 - Σ_{i<=j} w_i
struct ftr_series {
    std::vector<double> w;
    std::vector<double> deficit;
};

// memoized per (m, K, Δ); the snapshot stays valid while others extend the table
std::shared_ptr<const ftr_series> series_table(const FtrParams& p, int max_index);

double series_mass(const FtrParams& p, int M);     // Σ_{j<=M} w_j
double series_deficit(const FtrParams& p, int M);  // 1 - Σ_{j<=M} w_j

// common truncation index for a set of hops: smallest M <= ctrl.max_terms with
// 1 - prod_ℓ mass_ℓ(M) < target, otherwise max_terms (warns)
int truncation_index(const std::vector<FtrParams>& hops, const SeriesControl& ctrl,
                     double* eps = nullptr);

double pdf_squared(const FtrParams& p, double gamma, const SeriesControl& ctrl = {});
double cdf_squared(const FtrParams& p, double gamma, const SeriesControl& ctrl = {});
double envelope_pdf(const FtrParams& p, double r, const SeriesControl& ctrl = {});
double envelope_cdf(const FtrParams& p, double r, const SeriesControl& ctrl = {});

// E[R^s]
double envelope_moment(const FtrParams& p, double s, const SeriesControl& ctrl = {});

// one envelope draw from the generative model
double draw_envelope(const FtrParams& p, philox_stream& rng);
std::vector<double> sample_envelope(const FtrParams& p, std::size_t count, std::uint64_t seed);

// V1 >= V2 solving V1^2 + V2^2 = 2σ^2 K, 2 V1 V2 / (V1^2 + V2^2) = Δ
std::pair<double, double> specular_amplitudes(const FtrParams& p);

}  // namespace ftrlink
