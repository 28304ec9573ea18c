#pragma once

// Two-hop amplify-and-forward relay over FTR hops, with optional transceiver
// hardware impairments.  The SNR of hop i is γ_i = P_i |q_i|² / o².

#include <functional>

#include "ftrlink/ftr_model.hpp"
#include "ftrlink/special_functions.hpp"

namespace ftrlink {

struct HardwareProfile {
    double kappa1 = 0.0;  // source impairment level
    double kappa2 = 0.0;  // relay impairment level

    double c_h1() const { return 1.0 + kappa1 * kappa1; }
    double c_h2() const { return 1.0 + kappa2 * kappa2; }
    double d_h() const
    {
        double a = kappa1 * kappa1, b = kappa2 * kappa2;
        return a * b + a + b;
    }
    bool ideal() const { return kappa1 == 0.0 && kappa2 == 0.0; }
    void validate() const;
};

struct AfLink {
    FtrParams hop1, hop2;
    double P1 = 1.0, P2 = 1.0;  // watts
    double noise = 1.0;         // o², watts
    HardwareProfile hardware;

    // constants of the Z variate: Z = X1 X2 / (d X1 X2 + c1 X1 + c2 X2), X_i = |q_i|²
    double c1() const { return P1 * hardware.c_h1(); }
    double c2() const { return P2 * hardware.c_h2(); }
    double d() const { return P1 * P2 * hardware.d_h(); }
    void validate() const;
};

struct PowerSplit {
    double P1 = 0.0, P2 = 0.0;
};

enum class power_mode { any, optimal };

double af_snr_exact(double gamma1, double gamma2, const HardwareProfile& hw = {});
double af_snr_approx(double gamma1, double gamma2, const HardwareProfile& hw = {});

// CDF of γ1γ2/(dγ1γ2 + c1γ1 + c2γ2) for arbitrary independent γ1 (cdf F1)
// and γ2 (pdf f2), by adaptive quadrature over the unit interval
double af_cdf_generic(const std::function<double(double)>& F1, const std::function<double(double)>& f2,
                      double c1, double c2, double d, double gamma);

// Z = |q1|²|q2|² / (d|q1|²|q2|² + c1|q1|² + c2|q2|²), constants from the link
double z_pdf(const AfLink& link, double z, const SeriesControl& ctrl = {}, const mb_options& opt = {});
double z_cdf(const AfLink& link, double z, const SeriesControl& ctrl = {}, const mb_options& opt = {});

// end-to-end SNR (approximate form) with the link's powers, noise and hardware
double af_snr_pdf(const AfLink& link, double gamma, const SeriesControl& ctrl = {},
                  const mb_options& opt = {});
double af_snr_cdf(const AfLink& link, double gamma, const SeriesControl& ctrl = {},
                  const mb_options& opt = {});

// same with the hardware ignored (κ1 = κ2 = 0)
double af_ideal_pdf(const AfLink& link, double gamma, const SeriesControl& ctrl = {},
                    const mb_options& opt = {});
double af_ideal_cdf(const AfLink& link, double gamma, const SeriesControl& ctrl = {},
                    const mb_options& opt = {});

// P1 + P2 = 2P split maximizing the ideal-hardware SNR for given |q1|, |q2|
PowerSplit optimal_power_split(double q1_mag, double q2_mag, double P);

// SNR under the optimal split, (2P/o²)|q1|²|q2|²/(|q1|+|q2|)², P = (P1+P2)/2 of
// the link; ideal hardware
double af_max_snr_pdf(const AfLink& link, double gamma, const SeriesControl& ctrl = {},
                      const mb_options& opt = {});
double af_max_snr_cdf(const AfLink& link, double gamma, const SeriesControl& ctrl = {},
                      const mb_options& opt = {});

double af_outage(const AfLink& link, double gamma_th, power_mode mode = power_mode::any,
                 const SeriesControl& ctrl = {}, const mb_options& opt = {});

// binary modulation error probability, P_e = q^p/(2Γ(p)) ∫ z^{p-1} e^{-qz} F(z) dz
double af_abep(const AfLink& link, double p, double q, power_mode mode = power_mode::any,
               const SeriesControl& ctrl = {}, const mb_options& opt = {});

}  // namespace ftrlink
