#include "ftrlink/af_relay.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include "ftrlink/mellin_barnes.hpp"
#include "ftrlink/product_sum_stats.hpp"

namespace ftrlink {

void HardwareProfile::validate() const
{
    if (!(kappa1 >= 0.0) || !(kappa2 >= 0.0))
        throw domain_error("HardwareProfile: impairment levels must be non-negative");
}

void AfLink::validate() const
{
    hop1.validate();
    hop2.validate();
    hardware.validate();
    if (!(P1 > 0.0) || !(P2 > 0.0)) throw domain_error("AfLink: hop powers must be positive");
    if (!(noise > 0.0)) throw domain_error("AfLink: noise power must be positive");
}

double af_snr_exact(double g1, double g2, const HardwareProfile& hw)
{
    if (g1 < 0.0 || g2 < 0.0) throw domain_error("af_snr_exact: SNRs must be non-negative");
    double num = g1 * g2;
    if (num == 0.0) return 0.0;
    return num / (hw.d_h() * num + hw.c_h1() * g1 + hw.c_h2() * g2 + 1.0);
}

double af_snr_approx(double g1, double g2, const HardwareProfile& hw)
{
    if (g1 < 0.0 || g2 < 0.0) throw domain_error("af_snr_approx: SNRs must be non-negative");
    double num = g1 * g2;
    if (num == 0.0) return 0.0;
    return num / (hw.d_h() * num + hw.c_h1() * g1 + hw.c_h2() * g2);
}

double af_cdf_generic(const std::function<double(double)>& F1, const std::function<double(double)>& f2,
                      double c1, double c2, double d, double gamma)
{
    if (!(c1 > 0.0) || !(c2 > 0.0) || !(d >= 0.0))
        throw domain_error("af_cdf_generic: need c1, c2 > 0 and d >= 0");
    if (gamma <= 0.0) return 0.0;
    if (d > 0.0 && gamma * d >= 1.0) return 1.0;
    const double w = gamma / (1.0 - gamma * d);
    const double b1 = w * c1, b2 = w * c2;

    // 1 - I1 = ∫_0^{b1} f2 and I2 = ∫_{b1}^∞ F1(b2 x/(x - b1)) f2(x) dx; evaluating
    // the complement of I1 directly keeps the small-gamma tail free of cancellation
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    double e1 = 0.0, e2 = 0.0, l1 = 0.0;
    double head = ts.integrate(f2, 0.0, b1, 1e-12, &e1, &l1);
    auto tail = [&](double v) {
        double x = b1 + v;
        double arg = b2 * x / v;
        return (std::isfinite(arg) ? F1(arg) : 1.0) * f2(x);
    };
    double I2 = es.integrate(tail, 1e-12, &e2, &l1);
    double F = head + I2;
    double err = e1 + e2;
    if (!std::isfinite(F) || err > 1e-8 * F + 1e-12) {
        std::ostringstream os;
        os << "af_cdf_generic: quadrature did not settle at gamma = " << gamma << " (error " << err << ")";
        throw convergence_error(os.str(), F);
    }
    return clamp_probability(F, "af_cdf_generic");
}

namespace {

using detail::moment_kernel;

// All AF statistics are about P(a + b >= 1) with independent
//   b = A1 X1^{-β},  a = A2 X2^{-β},  X_i = |q_i|²,
// β = 1 for the relay SNR and β = 1/2 for the optimal-split SNR.
//
// P(a + b < 1) = (2πi)^{-2} ∫∫ Γ(s)Γ(u) E[X1^{βs}] E[X2^{βu}] A1^{-s} A2^{-u} / Γ(1+s+u),
// Re s, Re u > 0.  Taking the residue at s = 0 out gives P(a < 1), so
// P(a + b >= 1) = P(X2 <= A2^{1/β}) + H with
// H = (2πi)^{-2} ∫∫ [-Γ(s)] E[X1^{βs}] A1^{-s} Γ(u) E[X2^{βu}] A2^{-u} / Γ(1+s+u),
// -1 < Re s < 0, where -Γ(s) = Γ(-s)Γ(1+s)/Γ(1-s) > 0 on the real section.
struct inverse_sum {
    FtrParams h1, h2;
    double beta;
    int M;
    moment_kernel k1, k2;

    inverse_sum(const FtrParams& a, const FtrParams& b, double beta_, const SeriesControl& ctrl)
        : h1(a), h2(b), beta(beta_), M(truncation_index({a, b}, ctrl)), k1(a, M), k2(b, M)
    {
    }

    double mass() const { return (1.0 - series_deficit(h1, M)) * (1.0 - series_deficit(h2, M)); }

    // Σ_{j<=M} w_j P(1+j, x/(2σ²)) for hop 2
    double hop2_cdf(double x) const
    {
        auto t = series_table(h2, M);
        double y = x / (2.0 * h2.sigma2), s = 0.0;
        for (int j = 0; j <= M; ++j) s += t->w[j] * gamma_p(1.0 + j, y);
        return s;
    }

    mb::integrand shifted(double lA1, double lA2, double extra_s = 0.0) const
    {
        mb::integrand f;
        f.dim = 2;
        const double b = beta;
        const auto ka = k1, kb = k2;
        f.axis.push_back([ka, b, lA1, extra_s](cplx s) {
            return ln_gamma(-s) + ln_gamma(1.0 + s) - ln_gamma(1.0 - s) + ka.log_moment(b * s) -
                   s * (lA1 - extra_s);
        });
        f.axis.push_back([kb, b, lA2, extra_s](cplx u) {
            return ln_gamma(u) + kb.log_moment(b * u) - u * (lA2 - extra_s);
        });
        f.poles = {{0.0, {-1.0, 0.0}}, {1.0, {1.0, 0.0}}, {1.0, {b, 0.0}}, {0.0, {0.0, 1.0}},
                   {1.0, {0.0, b}}};
        f.den.push_back({1.0, {1.0, 1.0}});
        f.rate = {std::fabs(lA1 - extra_s), std::fabs(lA2 - extra_s)};
        return f;
    }

    double cdf(double lA1, double lA2, const mb_options& opt) const
    {
        const double head = hop2_cdf(std::exp(lA2 / beta));
        // H only has to be accurate relative to the whole probability
        mb::settings st = detail::to_settings(opt);
        st.abs_tol = std::max(st.abs_tol, 0.1 * st.rel_tol * head);
        mb_result r = mb::integrate(shifted(lA1, lA2), {-0.5, 0.5}, st);
        return clamp_probability(head + r.value, "AF cdf", mass());
    }

    // dF/d(log v) when both A_i scale with v
    double log_density(double lA1, double lA2, const mb_options& opt) const
    {
        mb::integrand f;
        f.dim = 2;
        const double b = beta;
        const auto ka = k1, kb = k2;
        f.axis.push_back([ka, b, lA1](cplx u) { return ln_gamma(u) + ka.log_moment(b * u) - u * lA1; });
        f.axis.push_back([kb, b, lA2](cplx u) { return ln_gamma(u) + kb.log_moment(b * u) - u * lA2; });
        f.poles = {{0.0, {1.0, 0.0}}, {1.0, {b, 0.0}}, {0.0, {0.0, 1.0}}, {1.0, {0.0, b}}};
        f.den.push_back({0.0, {1.0, 1.0}});
        f.rate = {std::fabs(lA1), std::fabs(lA2)};
        mb_result r = mb::integrate(f, {0.5, 0.5}, detail::to_settings(opt));
        return std::max(0.0, r.value);
    }

    // q^p/(2Γ(p)) ∫ z^{p-1} e^{-qz} F(z) dz for A_i = α_i z^e, with e = β
    double abep(double la1, double la2, double p, double q, const mb_options& opt) const
    {
        const double e = beta;
        // P(X2 <= α2^{1/β} z) term: (1/2) Σ w_j I_x(1+j, p), x = ρ/(1+ρ)
        double rho = std::exp(la2 / beta) / (2.0 * h2.sigma2 * q);
        double x = rho / (1.0 + rho);
        auto t = series_table(h2, M);
        double first = 0.0;
        for (int j = 0; j <= M; ++j) first += t->w[j] * boost::math::ibeta(1.0 + j, p, x);
        first *= 0.5;

        // shifted term with the z-integral done: Γ(p - e(s+u)) q^{e(s+u)}
        mb::integrand f = shifted(la1, la2, e * std::log(q));
        f.num.push_back({p, {-e, -e}});
        f.poles.push_back({p, {-e, -e}});
        mb::settings st = detail::to_settings(opt);
        st.abs_tol = std::max(st.abs_tol, 0.2 * st.rel_tol * std::tgamma(p) * first);
        mb_result r = mb::integrate(f, {-0.5, 0.5}, st);
        double second = r.value / (2.0 * std::tgamma(p));
        return clamp_probability(first + second, "AF ABEP", 0.5);
    }
};

void check_gamma(double g, const char* what)
{
    if (!(g >= 0.0)) throw domain_error(std::string(what) + ": argument must be non-negative");
}

}  // namespace

double z_cdf(const AfLink& link, double z, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    check_gamma(z, "z_cdf");
    if (z == 0.0) return 0.0;
    const double d = link.d();
    if (d > 0.0 && z * d >= 1.0) return 1.0;
    const double w = z / (1.0 - z * d);
    inverse_sum S(link.hop1, link.hop2, 1.0, ctrl);
    return S.cdf(std::log(link.c2() * w), std::log(link.c1() * w), opt);
}

double z_pdf(const AfLink& link, double z, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    if (!(z > 0.0)) throw domain_error("z_pdf: need z > 0");
    const double d = link.d();
    if (d > 0.0 && z * d >= 1.0) return 0.0;
    const double w = z / (1.0 - z * d);
    inverse_sum S(link.hop1, link.hop2, 1.0, ctrl);
    return S.log_density(std::log(link.c2() * w), std::log(link.c1() * w), opt) / (z * (1.0 - z * d));
}

// 1/γ = d_h + c_h1 o²/(P2 X2) + c_h2 o²/(P1 X1)
double af_snr_cdf(const AfLink& link, double g, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    check_gamma(g, "af_snr_cdf");
    if (g == 0.0) return 0.0;
    const auto& hw = link.hardware;
    if (hw.d_h() > 0.0 && g * hw.d_h() >= 1.0) return 1.0;
    const double w = g / (1.0 - g * hw.d_h());
    inverse_sum S(link.hop1, link.hop2, 1.0, ctrl);
    return S.cdf(std::log(hw.c_h2() * link.noise * w / link.P1),
                 std::log(hw.c_h1() * link.noise * w / link.P2), opt);
}

double af_snr_pdf(const AfLink& link, double g, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    if (!(g > 0.0)) throw domain_error("af_snr_pdf: need gamma > 0");
    const auto& hw = link.hardware;
    if (hw.d_h() > 0.0 && g * hw.d_h() >= 1.0) return 0.0;
    const double w = g / (1.0 - g * hw.d_h());
    inverse_sum S(link.hop1, link.hop2, 1.0, ctrl);
    return S.log_density(std::log(hw.c_h2() * link.noise * w / link.P1),
                         std::log(hw.c_h1() * link.noise * w / link.P2), opt) /
           (g * (1.0 - g * hw.d_h()));
}

double af_ideal_cdf(const AfLink& link, double g, const SeriesControl& ctrl, const mb_options& opt)
{
    AfLink ideal = link;
    ideal.hardware = {};
    return af_snr_cdf(ideal, g, ctrl, opt);
}

double af_ideal_pdf(const AfLink& link, double g, const SeriesControl& ctrl, const mb_options& opt)
{
    AfLink ideal = link;
    ideal.hardware = {};
    return af_snr_pdf(ideal, g, ctrl, opt);
}

PowerSplit optimal_power_split(double q1, double q2, double P)
{
    if (!(q1 > 0.0) || !(q2 > 0.0)) throw domain_error("optimal_power_split: magnitudes must be positive");
    if (!(P > 0.0)) throw domain_error("optimal_power_split: power budget must be positive");
    PowerSplit s;
    s.P1 = 2.0 * P * q2 / (q1 + q2);
    s.P2 = 2.0 * P - s.P1;
    return s;
}

// γ_max <= g  iff  1/|q1| + 1/|q2| >= sqrt(2P/(o² g))
double af_max_snr_cdf(const AfLink& link, double g, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    check_gamma(g, "af_max_snr_cdf");
    if (g == 0.0) return 0.0;
    const double P = 0.5 * (link.P1 + link.P2);
    const double lA = 0.5 * std::log(link.noise * g / (2.0 * P));
    inverse_sum S(link.hop1, link.hop2, 0.5, ctrl);
    return S.cdf(lA, lA, opt);
}

double af_max_snr_pdf(const AfLink& link, double g, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    if (!(g > 0.0)) throw domain_error("af_max_snr_pdf: need gamma > 0");
    const double P = 0.5 * (link.P1 + link.P2);
    const double lA = 0.5 * std::log(link.noise * g / (2.0 * P));
    inverse_sum S(link.hop1, link.hop2, 0.5, ctrl);
    return S.log_density(lA, lA, opt) / (2.0 * g);
}

double af_outage(const AfLink& link, double gamma_th, power_mode mode, const SeriesControl& ctrl,
                 const mb_options& opt)
{
    if (mode == power_mode::optimal) {
        if (!link.hardware.ideal())
            throw domain_error("af_outage: the optimal power split assumes ideal hardware");
        return af_max_snr_cdf(link, gamma_th, ctrl, opt);
    }
    return af_snr_cdf(link, gamma_th, ctrl, opt);
}

double af_abep(const AfLink& link, double p, double q, power_mode mode, const SeriesControl& ctrl,
               const mb_options& opt)
{
    link.validate();
    if (!(p > 0.0) || !(q > 0.0)) throw domain_error("af_abep: need p, q > 0");
    const double o2 = link.noise;
    if (mode == power_mode::optimal) {
        if (!link.hardware.ideal())
            throw domain_error("af_abep: the optimal power split assumes ideal hardware");
        const double P = 0.5 * (link.P1 + link.P2);
        const double la = 0.5 * std::log(o2 / (2.0 * P));
        return inverse_sum(link.hop1, link.hop2, 0.5, ctrl).abep(la, la, p, q, opt);
    }
    if (link.hardware.ideal()) {
        return inverse_sum(link.hop1, link.hop2, 1.0, ctrl)
            .abep(std::log(o2 / link.P1), std::log(o2 / link.P2), p, q, opt);
    }
    // impairments: the SNR is capped at 1/d_h and the cdf is not a pure power of
    // z, so integrate the closed-form cdf numerically up to the cap
    const double cap = 1.0 / link.hardware.d_h();
    // near z = 0 the cdf only needs absolute accuracy; its weight there is tiny
    mb_options inner_opt = opt;
    inner_opt.abs_tol = std::max(opt.abs_tol, 1e-15);
    // z = u^{1/p} turns z^{p-1} dz into du/p and leaves a smooth integrand
    auto g = [&](double u) {
        double z = std::pow(u, 1.0 / p);
        return z > 0.0 ? std::exp(-q * z) * af_snr_cdf(link, z, ctrl, inner_opt) / p : 0.0;
    };
    double inner = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        g, 0.0, std::pow(cap, p), 12, 1e-7);
    double tail = boost::math::gamma_q(p, q * cap);
    double pe = 0.5 * (std::pow(q, p) / std::tgamma(p) * inner + tail);
    return clamp_probability(pe, "AF ABEP", 0.5);
}

}  // namespace ftrlink
