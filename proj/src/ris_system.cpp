#include "ftrlink/ris_system.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace ftrlink {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap(double a)
{
    a = std::fmod(a, two_pi);
    return a < 0.0 ? a + two_pi : a;
}

bool same(const FtrParams& a, const FtrParams& b)
{
    return a.m == b.m && a.K == b.K && a.delta == b.delta && a.sigma2 == b.sigma2;
}

void check_amplitudes(const RisLink& link, const std::vector<double>& h, const std::vector<double>& g,
                      const char* what)
{
    if (h.size() != link.size() || g.size() != link.size()) {
        std::ostringstream os;
        os << what << ": expected " << link.size() << " amplitudes per hop, got " << h.size() << " and "
           << g.size();
        throw domain_error(os.str());
    }
}

}  // namespace

ChainBank RisLink::bank() const
{
    ChainBank b;
    for (const auto& e : elements) b.chains.push_back(HopChain{{e.h, e.g}});
    return b;
}

std::vector<double> RisLink::channel_phases() const
{
    std::vector<double> a(size());
    for (std::size_t i = 0; i < size(); ++i) a[i] = theta1[i] + theta2[i];
    return a;
}

void RisLink::validate() const
{
    if (elements.empty()) throw domain_error("RisLink: needs at least one element");
    for (const auto& e : elements) {
        e.h.validate();
        e.g.validate();
    }
    if (theta1.size() != size() || theta2.size() != size() || phi.size() != size())
        throw domain_error("RisLink: theta1, theta2 and phi need one entry per element");
    if (!(P > 0.0) || !(noise > 0.0)) throw domain_error("RisLink: P and noise must be positive");
}

RisLink RisLink::uniform(std::size_t L, const FtrParams& h, const FtrParams& g, double P, double noise)
{
    RisLink r;
    r.elements.assign(L, RisElement{h, g});
    r.theta1.assign(L, 0.0);
    r.theta2.assign(L, 0.0);
    r.phi.assign(L, 0.0);
    r.P = P;
    r.noise = noise;
    return r;
}

void PhaseOptimizerConfig::validate() const
{
    if (M1 < 1 || M2 < 1 || oracle_trials < 1)
        throw domain_error("PhaseOptimizerConfig: M1, M2 and oracle_trials must be positive");
}

double snr_instant(const RisLink& link, const std::vector<double>& h, const std::vector<double>& g)
{
    link.validate();
    check_amplitudes(link, h, g, "snr_instant");
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < link.size(); ++i)
        s += h[i] * g[i] * std::polar(1.0, link.theta1[i] + link.theta2[i] + link.phi[i]);
    return std::norm(s) * link.P / link.noise;
}

double snr_max(const RisLink& link, const std::vector<double>& h, const std::vector<double>& g)
{
    link.validate();
    check_amplitudes(link, h, g, "snr_max");
    double s = 0.0;
    for (std::size_t i = 0; i < link.size(); ++i) s += h[i] * g[i];
    return s * s * link.P / link.noise;
}

double ris_snr_cdf(const RisLink& link, double z, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    if (!(z >= 0.0)) throw domain_error("ris_snr_cdf: z must be non-negative");
    if (z == 0.0) return 0.0;
    return sum_product_cdf(link.bank(), std::sqrt(z * link.noise / link.P), ctrl, opt);
}

double ris_snr_pdf(const RisLink& link, double z, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    if (!(z > 0.0)) throw domain_error("ris_snr_pdf: z must be positive");
    double y = std::sqrt(z * link.noise / link.P);
    return sum_product_pdf(link.bank(), y, ctrl, opt) * y / (2.0 * z);
}

double ris_outage(const RisLink& link, double gamma_th, const SeriesControl& ctrl, const mb_options& opt)
{
    if (!(gamma_th > 0.0)) throw domain_error("ris_outage: threshold must be positive");
    return ris_snr_cdf(link, gamma_th, ctrl, opt);
}

// Interval halving per element.  The first comparison is between the current
// shift and its opposite; after that the two quarter-points of the kept half
// are compared, and the winner becomes the centre of the next, halved interval.
PhaseSearchResult optimize_phases(const RisLink& link, const PhaseOptimizerConfig& cfg,
                                  const MeasurementOracle& oracle)
{
    link.validate();
    cfg.validate();
    PhaseSearchResult out;
    std::vector<double> phi = link.phi;
    for (auto& p : phi) p = wrap(p);

    for (int sweep = 0; sweep < cfg.M2; ++sweep) {
        for (std::size_t l = 0; l < link.size(); ++l) {
            double centre = phi[l];
            double a = centre, b = centre + std::numbers::pi;
            double step = std::numbers::pi / 2;
            for (int k = 0; k < cfg.M1; ++k) {
                phi[l] = wrap(a);
                double ea = oracle(phi);
                phi[l] = wrap(b);
                double eb = oracle(phi);
                centre = ea >= eb ? a : b;
                out.trace.push_back(std::max(ea, eb));
                step *= 0.5;
                a = centre - step;
                b = centre + step;
            }
            phi[l] = wrap(centre);
        }
    }
    out.phi = phi;
    out.common_phase = wrap(link.theta1[0] + link.theta2[0] + phi[0]);
    out.probes_per_element = cfg.M1 * cfg.M2;
    return out;
}

ExpectationOpt expectation_opt(const RisLink& link, const SeriesControl& ctrl)
{
    link.validate();
    ExpectationOpt e;
    for (const auto& el : link.elements) {
        e.per_element.push_back(product_moment(HopChain{{el.h, el.g}}, 1.0, ctrl));
        e.total += e.per_element.back();
    }
    return e;
}

double phase_fixed_point(const std::vector<double>& alpha)
{
    const std::size_t L = alpha.size();
    if (L < 2) throw domain_error("phase_fixed_point: needs at least two elements");
    double s = 0.0;
    for (std::size_t l = 1; l < L; ++l) s += static_cast<double>(l) * alpha[l];
    return 2.0 * s / (static_cast<double>(L) * (L - 1));
}

double ris_abep(const RisLink& link, double p, double q, const SeriesControl& ctrl, const mb_options& opt)
{
    link.validate();
    if (!(p > 0.0) || !(q > 0.0)) throw domain_error("ris_abep: p and q must be positive");
    const std::size_t L = link.size();
    if (L > max_closed_form_dim) return detail::ris_abep_numeric(link, p, q, ctrl);

    // the z-integral of the error-probability form against y^{-Σs}, y = sqrt(z o²/P), leaves
    // Γ(p - Σs/2) (qP/o²)^{Σs/2} / Γ(1 - Σs)
    const ChainBank bank = link.bank();
    const int M = truncation_index(bank.all_hops(), ctrl);
    const double lr = 0.5 * std::log(link.noise / (q * link.P));
    mb::integrand f;
    f.dim = L;
    for (std::size_t i = 0; i < L; ++i) {
        detail::chain_kernel k(bank.chains[i], M);
        f.axis.push_back([k, lr](cplx s) { return k(s) + ln_gamma(-s) - s * lr; });
        std::vector<double> half(L, 0.0), neg(L, 0.0);
        half[i] = 0.5;
        neg[i] = -1.0;
        f.poles.push_back({1.0, half});
        f.poles.push_back({0.0, neg});
        f.rate.push_back(std::fabs(lr));
    }
    f.num.push_back({p, std::vector<double>(L, -0.5)});
    f.poles.push_back({p, std::vector<double>(L, -0.5)});
    f.den.push_back({1.0, std::vector<double>(L, -1.0)});
    mb_result r = mb::integrate(f, std::vector<double>(L, -0.5), detail::to_settings(opt));
    return clamp_probability(r.value / (2.0 * std::tgamma(p)), "ris_abep", 0.5);
}

namespace detail {

namespace {

// Gauss-Legendre rule on [a, b], appended to (x, w)
void add_panel(double a, double b, std::vector<double>& x, std::vector<double>& w)
{
    using rule = boost::math::quadrature::gauss<double, 20>;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule::abscissa().size(); ++i) {
        for (double sgn : {-1.0, 1.0}) {
            x.push_back(mid + sgn * half * rule::abscissa()[i]);
            w.push_back(half * rule::weights()[i]);
        }
    }
}

// upper point of the support for tabulation: walk out from the mean until
// x f(x), which bounds the remaining mass for these log-concave-like tails,
// drops below 1e-15.  High moments are no help here; the truncated series
// underestimates them.
double tail_point(const HopChain& c, const SeriesControl& ctrl)
{
    double x = 2.0 * product_moment(c, 1.0, ctrl);
    while (x * product_pdf(c, x, ctrl, {1e-8}) > 1e-15) x *= 1.25;
    return x;
}

// density of one product times quadrature weights on a graded
// Gauss-Legendre grid over [0, x_hi]
struct tabulated_density {
    std::vector<double> x, fw;

    double t_max = 0.0;  // highest frequency the panels resolve

    tabulated_density(const HopChain& c, const SeriesControl& ctrl, double x_hi, int panels)
    {
        std::vector<double> w;
        // doubling panels near 0, where the density has a log-type kink, then
        // uniform ones; no panel wider than the uniform width
        const double width = x_hi / panels;
        double b = x_hi * 1e-7;
        add_panel(0.0, b, x, w);
        while (2 * b < width) {
            add_panel(b, 2 * b, x, w);
            b *= 2;
        }
        const int n = static_cast<int>(std::ceil((x_hi - b) / width));
        const double step = (x_hi - b) / n;
        for (int i = 0; i < n; ++i) add_panel(b + i * step, b + (i + 1) * step, x, w);
        // a 20-point rule stays exact for e^{itx} up to about 16 rad per panel
        t_max = 16.0 / step;
        fw.resize(x.size());
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i)
            fw[i] = w[i] * product_pdf(c, x[i], ctrl, {1e-10});
    }

    void cf(const std::vector<double>& t, std::vector<std::complex<double>>& out) const
    {
        out.assign(t.size(), 0.0);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(t.size()); ++k) {
            std::complex<double> s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) s += fw[i] * std::polar(1.0, t[k] * x[i]);
            out[k] = s;
        }
    }

    double mass() const
    {
        double m = 0.0;
        for (double v : fw) m += v;
        return m;
    }
};

}  // namespace

sum_cdf_numeric::sum_cdf_numeric(const ChainBank& bank, const SeriesControl& ctrl)
{
    bank.validate();
    // distinct chains and how often each occurs
    std::vector<HopChain> kinds;
    std::vector<int> count;
    for (const auto& c : bank.chains) {
        auto it = std::find_if(kinds.begin(), kinds.end(), [&](const HopChain& k) {
            return k.size() == c.size() &&
                   std::equal(k.hops.begin(), k.hops.end(), c.hops.begin(), same);
        });
        if (it == kinds.end()) {
            kinds.push_back(c);
            count.push_back(1);
        } else {
            ++count[it - kinds.begin()];
        }
    }
    std::vector<tabulated_density> dens;
    std::vector<double> x_hi;
    std::vector<int> panels;
    mass_ = 1.0;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        x_hi.push_back(tail_point(kinds[i], ctrl));
        panels.push_back(64);
        y_hi_ += count[i] * x_hi[i];
        dens.emplace_back(kinds[i], ctrl, x_hi[i], panels[i]);
        mass_ *= std::pow(std::min(dens.back().mass(), 1.0), count[i]);
    }

    // frequency panels short enough for e^{-ity} up to y_hi, extended until
    // the characteristic function of the sum is negligible
    const double dt = 2.0 * std::numbers::pi / y_hi_;
    const int batch = 64;
    const int max_panels = 1 << 15;
    for (int start = 0;; start += batch) {
        if (start >= max_panels)
            throw convergence_error("sum cdf: characteristic function does not decay", 0.0);
        std::vector<double> t, w;
        for (int i = start; i < start + batch; ++i) add_panel(i * dt, (i + 1) * dt, t, w);
        std::vector<std::complex<double>> total(t.size(), 1.0), cf;
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            // finer tabulation once the sweep outruns the panels
            if (dens[i].t_max < t.back()) {
                while (16.0 * panels[i] / x_hi[i] < 1.05 * t.back()) panels[i] *= 2;
                dens[i] = tabulated_density(kinds[i], ctrl, x_hi[i], panels[i]);
            }
            dens[i].cf(t, cf);
            for (std::size_t k = 0; k < t.size(); ++k) total[k] *= std::pow(cf[k], count[i]);
        }
        double peak = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            t_.push_back(t[k]);
            w_.push_back(w[k]);
            re_.push_back(total[k].real());
            im_.push_back(total[k].imag());
            peak = std::max(peak, std::abs(total[k]));
        }
        // the tail of the inversion integral is bounded by |φ|/t
        if (peak / t.back() < 1e-12) break;
    }
}

double sum_cdf_numeric::operator()(double y) const
{
    if (y <= 0.0) return 0.0;
    // F(y) = 1/2 - (1/π) ∫_0^∞ Im(e^{-ity} φ(t)) / t dt
    double s = 0.0;
    for (std::size_t k = 0; k < t_.size(); ++k) {
        double c = std::cos(t_[k] * y), sn = std::sin(t_[k] * y);
        s += w_[k] * (im_[k] * c - re_[k] * sn) / t_[k];
    }
    return std::clamp(0.5 * mass_ - s / std::numbers::pi, 0.0, mass_);
}

double ris_abep_numeric(const RisLink& link, double p, double q, const SeriesControl& ctrl)
{
    link.validate();
    if (!(p > 0.0) || !(q > 0.0)) throw domain_error("ris_abep: p and q must be positive");
    sum_cdf_numeric F(link.bank(), ctrl);
    const double scale = link.noise / link.P;
    const double z_hi = std::min(F.upper() * F.upper() / scale, 60.0 / q);
    // z = u^{1/p}: z^{p-1} dz = du/p
    auto g = [&](double u) {
        double z = std::pow(u, 1.0 / p);
        return std::exp(-q * z) * F(std::sqrt(z * scale)) / p;
    };
    double inner = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        g, 0.0, std::pow(z_hi, p), 10, 1e-7);
    double tail = boost::math::gamma_q(p, q * z_hi) * F(std::sqrt(z_hi * scale));
    double pe = 0.5 * (std::pow(q, p) / std::tgamma(p) * inner + tail);
    return clamp_probability(pe, "ris_abep", 0.5);
}

}  // namespace detail

}  // namespace ftrlink
