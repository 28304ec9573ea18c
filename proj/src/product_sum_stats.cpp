#include "ftrlink/product_sum_stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ftrlink {

void HopChain::validate() const
{
    if (hops.empty()) throw domain_error("HopChain: needs at least one hop");
    for (const auto& h : hops) h.validate();
}

std::vector<FtrParams> ChainBank::all_hops() const
{
    std::vector<FtrParams> out;
    for (const auto& c : chains) out.insert(out.end(), c.hops.begin(), c.hops.end());
    return out;
}

void ChainBank::validate() const
{
    if (chains.empty()) throw domain_error("ChainBank: needs at least one chain");
    for (const auto& c : chains) {
        c.validate();
        if (c.size() != chains.front().size())
            throw domain_error("ChainBank: all chains must have the same number of hops");
    }
}

namespace {

double truncation_error(const std::vector<FtrParams>& hops, int M)
{
    if (M < 0) throw domain_error("truncation_error: M must be non-negative");
    double log_mass = 0.0;
    for (const auto& h : hops) log_mass += std::log1p(-series_deficit(h, M));
    return std::clamp(-std::expm1(log_mass), 0.0, 1.0);
}

}  // namespace

double truncation_error(const ChainBank& bank, int M)
{
    bank.validate();
    return truncation_error(bank.all_hops(), M);
}

double truncation_error(const HopChain& chain, int M)
{
    chain.validate();
    return truncation_error(chain.hops, M);
}

namespace detail {

moment_kernel::moment_kernel(const FtrParams& p, int M)
{
    auto t = series_table(p, M);
    w_.assign(t->w.begin(), t->w.begin() + M + 1);
    // K = 0 and friends: drop the exact zeros at the tail
    while (w_.size() > 1 && w_.back() == 0.0) w_.pop_back();
    log_scale_ = std::log(2.0 * p.sigma2);
}

cplx moment_kernel::log_moment(cplx t) const
{
    // Σ w_j Γ(1+j+t)/Γ(1+j) = Γ(1+t) Σ w_j ρ_j, ρ_{j+1} = ρ_j (1+j+t)/(1+j)
    cplx sum = 0.0, rho = 1.0;
    double shift = 0.0;
    for (std::size_t j = 0; j < w_.size(); ++j) {
        sum += w_[j] * rho;
        rho *= (1.0 + j + t) / (1.0 + j);
        double a = std::abs(rho);
        if (a > 1e200) {
            rho /= a;
            sum /= a;
            shift += std::log(a);
        }
    }
    return ln_gamma(1.0 + t) + std::log(sum) + shift + t * log_scale_;
}

chain_kernel::chain_kernel(const HopChain& chain, int M)
{
    for (const auto& h : chain.hops) hops_.emplace_back(h, M);
}

cplx chain_kernel::operator()(cplx s) const
{
    cplx r = 0.0;
    for (const auto& h : hops_) r += h.log_moment(0.5 * s);
    return r;
}

mb::settings to_settings(const mb_options& opt)
{
    mb::settings s;
    s.rel_tol = opt.rel_tol;
    s.abs_tol = opt.abs_tol;
    s.parallel = opt.parallel;
    s.resolution = opt.resolution;
    // these integrands are smooth on the real section; the minimum of the
    // section is always the better contour
    s.saddle = true;
    return s;
}

}  // namespace detail

namespace {

enum class bank_kind { pdf, cdf };

// F_Y(y) = (2πi)^{-L} ∫ prod_ι Γ(-s_ι) E[X_ι^{s_ι}] y^{-Σs} / Γ(1 - Σs) ds
// f_Y(y) = (2πi)^{-L} ∫ prod_ι Γ(-s_ι) E[X_ι^{s_ι}] y^{-Σs-1} / Γ(-Σs) ds
// with -2 < Re s_ι < 0
double bank_integral(const ChainBank& bank, double y, bank_kind kind, const SeriesControl& ctrl,
                     const mb_options& opt)
{
    const std::size_t L = bank.size();
    if (L > max_closed_form_dim) {
        std::ostringstream os;
        os << "sum of " << L << " products needs a " << L
           << "-fold contour integral; the closed form is capped at " << max_closed_form_dim
           << ", use the Monte-Carlo estimators instead";
        throw dimension_error(os.str());
    }
    const int M = truncation_index(bank.all_hops(), ctrl);
    const double ly = std::log(y);

    mb::integrand f;
    f.dim = L;
    for (std::size_t i = 0; i < L; ++i) {
        detail::chain_kernel k(bank.chains[i], M);
        // Γ(-s) stays inside the axis kernel so the only coupling is Γ(.-Σs)
        f.axis.push_back([k, ly](cplx s) { return k(s) + ln_gamma(-s) - s * ly; });
        std::vector<double> half(L, 0.0);
        half[i] = 0.5;
        f.poles.push_back({1.0, half});
        std::vector<double> neg(L, 0.0);
        neg[i] = -1.0;
        f.poles.push_back({0.0, neg});
        f.rate.push_back(std::fabs(ly));
    }
    f.den.push_back({kind == bank_kind::cdf ? 1.0 : 0.0, std::vector<double>(L, -1.0)});

    std::vector<double> c(L, -0.5);
    mb_result r = mb::integrate(f, c, detail::to_settings(opt));
    double mass = 1.0 - truncation_error(bank.all_hops(), M);
    if (kind == bank_kind::cdf) return clamp_probability(r.value, "sum_product_cdf", mass);
    return std::max(0.0, r.value / y);
}

}  // namespace

double product_moment(const HopChain& chain, double s, const SeriesControl& ctrl)
{
    chain.validate();
    if (!(s > -2.0)) throw domain_error("product_moment: need s > -2");
    detail::chain_kernel k(chain, truncation_index(chain.hops, ctrl));
    return std::exp(k(s).real());
}

double product_pdf(const HopChain& chain, double x, const SeriesControl& ctrl, const mb_options& opt)
{
    chain.validate();
    if (!(x > 0.0)) throw domain_error("product_pdf: need x > 0");
    detail::chain_kernel k(chain, truncation_index(chain.hops, ctrl));
    const double lx = std::log(x);
    // f_X(x) = (2πi)^{-1} ∫ E[X^s] x^{-s-1} ds, Re s > -2
    mb::integrand f;
    f.axis.push_back([k, lx](cplx s) { return k(s) - (s + 1.0) * lx; });
    f.poles.push_back({1.0, {0.5}});
    f.rate.push_back(std::fabs(lx));
    mb_result r = mb::integrate(f, {0.0}, detail::to_settings(opt));
    return std::max(0.0, r.value);
}

double product_cdf(const HopChain& chain, double x, const SeriesControl& ctrl, const mb_options& opt)
{
    chain.validate();
    if (!(x >= 0.0)) throw domain_error("product_cdf: need x >= 0");
    if (x == 0.0) return 0.0;
    return bank_integral(ChainBank{{chain}}, x, bank_kind::cdf, ctrl, opt);
}

double product_mgf(const HopChain& chain, double s, const SeriesControl& ctrl, const mb_options& opt)
{
    chain.validate();
    if (!(s > 0.0)) throw domain_error("product_mgf: need s > 0");
    const int M = truncation_index(chain.hops, ctrl);
    detail::chain_kernel k(chain, M);
    const double ls = std::log(s);
    // E[e^{-sX}] = (2πi)^{-1} ∫ Γ(-u) s^u E[X^u] du, -2 < Re u < 0
    mb::integrand f;
    f.axis.push_back([k, ls](cplx u) { return k(u) + u * ls; });
    f.num.push_back({0.0, {-1.0}});
    f.poles.push_back({0.0, {-1.0}});
    f.poles.push_back({1.0, {0.5}});
    f.rate.push_back(std::fabs(ls));
    mb_result r = mb::integrate(f, {-0.5}, detail::to_settings(opt));
    double mass = 1.0 - truncation_error(chain.hops, M);
    return clamp_probability(r.value, "product_mgf", mass);
}

double sum_product_pdf(const ChainBank& bank, double y, const SeriesControl& ctrl,
                       const mb_options& opt)
{
    bank.validate();
    if (!(y > 0.0)) throw domain_error("sum_product_pdf: need y > 0");
    return bank_integral(bank, y, bank_kind::pdf, ctrl, opt);
}

double sum_product_cdf(const ChainBank& bank, double y, const SeriesControl& ctrl,
                       const mb_options& opt)
{
    bank.validate();
    if (!(y >= 0.0)) throw domain_error("sum_product_cdf: need y >= 0");
    if (y == 0.0) return 0.0;
    return bank_integral(bank, y, bank_kind::cdf, ctrl, opt);
}

}  // namespace ftrlink
