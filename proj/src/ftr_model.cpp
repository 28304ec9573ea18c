#include "ftrlink/ftr_model.hpp"

#include <algorithm>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <tuple>

#include "ftrlink/special_functions.hpp"
#include "legendre_series.hpp"

namespace ftrlink {

namespace mp = boost::multiprecision;

// ---------------------------------------------------------------------------
// warnings

namespace {

std::mutex warn_mutex;
warning_handler& handler_slot()
{
    // each distinct message once; sweeps would otherwise repeat it per point
    static warning_handler h = [](const std::string& msg) {
        static std::set<std::string> seen;
        if (seen.insert(msg).second) std::cerr << "warning: " << msg << '\n';
    };
    return h;
}

}  // namespace

void set_warning_handler(warning_handler h)
{
    std::lock_guard lock(warn_mutex);
    handler_slot() = h ? std::move(h) : [](const std::string&) {};
}

void warn(const std::string& msg)
{
    std::lock_guard lock(warn_mutex);
    handler_slot()(msg);
}

double clamp_probability(double v, const char* what, double hi)
{
    if (std::isnan(v)) throw domain_error(std::string(what) + ": probability is NaN");
    if (v < -1e-6 || v > hi + 1e-6) {
        std::ostringstream os;
        os << what << ": value " << v << " clamped to [0, " << hi << "]";
        warn(os.str());
    }
    return std::clamp(v, 0.0, hi);
}

// ---------------------------------------------------------------------------

void FtrParams::validate() const
{
    if (!(m > 0.0)) throw domain_error("FTR: m must be positive");
    if (!(K >= 0.0)) throw domain_error("FTR: K must be non-negative");
    if (!(delta >= 0.0 && delta <= 1.0)) throw domain_error("FTR: delta must lie in [0, 1]");
    if (!(sigma2 > 0.0)) throw domain_error("FTR: sigma2 must be positive");
}

FtrParams FtrParams::from_upsilon(double m, double K, double delta, double upsilon)
{
    FtrParams p{m, K, delta, upsilon / (2.0 * (1.0 + K))};
    p.validate();
    return p;
}

namespace {

using mp50 = mp::mpfr_float_50;

// The coefficient is a double sum over (k, l) with alternating sign in k; the
// positive part exceeds the result by roughly ((a+b)/(a-b))^n, so the working
// precision grows with n.
int digits_needed(int n, double a, double b)
{
    double growth = b > 0.0 ? std::log10((a + b) / (a - b)) : 0.0;
    return 30 + static_cast<int>(std::ceil(n * growth + 2.0 * std::log10(n + 2.0)));
}

template <class T>
T d_coefficient(int n, const FtrParams& p)
{
    using std::pow;
    using std::sqrt;
    T m = p.m, K = p.K, D = p.delta;
    T a = m + K, b = K * D;
    T R = a * a - b * b;
    T x = a / sqrt(R);
    T nu = T(n) + m - 1;
    const double tol = std::pow(10.0, -std::numeric_limits<T>::digits10 + 5);

    // Γ(ν+1-μ) P^μ_ν = Γ(ν+1+|μ|) P^{-|μ|}_ν, symmetric in μ
    // P^{-μ}_ν for μ = n, n-1 from the series, the rest by the recurrence
    // toward order 0, where every term is positive since ν - j - 1 >= m > 0.
    // At x = 1 (Δ = 0) only order 0 survives.
    std::vector<T> term(n + 1);
    term[n] = detail::legendre_negative_order<T>(nu, n, x, tol);
    if (n >= 1) term[n - 1] = detail::legendre_negative_order<T>(nu, n - 1, x, tol);
    if (n >= 2 && !(x > 1)) term[0] = 1;
    if (n >= 2 && x > 1) {
        T r = x / sqrt(x * x - 1);
        for (int j = n - 2; j >= 0; --j)
            term[j] = 2 * (j + 1) * r * term[j + 1] + (nu + j + 2) * (nu - j - 1) * term[j + 2];
    }
    T g = mp::tgamma(T(n) + m);
    for (int mu = 0; mu <= n; ++mu) {
        term[mu] *= g;
        g *= T(n) + m + mu;
    }

    // exp(iπ(2l-k)/2) from the series times exp(-iπμ/2), μ = k-2l, from the
    // continuation of P across the cut: the product is (-1)^k for every l
    T sum = 0, binom_nk = 1, half_d = 1;
    for (int k = 0; k <= n; ++k) {
        T inner = 0, c_kl = 1;
        for (int l = 0; l <= k; ++l) {
            inner += c_kl * term[std::abs(k - 2 * l)];
            c_kl = c_kl * (k - l) / (l + 1);
        }
        T t = binom_nk * half_d * inner;
        sum += (k & 1) ? -t : t;
        binom_nk = binom_nk * (n - k) / (k + 1);
        half_d *= D / 2;
    }
    return sum * pow(R, -(T(n) + m) / 2);
}

template <class T>
mp50 weight(int n, const FtrParams& p)
{
    using std::pow;
    T m = p.m, K = p.K;
    T d = d_coefficient<T>(n, p);
    T w = pow(m, m) * pow(K, n) * d / (mp::tgamma(m) * mp::tgamma(T(n + 1)));
    return mp50(w);
}

template <class T>
double coefficient(int n, const FtrParams& p)
{
    return static_cast<double>(d_coefficient<T>(n, p));
}

template <unsigned N>
using mpn = mp::number<mp::mpfr_float_backend<N>>;

mp50 weight_any(int n, const FtrParams& p)
{
    if (p.K == 0.0) return n == 0 ? mp50(1) : mp50(0);
    int digits = digits_needed(n, p.m + p.K, p.K * p.delta);
    if (digits <= 50) return weight<mp50>(n, p);
    if (digits <= 100) return weight<mp::mpfr_float_100>(n, p);
    if (digits <= 250) return weight<mpn<250>>(n, p);
    if (digits <= 600) return weight<mpn<600>>(n, p);
    std::ostringstream os;
    os << "FTR coefficient " << n << " needs " << digits << " digits (m=" << p.m << ", K=" << p.K
       << ", delta=" << p.delta << ")";
    throw domain_error(os.str());
}

struct cache_entry {
    std::shared_ptr<const ftr_series> table;
    mp50 running_mass = 0;
};

std::shared_mutex cache_mutex;
std::map<std::tuple<double, double, double>, cache_entry>& cache()
{
    static std::map<std::tuple<double, double, double>, cache_entry> c;
    return c;
}

}  // namespace

double coefficient_d(int n, const FtrParams& p)
{
    p.validate();
    if (n < 0) throw domain_error("coefficient_d: n must be non-negative");
    int digits = digits_needed(n, p.m + p.K, p.K * p.delta);
    if (digits <= 50) return coefficient<mp50>(n, p);
    if (digits <= 100) return coefficient<mp::mpfr_float_100>(n, p);
    if (digits <= 250) return coefficient<mpn<250>>(n, p);
    if (digits <= 600) return coefficient<mpn<600>>(n, p);
    throw domain_error("coefficient_d: parameters need more than 600 digits");
}

std::shared_ptr<const ftr_series> series_table(const FtrParams& p, int max_index)
{
    p.validate();
    auto key = std::make_tuple(p.m, p.K, p.delta);
    {
        std::shared_lock lock(cache_mutex);
        auto it = cache().find(key);
        if (it != cache().end() && static_cast<int>(it->second.table->w.size()) > max_index)
            return it->second.table;
    }
    std::unique_lock lock(cache_mutex);
    cache_entry& e = cache()[key];
    if (e.table && static_cast<int>(e.table->w.size()) > max_index) return e.table;
    auto next = e.table ? std::make_shared<ftr_series>(*e.table) : std::make_shared<ftr_series>();
    int target = ((max_index + 1 + 15) / 16) * 16;
    for (int n = static_cast<int>(next->w.size()); n < target; ++n) {
        mp50 w = weight_any(n, p);
        e.running_mass += w;
        next->w.push_back(static_cast<double>(w));
        next->deficit.push_back(std::max(0.0, static_cast<double>(mp50(1) - e.running_mass)));
    }
    e.table = next;
    return e.table;
}

double series_mass(const FtrParams& p, int M)
{
    auto t = series_table(p, M);
    double s = 0.0;
    for (int j = 0; j <= M; ++j) s += t->w[j];
    return s;
}

double series_deficit(const FtrParams& p, int M) { return series_table(p, M)->deficit[M]; }

int truncation_index(const std::vector<FtrParams>& hops, const SeriesControl& ctrl, double* eps)
{
    if (ctrl.max_terms < 1) throw domain_error("SeriesControl: max_terms must be >= 1");
    if (!(ctrl.target_epsilon > 0.0)) throw domain_error("SeriesControl: target_epsilon must be positive");
    double e = 1.0;
    int M = 0;
    for (M = 0; M <= ctrl.max_terms; ++M) {
        double log_mass = 0.0;
        for (const auto& h : hops) log_mass += std::log1p(-series_deficit(h, M));
        e = -std::expm1(log_mass);
        if (e < ctrl.target_epsilon) break;
    }
    if (M > ctrl.max_terms) {
        M = ctrl.max_terms;
        if (e >= ctrl.target_epsilon * 10.0) {
            std::ostringstream os;
            os << "series truncated at M=" << M << " with truncation error " << e << " (target "
               << ctrl.target_epsilon << ")";
            warn(os.str());
        }
    }
    if (eps) *eps = e;
    return M;
}

// ---------------------------------------------------------------------------

double pdf_squared(const FtrParams& p, double gamma, const SeriesControl& ctrl)
{
    if (!(gamma >= 0.0)) throw domain_error("pdf_squared: gamma must be non-negative");
    int M = truncation_index({p}, ctrl);
    auto t = series_table(p, M);
    const double s2 = 2.0 * p.sigma2;
    if (gamma == 0.0) return t->w[0] / s2;
    const double x = gamma / s2, lx = std::log(x);
    // log of the Poisson weight x^j e^{-x} / j!
    double lp = -x, sum = 0.0;
    for (int j = 0; j <= M; ++j) {
        if (j > 0) lp += lx - std::log(static_cast<double>(j));
        if (t->w[j] > 0.0) sum += t->w[j] * std::exp(lp);
    }
    return sum / s2;
}

double cdf_squared(const FtrParams& p, double gamma, const SeriesControl& ctrl)
{
    if (!(gamma >= 0.0)) throw domain_error("cdf_squared: gamma must be non-negative");
    if (gamma == 0.0) return 0.0;
    int M = truncation_index({p}, ctrl);
    auto t = series_table(p, M);
    const double x = gamma / (2.0 * p.sigma2), lx = std::log(x);
    // P(j, x) = P(j+1, x) + x^j e^{-x} / j!, run downwards so every step adds a
    // positive term
    double P = gamma_p(M + 1.0, x);
    double lp = M * lx - x - std::lgamma(M + 1.0);
    double sum = 0.0;
    for (int j = M; j >= 0; --j) {
        if (t->w[j] > 0.0) sum += t->w[j] * P;
        if (j > 0) {
            P += std::exp(lp);
            lp -= lx - std::log(static_cast<double>(j));
        }
    }
    return sum;
}

double envelope_pdf(const FtrParams& p, double r, const SeriesControl& ctrl)
{
    if (!(r >= 0.0)) throw domain_error("envelope_pdf: r must be non-negative");
    return 2.0 * r * pdf_squared(p, r * r, ctrl);
}

double envelope_cdf(const FtrParams& p, double r, const SeriesControl& ctrl)
{
    if (!(r >= 0.0)) throw domain_error("envelope_cdf: r must be non-negative");
    return cdf_squared(p, r * r, ctrl);
}

double envelope_moment(const FtrParams& p, double s, const SeriesControl& ctrl)
{
    if (!(s > -2.0)) throw domain_error("envelope_moment: order must exceed -2");
    int M = truncation_index({p}, ctrl);
    auto t = series_table(p, M);
    double sum = 0.0;
    for (int j = 0; j <= M; ++j)
        if (t->w[j] > 0.0)
            sum += t->w[j] * std::exp(std::lgamma(1.0 + j + s / 2) - std::lgamma(1.0 + j));
    return sum * std::pow(2.0 * p.sigma2, s / 2);
}

// ---------------------------------------------------------------------------

std::pair<double, double> specular_amplitudes(const FtrParams& p)
{
    double sigma = std::sqrt(p.sigma2);
    double root = std::sqrt(std::max(0.0, 1.0 - p.delta * p.delta));
    return {sigma * std::sqrt(p.K * (1.0 + root)), sigma * std::sqrt(p.K * (1.0 - root))};
}

double draw_envelope(const FtrParams& p, philox_stream& rng)
{
    auto [v1, v2] = specular_amplitudes(p);
    double sigma = std::sqrt(p.sigma2);
    double zeta = rng.gamma(p.m) / p.m;
    double sz = std::sqrt(zeta);
    double phi1 = 2.0 * std::numbers::pi * rng.uniform();
    double phi2 = 2.0 * std::numbers::pi * rng.uniform();
    double x = sigma * rng.normal();
    double y = sigma * rng.normal();
    double re = sz * (v1 * std::cos(phi1) + v2 * std::cos(phi2)) + x;
    double im = sz * (v1 * std::sin(phi1) + v2 * std::sin(phi2)) + y;
    return std::hypot(re, im);
}

std::vector<double> sample_envelope(const FtrParams& p, std::size_t count, std::uint64_t seed)
{
    p.validate();
    if (count < 1) throw domain_error("sample_envelope: count must be >= 1");
    std::vector<double> out(count);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < count; ++i) {
        philox_stream rng(seed, i);
        out[i] = draw_envelope(p, rng);
    }
    return out;
}

}  // namespace ftrlink
