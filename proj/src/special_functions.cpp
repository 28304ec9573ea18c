#include "ftrlink/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "legendre_series.hpp"
#include "ftrlink/mellin_barnes.hpp"

namespace ftrlink {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double ln_sqrt_2pi = 0.91893853320467274178;
constexpr double ln_pi = 1.14472988584940017414;

// B_2k / (2k (2k-1))
constexpr double stirling_coef[] = {
    1.0 / 12.0,         -1.0 / 360.0,   1.0 / 1260.0,  -1.0 / 1680.0,
    1.0 / 1188.0,       -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0,
    43867.0 / 244188.0,
};

cplx stirling(cplx z)
{
    cplx zi = 1.0 / z;
    cplx zi2 = zi * zi;
    cplx sum = 0.0;
    cplx p = zi;
    for (double c : stirling_coef) {
        sum += c * p;
        p *= zi2;
    }
    return (z - 0.5) * std::log(z) - z + ln_sqrt_2pi + sum;
}

// Re z >= 0.5
cplx ln_gamma_right(cplx z)
{
    cplx acc = 0.0;
    while (std::norm(z) < 144.0) {
        acc += std::log(z);
        z += 1.0;
    }
    return stirling(z) - acc;
}

// log sin(πz) on the branch that keeps ln Γ continuous off the negative axis
cplx log_sin_pi(cplx z)
{
    bool lower = z.imag() < 0.0;
    if (lower) z = std::conj(z);
    const cplx i(0.0, 1.0);
    cplx e = std::exp(2.0 * pi * i * z);
    cplx r = -i * pi * z + i * (pi / 2) - std::log(2.0) + std::log(1.0 - e);
    return lower ? std::conj(r) : r;
}

}  // namespace

cplx ln_gamma(cplx z)
{
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
        std::ostringstream os;
        os << "ln_gamma: pole at z = " << z.real();
        throw domain_error(os.str());
    }
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw domain_error("ln_gamma: non-finite argument");
    if (z.imag() == 0.0 && z.real() > 0.0) return std::lgamma(z.real());
    if (z.real() < 0.5)
        return ln_pi - log_sin_pi(z) - ln_gamma_right(1.0 - z);
    return ln_gamma_right(z);
}

// ---------------------------------------------------------------------------

namespace {

// P(a,x) by series, valid for x < a + 1
double gamma_p_series(double a, double x)
{
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < 100000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a,x) by Lentz continued fraction, valid for x >= a + 1
double gamma_q_cf(double a, double x)
{
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x)
{
    if (!(a > 0.0)) throw domain_error("incomplete gamma: a must be positive");
    if (!(x >= 0.0)) throw domain_error("incomplete gamma: x must be non-negative");
}

}  // namespace

double gamma_p(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double incomplete_gamma(double a, double x, gamma_kind kind)
{
    double g = std::tgamma(a);
    return kind == gamma_kind::lower ? g * gamma_p(a, x) : g * gamma_q(a, x);
}

// ---------------------------------------------------------------------------

double legendre_p(double degree, int order, double x)
{
    if (!(x >= 1.0)) throw domain_error("legendre_p: x must be >= 1");
    int n = order < 0 ? -order : order;
    double b = detail::legendre_negative_order(degree, n, x, 1e-17);
    if (order <= 0) return b;
    return detail::rising_ratio(degree, n) * b;
}

// ---------------------------------------------------------------------------

double gauss_2f1(double a, double b, double c, double z)
{
    if (c <= 0.0 && c == std::floor(c))
        throw domain_error("gauss_2f1: c is a non-positive integer");
    if (!(std::fabs(z) < 1.0)) throw domain_error("gauss_2f1: needs |z| < 1");
    if (z == 0.0) return 1.0;

    // terminating Pfaff form when c-b or c-a is a non-positive integer
    auto terminating = [](double v) { return v <= 0.0 && v == std::floor(v); };
    if (z > 0.5 && (terminating(c - b) || terminating(c - a))) {
        double bb = terminating(c - b) ? c - b : c - a;
        double aa = terminating(c - b) ? a : b;
        double y = z / (z - 1.0);
        double term = 1.0, sum = 1.0;
        for (int k = 0; k < -bb; ++k) {
            term *= (aa + k) * (bb + k) / ((c + k) * (k + 1.0)) * y;
            sum += term;
        }
        return std::pow(1.0 - z, -aa) * sum;
    }

    double term = 1.0, sum = 1.0;
    const int max_terms = 5000000;
    for (int k = 0; k < max_terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if (!std::isfinite(sum)) break;
        if (term == 0.0) return sum;
        if (std::fabs(term) < 1e-17 * std::fabs(sum) && k > 2) return sum;
    }
    std::ostringstream os;
    os << "gauss_2f1(" << a << ", " << b << ", " << c << ", " << z
       << "): series did not converge, partial sum " << sum;
    throw convergence_error(os.str(), sum);
}

// ---------------------------------------------------------------------------
// H / G evaluation

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void check_block(const fox_block& v, std::size_t dim, std::size_t idx)
{
    std::ostringstream os;
    if (v.m < 0 || v.n < 0 || v.m > static_cast<int>(v.b.size()) ||
        v.n > static_cast<int>(v.a.size())) {
        os << "H-spec variable " << idx << ": orders m, n exceed parameter counts";
        throw domain_error(os.str());
    }
    for (const auto& g : v.a)
        if (!std::isfinite(g.coef) || !std::isfinite(g.weight) || g.weight < 0.0)
            throw domain_error("H-spec: exponent weights must be finite and non-negative");
    for (const auto& g : v.b)
        if (!std::isfinite(g.coef) || !std::isfinite(g.weight) || g.weight < 0.0)
            throw domain_error("H-spec: exponent weights must be finite and non-negative");
    (void)dim;
}

// strip of variable i from its own gamma factors
std::pair<double, double> strip(const fox_block& v)
{
    double lo = -inf, hi = inf;
    for (int j = 0; j < v.m; ++j)
        if (v.b[j].weight > 0.0) lo = std::max(lo, -v.b[j].coef / v.b[j].weight);
    for (int j = 0; j < v.n; ++j)
        if (v.a[j].weight > 0.0) hi = std::min(hi, (1.0 - v.a[j].coef) / v.a[j].weight);
    return {lo, hi};
}

std::vector<double> default_abscissa(const FoxHSpec& spec)
{
    std::vector<double> c;
    for (std::size_t i = 0; i < spec.dim(); ++i) {
        auto [lo, hi] = strip(spec.vars[i]);
        if (!(lo < hi)) {
            std::ostringstream os;
            os << "H-spec variable " << i << ": left poles (>= " << lo
               << ") overlap right poles (<= " << hi << ")";
            throw contour_error(os.str());
        }
        if (std::isfinite(lo) && std::isfinite(hi)) c.push_back(0.5 * (lo + hi));
        else if (std::isfinite(lo)) c.push_back(lo + 1.0);
        else if (std::isfinite(hi)) c.push_back(hi - 1.0);
        else c.push_back(0.0);
    }
    return c;
}

mb::integrand compile(const FoxHSpec& spec, const std::vector<double>& x)
{
    const std::size_t D = spec.dim();
    mb::integrand f;
    f.dim = D;
    for (std::size_t i = 0; i < D; ++i) {
        const fox_block v = spec.vars[i];
        double lx = std::log(x[i]);
        f.axis.push_back([v, lx](cplx s) {
            cplx r = -s * lx;
            for (int j = 0; j < static_cast<int>(v.b.size()); ++j) {
                const auto& g = v.b[j];
                if (j < v.m) r += ln_gamma(g.coef + g.weight * s);
                else r -= ln_gamma(1.0 - g.coef - g.weight * s);
            }
            for (int j = 0; j < static_cast<int>(v.a.size()); ++j) {
                const auto& g = v.a[j];
                if (j < v.n) r += ln_gamma(1.0 - g.coef - g.weight * s);
                else r -= ln_gamma(g.coef + g.weight * s);
            }
            return r;
        });
        f.rate.push_back(std::fabs(lx));
        for (int j = 0; j < v.m; ++j) {
            mb::constraint k{v.b[j].coef, std::vector<double>(D, 0.0)};
            k.w[i] = v.b[j].weight;
            f.poles.push_back(k);
        }
        for (int j = 0; j < v.n; ++j) {
            mb::constraint k{1.0 - v.a[j].coef, std::vector<double>(D, 0.0)};
            k.w[i] = -v.a[j].weight;
            f.poles.push_back(k);
        }
    }
    auto neg = [](std::vector<double> w) {
        for (auto& e : w) e = -e;
        return w;
    };
    const auto& sh = spec.shared;
    for (int j = 0; j < static_cast<int>(sh.a.size()); ++j) {
        if (j < sh.n) {
            mb::linear_gamma g{1.0 - sh.a[j].coef, neg(sh.a[j].weights)};
            f.num.push_back(g);
            f.poles.push_back(g);
        } else {
            f.den.push_back({sh.a[j].coef, sh.a[j].weights});
        }
    }
    for (const auto& b : sh.b) f.den.push_back({1.0 - b.coef, neg(b.weights)});
    return f;
}

}  // namespace

void validate(const FoxHSpec& spec)
{
    const std::size_t D = spec.dim();
    if (D == 0) throw domain_error("H-spec: dimension must be at least 1");
    for (std::size_t i = 0; i < D; ++i) check_block(spec.vars[i], D, i);
    const auto& sh = spec.shared;
    if (sh.n < 0 || sh.n > static_cast<int>(sh.a.size()))
        throw domain_error("H-spec: shared n exceeds parameter count");
    for (const auto& g : sh.a)
        if (g.weights.size() != D) throw domain_error("H-spec: shared weight count != dimension");
    for (const auto& g : sh.b)
        if (g.weights.size() != D) throw domain_error("H-spec: shared weight count != dimension");
    for (const auto& g : sh.a)
        for (double w : g.weights)
            if (!std::isfinite(w)) throw domain_error("H-spec: non-finite shared weight");
    for (const auto& g : sh.b)
        for (double w : g.weights)
            if (!std::isfinite(w)) throw domain_error("H-spec: non-finite shared weight");
    if (spec.contour.resolution != 0 && spec.contour.resolution < 64)
        throw domain_error("H-spec: resolution must be >= 64 points");
    if (spec.contour.half_width < 0.0) throw domain_error("H-spec: half-width must be positive");

    std::vector<double> c = spec.contour.abscissa;
    if (c.empty()) c = default_abscissa(spec);
    if (c.size() != D) throw domain_error("H-spec: abscissa count != dimension");
    std::vector<double> ones(D, 1.0);
    if (!mb::admissible(compile(spec, ones), c))
        throw contour_error("H-spec: contour abscissae do not separate the pole families");
}

void validate(const MeijerGSpec& g)
{
    if (g.m < 0 || g.n < 0 || g.m > g.q || g.n > g.p)
        throw domain_error("G-spec: need 0 <= m <= q and 0 <= n <= p");
    if (static_cast<int>(g.a.size()) != g.p || static_cast<int>(g.b.size()) != g.q)
        throw domain_error("G-spec: parameter lists do not match p, q");
}

FoxHSpec to_fox(const MeijerGSpec& g)
{
    validate(g);
    FoxHSpec h;
    fox_block v;
    v.m = g.m;
    v.n = g.n;
    for (double a : g.a) v.a.push_back({a, 1.0});
    for (double b : g.b) v.b.push_back({b, 1.0});
    h.vars.push_back(v);
    return h;
}

mb_result fox_h_eval(const FoxHSpec& spec, const std::vector<double>& x, const mb_options& opt)
{
    validate(spec);
    if (x.size() != spec.dim()) throw domain_error("H-function: argument count != dimension");
    for (double v : x)
        if (!(v > 0.0)) throw domain_error("H-function: arguments must be positive");
    std::vector<double> c = spec.contour.abscissa;
    if (c.empty()) c = default_abscissa(spec);
    mb::settings s;
    s.rel_tol = opt.rel_tol;
    s.abs_tol = opt.abs_tol;
    s.saddle = opt.saddle;
    s.parallel = opt.parallel;
    s.half_width = spec.contour.half_width;
    s.resolution = spec.contour.resolution;
    return mb::integrate(compile(spec, x), c, s);
}

double fox_h_multivariate(const FoxHSpec& spec, const std::vector<double>& x,
                          const mb_options& opt)
{
    mb_result r = fox_h_eval(spec, x, opt);
    if (std::fabs(r.imag) > 1e-7 * (1.0 + std::fabs(r.value))) {
        std::ostringstream os;
        os << "H-function: imaginary residue " << r.imag << " against value " << r.value;
        throw contour_error(os.str(), std::fabs(r.imag));
    }
    return r.value;
}

double fox_h_single(const FoxHSpec& spec, double x, const mb_options& opt)
{
    if (spec.dim() != 1) throw domain_error("fox_h_single: spec must be one-dimensional");
    mb_result r = fox_h_eval(spec, {x}, opt);
    if (std::fabs(r.imag) > 1e-9 * (1.0 + std::fabs(r.value))) {
        std::ostringstream os;
        os << "H-function: imaginary residue " << r.imag << " against value " << r.value;
        throw contour_error(os.str(), std::fabs(r.imag));
    }
    return r.value;
}

double meijer_g(const MeijerGSpec& spec, double x, const mb_options& opt)
{
    return fox_h_single(to_fox(spec), x, opt);
}

}  // namespace ftrlink
