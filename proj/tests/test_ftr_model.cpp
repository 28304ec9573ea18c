#include "doctest.h"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numeric>

#include "ftrlink/ftr_model.hpp"
#include "ftrlink/rng.hpp"

using namespace ftrlink;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// (1/π) ∫_0^π Γ(n+m) (1+Δ cos α)^n / (m+K+KΔ cos α)^{n+m} dα, trapezoid on a
// periodic analytic integrand
double d_angular(int n, const FtrParams& p)
{
    const int N = 4096;
    double sum = 0.0;
    for (int i = 0; i <= N; ++i) {
        double a = M_PI * i / N;
        double c = std::cos(a);
        double num = n > 0 ? n * std::log1p(p.delta * c) : 0.0;
        double v = std::exp(std::lgamma(n + p.m) + num -
                            (n + p.m) * std::log(p.m + p.K + p.K * p.delta * c));
        sum += (i == 0 || i == N) ? 0.5 * v : v;
    }
    return sum / N;
}

double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf)
{
    std::sort(x.begin(), x.end());
    double n = static_cast<double>(x.size()), d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double F = cdf(x[i]);
        d = std::max({d, std::fabs(F - i / n), std::fabs((i + 1) / n - F)});
    }
    return d;
}

const FtrParams base{5.0, 3.0, 0.5, 0.5};

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(a == philox_ctr{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto b = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(b == philox_ctr{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(c == philox_ctr{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("coefficient_d: Δ = 0 collapse")
{
    FtrParams p{2.5, 4.0, 0.0, 0.5};
    for (int n : {0, 1, 7, 40})
        CHECK(rel(coefficient_d(n, p), std::exp(std::lgamma(n + 2.5) - (n + 2.5) * std::log(6.5))) < 1e-12);
}

TEST_CASE("coefficient_d: frozen high-precision values and the angular integral")
{
    CHECK(rel(coefficient_d(0, base), 0.0009515538659752960081751346) < 1e-14);
    CHECK(rel(coefficient_d(1, base), 0.0004915679024269765776854739) < 1e-14);
    CHECK(rel(coefficient_d(5, base), 0.0003026358933776227393620683) < 1e-14);
    CHECK(rel(coefficient_d(30, base), 632750885.8274472516042798) < 1e-13);

    for (FtrParams p : {base, FtrParams{1.3, 8.0, 0.9, 1.0}, FtrParams{25.0, 3.0, 0.5, 0.5},
                        FtrParams{0.7, 1.0, 1.0, 2.0}})
        for (int n : {0, 2, 9, 25, 60})
            CHECK(rel(coefficient_d(n, p), d_angular(n, p)) < 1e-11);
}

TEST_CASE("series mass normalizes and is monotone")
{
    for (FtrParams p : {base, FtrParams{10, 5, 0.5, 1}, FtrParams{15, 1, 0.3, 1}, FtrParams{1.5, 6, 0.95, 1}}) {
        double prev = -1.0;
        for (int M = 0; M <= 120; ++M) {
            double s = series_mass(p, M);
            CHECK(s >= prev);
            CHECK(s <= 1.0 + 1e-9);
            prev = s;
        }
    }
    CHECK(series_deficit(base, 200) < 1e-12);
    CHECK(rel(series_mass(base, 200), 1.0) < 1e-12);
    // first row of the truncation table, per hop
    CHECK(rel(series_deficit(base, 24), 3.259e-6) < 1e-3);
}

TEST_CASE("truncation index honours both limits")
{
    double eps = 0.0;
    int M = truncation_index({base}, {150, 1e-6}, &eps);
    CHECK(eps < 1e-6);
    CHECK(series_deficit(base, M - 1) >= 1e-6);

    std::string seen;
    set_warning_handler([&](const std::string& s) { seen = s; });
    M = truncation_index({base}, {5, 1e-12}, &eps);
    CHECK(M == 5);
    CHECK(eps > 1e-3);
    CHECK(seen.find("truncat") != std::string::npos);
    set_warning_handler(nullptr);
}

TEST_CASE("pdf/cdf of the squared variate")
{
    FtrParams k0{3.0, 0.0, 0.4, 0.8};
    for (double g : {0.0, 0.3, 2.0, 7.5}) {
        CHECK(rel(pdf_squared(k0, g), std::exp(-g / 1.6) / 1.6) < 1e-13);
        CHECK(std::fabs(cdf_squared(k0, g) - (1.0 - std::exp(-g / 1.6))) < 1e-14);
    }
    CHECK(cdf_squared(base, 0.0) == 0.0);

    boost::math::quadrature::exp_sinh<double> es;
    SeriesControl ctrl{200, 1e-13};
    double mass = es.integrate([&](double g) { return pdf_squared(base, g, ctrl); });
    CHECK(std::fabs(mass - 1.0) < 1e-6);
    double mean = es.integrate([&](double g) { return g * pdf_squared(base, g, ctrl); });
    CHECK(std::fabs(mean - 4.0) < 1e-6);

    double prev = 0.0;
    for (double g = 0.05; g < 30.0; g *= 1.3) {
        double h = 1e-5 * g;
        double fd = (cdf_squared(base, g + h, ctrl) - cdf_squared(base, g - h, ctrl)) / (2 * h);
        CHECK(rel(fd, pdf_squared(base, g, ctrl)) < 1e-4);
        double F = cdf_squared(base, g, ctrl);
        CHECK(F >= prev);
        CHECK(pdf_squared(base, g, ctrl) >= -1e-12);
        prev = F;
    }
}

TEST_CASE("envelope pdf/cdf")
{
    FtrParams k0{2.0, 0.0, 0.0, 0.7};
    for (double r : {0.1, 0.9, 2.4}) {
        CHECK(rel(envelope_pdf(k0, r), r / 0.7 * std::exp(-r * r / 1.4)) < 1e-13);
        CHECK(std::fabs(envelope_cdf(k0, r) - (1.0 - std::exp(-r * r / 1.4))) < 1e-14);
    }
    CHECK(envelope_cdf(base, 0.0) == 0.0);
    boost::math::quadrature::exp_sinh<double> es;
    double mass = es.integrate([&](double r) { return envelope_pdf(base, r, {200, 1e-13}); });
    CHECK(std::fabs(mass - 1.0) < 1e-6);
}

TEST_CASE("specular amplitudes reproduce K and Δ")
{
    auto [v1, v2] = specular_amplitudes(base);
    CHECK(rel(v1 * v1 + v2 * v2, 2 * base.sigma2 * base.K) < 1e-14);
    CHECK(rel(2 * v1 * v2 / (v1 * v1 + v2 * v2), base.delta) < 1e-14);
    CHECK(v1 >= v2);
}

TEST_CASE("sampler: mean power and KS tests")
{
    auto r = sample_envelope(base, 1000000, 7);
    double n = static_cast<double>(r.size());
    double s1 = 0.0, s2 = 0.0;
    for (double v : r) {
        s1 += v * v;
        s2 += v * v * v * v;
    }
    double mean = s1 / n, var = s2 / n - mean * mean;
    CHECK(std::fabs(mean - 4.0) < 3.0 * std::sqrt(var / n));

    FtrParams k0{4.0, 0.0, 0.5, 0.5};
    auto ray = sample_envelope(k0, 100000, 8);
    CHECK(ks_distance(ray, [&](double x) { return envelope_cdf(k0, x); }) < 1.63 / std::sqrt(1e5));

    auto s = sample_envelope(base, 100000, 9);
    CHECK(ks_distance(s, [&](double x) { return envelope_cdf(base, x, {24, 1e-30}); }) <
          1.63 / std::sqrt(1e5));
}

TEST_CASE("sampler moments of the squared variate match the series")
{
    for (FtrParams p : {base, FtrParams{1.0, 8.0, 0.9, 0.3}, FtrParams{10.0, 5.0, 0.5, 1.0},
                        FtrParams{0.8, 2.0, 1.0, 2.0}}) {
        auto r = sample_envelope(p, 400000, 21);
        double n = static_cast<double>(r.size());
        for (int order : {1, 2}) {
            double s1 = 0.0, s2 = 0.0;
            for (double v : r) {
                double x = std::pow(v * v, order);
                s1 += x;
                s2 += x * x;
            }
            double mean = s1 / n, se = std::sqrt((s2 / n - mean * mean) / n);
            double exact = envelope_moment(p, 2.0 * order, {300, 1e-14});
            CHECK(std::fabs(mean - exact) < 4.0 * se);
        }
    }
}

TEST_CASE("moments: zeroth and second")
{
    CHECK(std::fabs(envelope_moment(base, 0.0) - 1.0) < 1e-9);
    CHECK(rel(envelope_moment(base, 2.0, {200, 1e-14}), base.upsilon()) < 1e-12);
    CHECK_THROWS_AS(envelope_moment(base, -2.5), domain_error);
}

TEST_CASE("parameter validation")
{
    CHECK_THROWS_AS(FtrParams({0.0, 1, 0.5, 1}).validate(), domain_error);
    CHECK_THROWS_AS(FtrParams({1.0, -1, 0.5, 1}).validate(), domain_error);
    CHECK_THROWS_AS(FtrParams({1.0, 1, 1.5, 1}).validate(), domain_error);
    CHECK_THROWS_AS(FtrParams({1.0, 1, 0.5, 0}).validate(), domain_error);
    CHECK(rel(FtrParams::from_upsilon(5, 3, 0.5, 4.0).sigma2, 0.5) < 1e-15);
}
