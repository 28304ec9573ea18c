#include "ftrlink/mellin_barnes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ftrlink::mb {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double eps = std::numeric_limits<double>::epsilon();

// total node budget for one evaluation
constexpr double node_budget = 6.0e6;
// points per dimension on the convolution path
constexpr double conv_points_cap = 8001.0;

double margin(const constraint& k, const std::vector<double>& c)
{
    double v = k.offset;
    for (std::size_t i = 0; i < c.size(); ++i) v += k.w[i] * c[i];
    return v;
}

double section(const integrand& f, const std::vector<double>& c)
{
    std::vector<cplx> s(c.begin(), c.end());
    return log_value(f, s).real();
}

double ray_log(const integrand& f, const std::vector<double>& c, const std::vector<double>& u,
               double r)
{
    std::vector<cplx> s(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) s[i] = cplx(c[i], r * u[i]);
    return log_value(f, s).real();
}

// directions probed for the tail cut: the axes plus every diagonal
std::vector<std::vector<double>> directions(std::size_t D)
{
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < D; ++i) {
        std::vector<double> u(D, 0.0);
        u[i] = 1.0;
        out.push_back(u);
    }
    if (D > 1) {
        for (unsigned mask = 0; mask < (1u << (D - 1)); ++mask) {
            std::vector<double> u(D, 1.0);
            for (std::size_t i = 1; i < D; ++i)
                if (mask & (1u << (i - 1))) u[i] = -1.0;
            out.push_back(u);
        }
    }
    return out;
}

std::vector<double> auto_half_width(const integrand& f, const std::vector<double>& c,
                                    double drop, double& peak)
{
    const std::size_t D = f.dim;
    peak = section(f, c);
    std::vector<double> T(D, 1.0);
    const double step = 0.25, r_max = 2000.0;
    for (const auto& u : directions(D)) {
        // peak first: the largest value may sit off the real section
        double r = 0.0, below_since = -1.0;
        while (r < r_max) {
            r += step;
            double v = ray_log(f, c, u, r);
            if (!std::isfinite(v)) v = -inf;
            if (v > peak) peak = v;
            if (v < peak - drop) {
                if (below_since < 0.0) below_since = r;
                if (r - below_since >= 2.0) break;
            } else {
                below_since = -1.0;
            }
        }
        if (r >= r_max) {
            std::ostringstream os;
            os << "Mellin-Barnes integrand does not decay along the contour (|t| up to "
               << r_max << ")";
            throw contour_error(os.str(), std::exp(ray_log(f, c, u, r_max) - peak));
        }
        for (std::size_t i = 0; i < D; ++i)
            T[i] = std::max(T[i], below_since * std::fabs(u[i]));
    }
    return T;
}

struct grid_sum {
    cplx fine = 0.0;
    cplx coarse = 0.0;
    double l1 = 0.0;
};

// Σ over the tensor grid, fixed partition along axis 0 so the result does
// not depend on the thread count.
grid_sum run_grid(const integrand& f, const std::vector<double>& c, const std::vector<double>& h,
                  const std::vector<int>& N, double shift, bool parallel)
{
    const std::size_t D = f.dim;
    std::vector<std::vector<cplx>> A(D);
    for (std::size_t i = 0; i < D; ++i) {
        A[i].resize(2 * N[i] + 1);
        for (int k = -N[i]; k <= N[i]; ++k)
            A[i][k + N[i]] = f.axis[i](cplx(c[i], k * h[i]));
    }

    // coupling gammas: argument = base + i Σ w_i t_i
    struct coupled {
        double base;
        std::vector<double> w;
        double sign;
    };
    std::vector<coupled> cg;
    for (const auto& g : f.num) cg.push_back({margin(g, c), g.w, 1.0});
    for (const auto& g : f.den) cg.push_back({margin(g, c), g.w, -1.0});

    const int n0 = 2 * N[0] + 1;
    std::size_t inner = 1;
    for (std::size_t i = 1; i < D; ++i) inner *= 2 * N[i] + 1;

    std::vector<grid_sum> part(n0);

    auto body = [&](int k0) {
        grid_sum g;
        std::vector<int> k(D, 0);
        k[0] = k0 - N[0];
        for (std::size_t i = 1; i < D; ++i) k[i] = -N[i];
        for (std::size_t idx = 0; idx < inner; ++idx) {
            cplx lv = -shift;
            bool even = true;
            for (std::size_t i = 0; i < D; ++i) {
                lv += A[i][k[i] + N[i]];
                if (k[i] & 1) even = false;
            }
            for (const auto& q : cg) {
                double im = 0.0;
                for (std::size_t i = 0; i < D; ++i) im += q.w[i] * k[i] * h[i];
                lv += q.sign * ln_gamma(cplx(q.base, im));
            }
            cplx v = std::exp(lv);
            g.fine += v;
            if (even) g.coarse += v;
            g.l1 += std::abs(v);
            // odometer over axes 1..D-1
            for (std::size_t i = D - 1; i >= 1; --i) {
                if (++k[i] <= N[i]) break;
                k[i] = -N[i];
            }
        }
        part[k0] = g;
    };

    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int k0 = 0; k0 < n0; ++k0) body(k0);
    } else {
        for (int k0 = 0; k0 < n0; ++k0) body(k0);
    }

    grid_sum total;
    for (const auto& g : part) {
        total.fine += g.fine;
        total.coarse += g.coarse;
        total.l1 += g.l1;
    }
    return total;
}

// every coupling gamma sees the s_i only through their plain sum
bool sum_coupled(const integrand& f)
{
    if (f.dim < 2) return false;
    for (const auto* list : {&f.num, &f.den})
        for (const auto& g : *list)
            for (double w : g.w)
                if (w != g.w[0]) return false;
    return true;
}

// full linear convolution, one output index per iteration so the sum order
// is fixed
template <class T>
std::vector<T> convolve(const std::vector<T>& a, const std::vector<T>& b, bool parallel)
{
    const long na = static_cast<long>(a.size()), nb = static_cast<long>(b.size());
    std::vector<T> out(na + nb - 1, T(0));
    auto body = [&](long k) {
        T acc(0);
        for (long i = std::max(0L, k - nb + 1); i <= std::min(k, na - 1); ++i) acc += a[i] * b[k - i];
        out[k] = acc;
    };
    const long n = na + nb - 1;
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long k = 0; k < n; ++k) body(k);
    } else {
        for (long k = 0; k < n; ++k) body(k);
    }
    return out;
}

// Same trapezoid sum as run_grid for sum-coupled integrands with a common
// step: the couplings depend on k_1 + ... + k_D only, so the tensor sum is a
// convolution of the per-axis sequences.
grid_sum run_convolution(const integrand& f, const std::vector<double>& c, double h,
                         const std::vector<int>& N, double shift, bool parallel)
{
    const std::size_t D = f.dim;
    std::vector<cplx> v, v_even;
    std::vector<double> v_abs;
    double scale_log = -shift;
    for (std::size_t i = 0; i < D; ++i) {
        std::vector<cplx> A(2 * N[i] + 1);
        double top = -inf;
        for (int k = -N[i]; k <= N[i]; ++k) {
            A[k + N[i]] = f.axis[i](cplx(c[i], k * h));
            if (std::isfinite(A[k + N[i]].real())) top = std::max(top, A[k + N[i]].real());
        }
        scale_log += top;
        std::vector<cplx> a(A.size()), a_even(A.size());
        std::vector<double> a_abs(A.size());
        for (int k = -N[i]; k <= N[i]; ++k) {
            cplx x = std::exp(A[k + N[i]] - top);
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) x = 0.0;
            a[k + N[i]] = x;
            a_even[k + N[i]] = (k & 1) ? cplx(0.0) : x;
            a_abs[k + N[i]] = std::abs(x);
        }
        if (i == 0) {
            v = std::move(a);
            v_even = std::move(a_even);
            v_abs = std::move(a_abs);
        } else {
            v = convolve(v, a, parallel);
            v_even = convolve(v_even, a_even, parallel);
            v_abs = convolve(v_abs, a_abs, parallel);
        }
    }

    int total = 0;
    for (int n : N) total += n;
    grid_sum g;
    for (int K = -total; K <= total; ++K) {
        cplx lc = scale_log;
        for (const auto& q : f.num) lc += ln_gamma(cplx(margin(q, c), q.w[0] * K * h));
        for (const auto& q : f.den) lc -= ln_gamma(cplx(margin(q, c), q.w[0] * K * h));
        cplx factor = std::exp(lc);
        g.fine += v[K + total] * factor;
        g.coarse += v_even[K + total] * factor;
        g.l1 += v_abs[K + total] * std::abs(factor);
    }
    return g;
}

mb_result integrate_impl(const integrand& f, std::vector<double> c, const settings& s)
{
    const std::size_t D = f.dim;
    if (c.size() != D || f.axis.size() != D)
        throw domain_error("Mellin-Barnes: dimension mismatch");
    if (!admissible(f, c)) {
        std::ostringstream os;
        os << "Mellin-Barnes: abscissa (";
        for (std::size_t i = 0; i < D; ++i) os << (i ? ", " : "") << c[i];
        os << ") does not separate left and right poles";
        throw contour_error(os.str());
    }
    if (s.saddle) c = saddle_abscissa(f, c);

    double peak = 0.0;
    std::vector<double> T;
    if (s.half_width > 0.0) {
        T.assign(D, s.half_width);
        peak = section(f, c);
    } else {
        T = auto_half_width(f, c, s.log_drop, peak);
    }

    std::vector<double> d = pole_distance(f, c);
    std::vector<double> h(D);
    std::vector<int> N(D);
    for (std::size_t i = 0; i < D; ++i) {
        double rate = f.rate.empty() ? 0.0 : f.rate[i];
        double di = std::isfinite(d[i]) ? d[i] : 1.0;
        h[i] = two_pi * di / (s.log_drop + 5.0 + di * (rate + 2.0));
        h[i] = std::min(h[i], 0.5);
        if (s.resolution > 0) h[i] = T[i] / (s.resolution / 2);
    }

    const bool conv = s.convolution && sum_coupled(f);
    if (conv) {
        double hmin = *std::min_element(h.begin(), h.end());
        std::fill(h.begin(), h.end(), hmin);
    }
    const double per_dim_cap =
        conv ? conv_points_cap : std::pow(node_budget, 1.0 / static_cast<double>(D));
    mb_result out;
    for (int attempt = 0;; ++attempt) {
        double nodes = 1.0;
        bool capped = false;
        for (std::size_t i = 0; i < D; ++i) {
            int n = static_cast<int>(std::ceil(T[i] / h[i]));
            n += n & 1;
            n = std::max(n, 16);
            if (2.0 * n + 1.0 > per_dim_cap) {
                n = static_cast<int>((per_dim_cap - 1.0) / 2.0);
                n -= n & 1;
                capped = true;
            }
            N[i] = n;
            if (!conv) h[i] = T[i] / n;
            nodes *= 2.0 * n + 1.0;
        }
        grid_sum g = conv ? run_convolution(f, c, h[0], N, peak, s.parallel)
                          : run_grid(f, c, h, N, peak, s.parallel);
        double scale = std::exp(peak);
        for (std::size_t i = 0; i < D; ++i) scale *= h[i] / two_pi;
        cplx fine = g.fine * scale;
        cplx coarse = g.coarse * scale * std::pow(2.0, static_cast<double>(D));
        double l1 = g.l1 * scale;

        out.value = fine.real();
        out.imag = fine.imag();
        out.error = std::abs(fine - coarse);
        out.l1 = l1;
        out.nodes = static_cast<std::size_t>(nodes);
        out.abscissa = c;
        out.half_width = T;

        double tol = s.rel_tol * std::fabs(out.value) + s.abs_tol + 64.0 * eps * l1;
        if (out.error <= tol) break;
        if (s.resolution > 0 || capped || attempt >= 6) {
            if (s.throw_on_resolution) {
                std::ostringstream os;
                os << "Mellin-Barnes: halving the step changed the result by " << out.error
                   << " (value " << out.value << ", tolerance " << tol << ", " << out.nodes
                   << " nodes)";
                throw resolution_error(os.str(), out.error);
            }
            break;
        }
        for (auto& x : h) x *= 0.5;
    }
    return out;
}

}  // namespace

cplx log_value(const integrand& f, const std::vector<cplx>& s)
{
    cplx r = 0.0;
    for (std::size_t i = 0; i < f.dim; ++i) r += f.axis[i](s[i]);
    auto arg = [&](const linear_gamma& g) {
        cplx a = g.offset;
        for (std::size_t i = 0; i < f.dim; ++i) a += g.w[i] * s[i];
        return a;
    };
    for (const auto& g : f.num) r += ln_gamma(arg(g));
    for (const auto& g : f.den) r -= ln_gamma(arg(g));
    return r;
}

std::vector<double> pole_distance(const integrand& f, const std::vector<double>& c)
{
    std::vector<double> d(f.dim, inf);
    for (const auto& k : f.poles) {
        double m = margin(k, c);
        for (std::size_t i = 0; i < f.dim; ++i)
            if (k.w[i] != 0.0) d[i] = std::min(d[i], m / std::fabs(k.w[i]));
    }
    return d;
}

bool admissible(const integrand& f, const std::vector<double>& c, double gap)
{
    for (const auto& k : f.poles)
        if (!(margin(k, c) > gap)) return false;
    return true;
}

std::vector<double> saddle_abscissa(const integrand& f, std::vector<double> c)
{
    const std::size_t D = f.dim;
    // keep a quarter of the starting pole distance so the step size stays sane
    std::vector<double> d0 = pole_distance(f, c);
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int cycle = 0; cycle < 3; ++cycle) {
        for (std::size_t i = 0; i < D; ++i) {
            double keep = std::isfinite(d0[i]) ? 0.25 * d0[i] : 0.25;
            double lo = c[i] - 10.0, hi = c[i] + 10.0;
            for (const auto& k : f.poles) {
                if (k.w[i] == 0.0) continue;
                double rest = margin(k, c) - k.w[i] * c[i];
                double edge = (keep * std::fabs(k.w[i]) - rest) / k.w[i];
                if (k.w[i] > 0.0) lo = std::max(lo, edge);
                else hi = std::min(hi, edge);
            }
            if (!(lo < hi)) continue;
            auto phi = [&](double x) {
                std::vector<double> cc = c;
                cc[i] = x;
                double v = section(f, cc);
                return std::isfinite(v) ? v : inf;
            };
            double a = lo, b = hi;
            double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
            double f1 = phi(x1), f2 = phi(x2);
            for (int it = 0; it < 40; ++it) {
                if (f1 < f2) {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - golden * (b - a); f1 = phi(x1);
                } else {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + golden * (b - a); f2 = phi(x2);
                }
            }
            double best = 0.5 * (a + b);
            if (phi(best) < phi(c[i])) c[i] = best;
        }
    }
    return c;
}

mb_result integrate(const integrand& f, std::vector<double> c, const settings& s)
{
    return integrate_impl(f, std::move(c), s);
}

mb_result integrate_serial(const integrand& f, std::vector<double> c, settings s)
{
    s.parallel = false;
    return integrate_impl(f, std::move(c), s);
}

}  // namespace ftrlink::mb
