#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "ftrlink/errors.hpp"

namespace ftrlink {

using cplx = std::complex<double>;

// principal branch of log Γ(z)
cplx ln_gamma(cplx z);

enum class gamma_kind { lower, upper };

// non-regularized γ(a,x) / Γ(a,x)
double incomplete_gamma(double a, double x, gamma_kind kind);
// regularized P(a,x), Q(a,x) = 1 - P
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// associated Legendre function of the first kind for x >= 1 (real, "type 3")
double legendre_p(double degree, int order, double x);

double gauss_2f1(double a, double b, double c, double z);

// ---------------------------------------------------------------------------
// Mellin-Barnes evaluators

struct MeijerGSpec {
    int m = 0, n = 0, p = 0, q = 0;
    std::vector<double> a, b;
};

struct gamma_pair {
    double coef;
    double weight;
};

struct shared_pair {
    double coef;
    std::vector<double> weights;
};

// one variable of an H-function in the usual (a_j, A_j), (b_j, B_j) layout:
// prod_{j<=m} Γ(b_j + B_j s) prod_{j<=n} Γ(1 - a_j - A_j s)
// / (prod_{j>m} Γ(1 - b_j - B_j s) prod_{j>n} Γ(a_j + A_j s)) * x^{-s}
struct fox_block {
    int m = 0, n = 0;
    std::vector<gamma_pair> a, b;
};

// factor coupling all variables:
// prod_{j<=n} Γ(1 - a_j - Σ A_ji s_i) / (prod_{j>n} Γ(a_j + Σ A_ji s_i) prod_j Γ(1 - b_j - Σ B_ji s_i))
struct fox_shared {
    int n = 0;
    std::vector<shared_pair> a, b;
};

struct contour_spec {
    std::vector<double> abscissa;  // empty = midpoint of each variable's strip
    double half_width = 0.0;       // 0 = pick from the integrand's decay
    int resolution = 0;            // points per dimension, 0 = adaptive
};

struct FoxHSpec {
    std::vector<fox_block> vars;
    fox_shared shared;
    contour_spec contour;

    std::size_t dim() const { return vars.size(); }
};

struct mb_options {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    bool saddle = false;   // move the contour to the on-axis minimum of the integrand
    bool parallel = true;
    int resolution = 0;    // fixed points per dimension, 0 = adaptive; throws resolution_error if too coarse
};

struct mb_result {
    double value = 0.0;
    double imag = 0.0;
    double error = 0.0;
    double l1 = 0.0;  // Σ |f| h over the grid; cancellation shows up as l1 >> |value|
    std::size_t nodes = 0;
    std::vector<double> abscissa;
    std::vector<double> half_width;
};

// throws contour_error when the declared abscissae do not separate the poles
void validate(const FoxHSpec& spec);
void validate(const MeijerGSpec& spec);

double meijer_g(const MeijerGSpec& spec, double x, const mb_options& opt = {});
double fox_h_single(const FoxHSpec& spec, double x, const mb_options& opt = {});
double fox_h_multivariate(const FoxHSpec& spec, const std::vector<double>& x,
                          const mb_options& opt = {});

// same as fox_h_multivariate but with the quadrature diagnostics
mb_result fox_h_eval(const FoxHSpec& spec, const std::vector<double>& x,
                     const mb_options& opt = {});

FoxHSpec to_fox(const MeijerGSpec& g);

}  // namespace ftrlink
