#pragma once

// Generic D-dimensional Mellin-Barnes quadrature.  Everything that ends up as
// a Meijer-G / Fox-H expression goes through integrate() below.
//
//   I = (2πi)^{-D} ∫ prod_i axis_i(s_i) * prod_num Γ(.) / prod_den Γ(.) ds
//
// on vertical lines s_i = c_i + i t_i, trapezoid in each t_i.

#include <functional>
#include <vector>

#include "ftrlink/special_functions.hpp"

namespace ftrlink::mb {

// Γ(offset + Σ w_i s_i)
struct linear_gamma {
    double offset = 0.0;
    std::vector<double> w;
};

// offset + Σ w_i c_i must stay positive on the contour
using constraint = linear_gamma;

struct integrand {
    std::size_t dim = 1;
    // log of the per-axis factor (argument powers included)
    std::vector<std::function<cplx(cplx)>> axis;
    std::vector<linear_gamma> num, den;
    // every numerator gamma, axis-local ones included
    std::vector<constraint> poles;
    // |ln x_i|: phase rate of the argument power, used for the step size
    std::vector<double> rate;
};

struct settings {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    bool saddle = false;
    bool parallel = true;
    double half_width = 0.0;   // 0 = automatic
    int resolution = 0;        // points per dimension, 0 = adaptive
    bool throw_on_resolution = true;
    double log_drop = 37.0;    // tail cut: integrand below e^-37 ≈ 1e-16 of its peak
    // sum the grid as a convolution when the couplings only see Σ s_i
    bool convolution = true;
};

// smallest (offset + w.c)/|w_i| over constraints touching axis i;
// the distance to the nearest singularity when t_i moves off the real line
std::vector<double> pole_distance(const integrand& f, const std::vector<double>& c);

bool admissible(const integrand& f, const std::vector<double>& c, double margin = 0.0);

// move c to the minimum of log|f| on the real section, keeping away from poles
std::vector<double> saddle_abscissa(const integrand& f, std::vector<double> c);

mb_result integrate(const integrand& f, std::vector<double> c, const settings& s);

// single-threaded reference path; same grid, same summation order
mb_result integrate_serial(const integrand& f, std::vector<double> c, settings s);

// log f at one point (sum of axis logs and coupling logs)
cplx log_value(const integrand& f, const std::vector<cplx>& s);

}  // namespace ftrlink::mb
