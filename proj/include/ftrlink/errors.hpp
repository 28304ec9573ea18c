#pragma once

#include <stdexcept>
#include <string>

namespace ftrlink {

// bad argument or a point outside a function's domain (poles, x < 1, ...)
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// a series that did not settle; carries the last partial sum
struct convergence_error : std::runtime_error {
    double partial_sum;
    convergence_error(const std::string& what, double partial)
        : std::runtime_error(what), partial_sum(partial) {}
};

// no admissible vertical contour, or the integrand tail never decays
struct contour_error : std::runtime_error {
    double bound;
    explicit contour_error(const std::string& what, double bound_ = 0.0)
        : std::runtime_error(what), bound(bound_) {}
};

// trapezoid on the finer grid disagrees with the coarse one by more than asked
struct resolution_error : std::runtime_error {
    double estimate;
    resolution_error(const std::string& what, double est)
        : std::runtime_error(what), estimate(est) {}
};

// closed forms are capped at a fixed number of contour dimensions
struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace ftrlink
