#pragma once

// Products of independent FTR envelopes, X = R_1 ... R_N, and sums of such
// products, Y = X_1 + ... + X_L.  Everything is a Mellin-Barnes integral over
// the (truncated) moment series of the hops.

#include <vector>

#include "ftrlink/ftr_model.hpp"
#include "ftrlink/mellin_barnes.hpp"

namespace ftrlink {

struct HopChain {
    std::vector<FtrParams> hops;

    std::size_t size() const { return hops.size(); }
    void validate() const;
};

struct ChainBank {
    std::vector<HopChain> chains;

    std::size_t size() const { return chains.size(); }
    std::vector<FtrParams> all_hops() const;
    void validate() const;
};

// contour cap for the closed forms; larger banks go to Monte-Carlo
inline constexpr std::size_t max_closed_form_dim = 4;

// 1 - prod over every hop of Σ_{j<=M} w_j  (each index runs 0..M)
double truncation_error(const ChainBank& bank, int M);
double truncation_error(const HopChain& chain, int M);

// E[X^s], s > -2
double product_moment(const HopChain& chain, double s, const SeriesControl& ctrl = {});

double product_pdf(const HopChain& chain, double x, const SeriesControl& ctrl = {},
                   const mb_options& opt = {});
double product_cdf(const HopChain& chain, double x, const SeriesControl& ctrl = {},
                   const mb_options& opt = {});
// E[exp(-s X)]
double product_mgf(const HopChain& chain, double s, const SeriesControl& ctrl = {},
                   const mb_options& opt = {});

double sum_product_pdf(const ChainBank& bank, double y, const SeriesControl& ctrl = {},
                       const mb_options& opt = {});
double sum_product_cdf(const ChainBank& bank, double y, const SeriesControl& ctrl = {},
                       const mb_options& opt = {});

namespace detail {

// log of the truncated moment series of one envelope,
// log E[R^{2t}] = t log(2σ²) + log Σ_{j<=M} w_j Γ(1+j+t)/Γ(1+j)
class moment_kernel {
public:
    moment_kernel(const FtrParams& p, int M);
    cplx log_moment(cplx t) const;

private:
    std::vector<double> w_;
    double log_scale_;
};

// log E[X^s] for a chain with a common truncation index
class chain_kernel {
public:
    chain_kernel(const HopChain& chain, int M);
    cplx operator()(cplx s) const;
    std::size_t hops() const { return hops_.size(); }

private:
    std::vector<moment_kernel> hops_;
};

mb::settings to_settings(const mb_options& opt);

}  // namespace detail

}  // namespace ftrlink
