// Parallel kernels against their single-threaded reference paths.
//   bench_kernels --benchmark_filter=ris

#include <benchmark/benchmark.h>

#include "ftrlink/monte_carlo.hpp"
#include "ftrlink/product_sum_stats.hpp"
#include "ftrlink/special_functions.hpp"

using namespace ftrlink;

namespace {

const FtrParams hop_a{10, 3, 0.5, 0.5};
const FtrParams hop_b{5, 5, 0.5, 0.4};

RisLink surface()
{
    RisLink L = RisLink::uniform(32, hop_a, hop_b, 2.0, 1.0);
    for (std::size_t l = 0; l < L.size(); ++l) L.theta1[l] = 0.1 * l;
    return L;
}

void ris_snr(benchmark::State& st)
{
    RisLink L = surface();
    McConfig cfg{static_cast<std::size_t>(st.range(0)), 7};
    for (auto _ : st) benchmark::DoNotOptimize(simulate_ris_snr(L, phase_mode::given, cfg).snr.data());
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void ris_snr_serial(benchmark::State& st)
{
    RisLink L = surface();
    McConfig cfg{static_cast<std::size_t>(st.range(0)), 7};
    for (auto _ : st) benchmark::DoNotOptimize(detail::simulate_ris_snr_serial(L, phase_mode::given, cfg).snr.data());
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

// P(U1 + U2 <= w) for unit exponentials as a two-variable contour integral
FoxHSpec two_exponentials()
{
    FoxHSpec h;
    fox_block v;
    v.m = 1;
    v.n = 1;
    v.a = {{0.0, 1.0}};
    v.b = {{0.0, 1.0}};
    h.vars = {v, v};
    h.shared.b = {{0.0, {-1.0, -1.0}}};
    return h;
}

void contour(benchmark::State& st, bool parallel)
{
    FoxHSpec h = two_exponentials();
    mb_options opt;
    opt.rel_tol = 1e-12;
    opt.parallel = parallel;
    for (auto _ : st) benchmark::DoNotOptimize(fox_h_eval(h, {0.7, 0.7}, opt).value);
}

void sum_cdf(benchmark::State& st, bool parallel)
{
    HopChain c{{hop_a, hop_b}};
    ChainBank bank{{c, c, c}};
    mb_options opt;
    opt.parallel = parallel;
    for (auto _ : st) benchmark::DoNotOptimize(sum_product_cdf(bank, 4.0, {}, opt));
}

}  // namespace

BENCHMARK(ris_snr)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(ris_snr_serial)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(contour, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(contour, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sum_cdf, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sum_cdf, serial, false)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
