#pragma once

// Legendre P^{-n}_ν(x) for x >= 1 through the Pfaff-transformed
// hypergeometric series in w = (x-1)/(x+1), which converges for every x >= 1.
// Templated so the coefficient code can run it in multiprecision.

#include <cmath>

namespace ftrlink::detail {

// Γ(ν+n+1)/Γ(ν-n+1) as a finite product
template <class T>
T rising_ratio(const T& nu, int n)
{
    T r = 1;
    for (int k = -n + 1; k <= n; ++k) r *= nu + k;
    return r;
}

template <class T>
T legendre_negative_order(const T& nu, int n, const T& x, double eps)
{
    using std::abs;
    using std::pow;
    if (x == 1) return n == 0 ? T(1) : T(0);
    T w = (x - 1) / (x + 1);
    T term = 1, sum = 1;
    for (int k = 0; k < 1000000; ++k) {
        T ratio = (k - nu) * (n - nu + k) / ((n + 1 + k) * (k + 1.0)) * w;
        term *= ratio;
        sum += term;
        if (term == 0) break;
        if (abs(term) < eps * abs(sum) && abs(ratio) < 1) break;
    }
    T fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    return pow(w, T(n) / 2) * pow((1 + x) / 2, nu) * sum / fact;
}

}  // namespace ftrlink::detail
