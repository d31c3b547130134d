#pragma once

#include <vector>

namespace ecomb {

// J_0(x) .. J_n_max(x) for x >= 0 by backward (Miller) recurrence with
// normalization through J_0 + 2 sum_k J_{2k} = 1. Stable for large orders,
// where forward recurrence blows up.
std::vector<double> bessel_jn_array(int n_max, double x);

// Single order, negative n handled via J_{-n} = (-1)^n J_n.
double bessel_jn(int n, double x);

} // namespace ecomb
