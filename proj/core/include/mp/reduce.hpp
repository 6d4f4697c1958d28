#pragma once

#include <complex>
#include <cstddef>
#include <functional>

namespace mp {

// Number of worker threads for data-parallel loops. Controlled by the
// MP_THREADS environment variable (default 1, clamped to [1, 64]).
int thread_count();

// Runs fn(i) for i in [0, count). Work is split into fixed-size blocks so
// the result of disjoint element writes is independent of thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

namespace detail {

// Fixed-shape pairwise summation tree. The reduction order depends only on
// the element count, never on thread count, so ledgers are reproducible
// bit-for-bit.
template <class Acc, class F>
Acc pairwise(std::size_t lo, std::size_t hi, const F& term) {
    if (hi - lo <= 8) {
        Acc s{};
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise<Acc>(lo, mid, term) + pairwise<Acc>(mid, hi, term);
}

}  // namespace detail

template <class F>
double pairwise_sum(std::size_t count, const F& term) {
    if (count == 0) return 0.0;
    return detail::pairwise<double>(0, count, term);
}

template <class F>
std::complex<double> pairwise_sum_c(std::size_t count, const F& term) {
    if (count == 0) return {};
    return detail::pairwise<std::complex<double>>(0, count, term);
}

}  // namespace mp
