#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace kmac {

// Global worker count for the blocked loops.  Output never depends on it:
// every parallel loop writes to disjoint index-addressed slots and the
// final reduction runs over those slots in index order.
void set_threads(unsigned t);
unsigned threads();

namespace detail {

template <class Fn>
void parallel_for_impl(std::size_t n, unsigned nthreads, Fn&& fn) {
    if (n == 0) return;
    if (nthreads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned t = static_cast<unsigned>(std::min<std::size_t>(nthreads, n));
    std::vector<std::thread> workers;
    workers.reserve(t);
    std::vector<std::exception_ptr> errs(t);
    for (unsigned w = 0; w < t; ++w) {
        const std::size_t lo = n * w / t;
        const std::size_t hi = n * (w + 1) / t;
        workers.emplace_back([&, lo, hi, w] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& th : workers) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// Static index partition; fn(i) must only touch slot i of shared state.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    detail::parallel_for_impl(n, threads(), std::forward<Fn>(fn));
}

}  // namespace kmac
