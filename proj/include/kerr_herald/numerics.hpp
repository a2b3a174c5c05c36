// Copyright 2026 The kerr-herald Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// numerics.hpp: small shared helpers. Log-linear fits, pairwise sums,
// seed derivation and a parallel index loop.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace kerr_herald {

struct ExponentialFit {
    double rate = 0.0;       // decay rate r in y ~ exp(-r t)
    double r_squared = 0.0;  // of the log-linear regression
    double intercept = 0.0;  // log y at t = 0
    std::size_t points = 0;
};

/// Least-squares line through (t, log y). Requires at least 2 positive samples.
inline ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y) {
    double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
        if (!(y[i] > 0.0)) continue;
        const double ly = std::log(y[i]);
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
        syy += ly * ly;
        ++n;
    }
    ExponentialFit fit;
    fit.points = n;
    if (n < 2) return fit;
    const double dn = static_cast<double>(n);
    const double vt = stt - st * st / dn;
    const double vy = syy - sy * sy / dn;
    const double cty = sty - st * sy / dn;
    if (vt <= 0.0) return fit;
    const double slope = cty / vt;
    fit.rate = -slope;
    fit.intercept = (sy - slope * st) / dn;
    fit.r_squared = vy > 0.0 ? (cty * cty) / (vt * vy) : 1.0;
    return fit;
}

/// Pairwise summation; the result depends only on the order of the input.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of trajectory `index` in an ensemble; independent of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Thread count: explicit value if positive, else KERR_HERALD_THREADS, else hardware.
inline unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    if (const char* env = std::getenv("KERR_HERALD_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by any worker is rethrown on the caller's thread.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(n);
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

} // namespace kerr_herald
