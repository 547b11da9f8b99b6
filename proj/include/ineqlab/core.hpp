#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ineqlab {

using complexd = std::complex<double>;

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define INEQLAB_DEFINE_ERROR(Name)                                       \
    struct Name : Error {                                                \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

INEQLAB_DEFINE_ERROR(NonFinite);
INEQLAB_DEFINE_ERROR(BadExponent);
INEQLAB_DEFINE_ERROR(BadInput);
INEQLAB_DEFINE_ERROR(SpecMismatch);
INEQLAB_DEFINE_ERROR(EmptyDomain);
INEQLAB_DEFINE_ERROR(OutOfDomain);
INEQLAB_DEFINE_ERROR(DomainMismatch);
INEQLAB_DEFINE_ERROR(NotDominated);
INEQLAB_DEFINE_ERROR(PreconditionViolated);
INEQLAB_DEFINE_ERROR(DegenerateInput);
INEQLAB_DEFINE_ERROR(NotUnit);
INEQLAB_DEFINE_ERROR(NotConverged);
INEQLAB_DEFINE_ERROR(DidNotConverge);
INEQLAB_DEFINE_ERROR(RootBracketFailure);
INEQLAB_DEFINE_ERROR(StabilityViolation);
INEQLAB_DEFINE_ERROR(NegativityClipExceeded);
INEQLAB_DEFINE_ERROR(MonotonicityViolation);
INEQLAB_DEFINE_ERROR(ConfigParse);
INEQLAB_DEFINE_ERROR(IoError);
INEQLAB_DEFINE_ERROR(UnknownSuite);

#undef INEQLAB_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Compensated summation. Deficits are small differences of large sums, so
// every accumulation that feeds a margin goes through this.
// ---------------------------------------------------------------------------

class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// ---------------------------------------------------------------------------
// Deterministic random streams (SplitMix64). The standard distributions are
// not bit-portable, so samples are synthesized from raw draws.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    complexd cnormal() { return {normal(), normal()}; }

    /// Child stream with an independent-looking state.
    Rng split(std::uint64_t salt) {
        return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
    }

private:
    std::uint64_t state_;
};

/// FNV-1a, used for config hashing and seed derivation from check names.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Parallel sweep helper. INEQLAB_THREADS caps the worker count; results must
// be written to disjoint slots so the outcome is independent of scheduling.
// ---------------------------------------------------------------------------

inline unsigned max_threads() {
    if (const char* env = std::getenv("INEQLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned threads = std::min<std::size_t>(max_threads(), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Tolerance policy: relative unless the reference magnitude is below 1e-8,
// then absolute.
// ---------------------------------------------------------------------------

inline bool close(double a, double b, double tol) {
    const double ref = std::max(std::abs(a), std::abs(b));
    if (ref < 1e-8) return std::abs(a - b) <= tol;
    return std::abs(a - b) <= tol * ref;
}

inline double rel_err(double got, double want) {
    const double ref = std::abs(want);
    if (ref < 1e-8) return std::abs(got - want);
    return std::abs(got - want) / ref;
}

}  // namespace ineqlab
