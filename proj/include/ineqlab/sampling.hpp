#pragma once

#include "ineqlab/grid.hpp"

namespace ineqlab {

// Sample corpora for the verification sweeps. Everything is driven by the
// deterministic Rng so a (config, seed) pair reproduces byte-identical runs.

/// Smooth complex field with spectrum supported on band_lo <= |k_d| <= band
/// per axis (band_lo > 0 carves out the lowest frequency cells, where the
/// singular-weight quadratic forms are quadrature-sensitive).
inline GridFunction random_band_pass(const GridSpec& spec, Rng& rng,
                                     unsigned band_lo, unsigned band,
                                     bool mean_zero = true) {
    const unsigned n = spec.points_per_side;
    band = std::min(band, n / 2 - 1);
    std::vector<complexd> a(spec.total_points(), complexd{0.0, 0.0});
    std::array<long, 3> k{0, 0, 0};
    const long width = 2 * long(band) + 1;
    std::size_t count = 1;
    for (unsigned d = 0; d < spec.dim; ++d) count *= std::size_t(width);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t rem = i;
        for (unsigned d = spec.dim; d-- > 0;) {
            k[d] = long(rem % std::size_t(width)) - long(band);
            rem /= std::size_t(width);
        }
        std::size_t flat = 0;
        double k2 = 0.0;
        bool in_gap = band_lo > 0;
        for (unsigned d = 0; d < spec.dim; ++d) {
            flat = flat * n + std::size_t((k[d] + long(n)) % long(n));
            k2 += double(k[d] * k[d]);
            if (std::labs(k[d]) >= long(band_lo)) in_gap = false;
        }
        if (in_gap) continue;
        // mild spectral decay keeps the fields smooth but not trivial
        const double amp = 1.0 / (1.0 + k2);
        a[flat] = amp * rng.cnormal();
    }
    if (mean_zero) a[0] = {0.0, 0.0};
    fft::transform_nd(a, spec.dim, n, true);
    // normalize to unit sup scale so downstream scalings are predictable
    double sup = 0.0;
    for (const auto& v : a) sup = std::max(sup, std::abs(v));
    if (sup > 0.0)
        for (auto& v : a) v /= sup;
    return GridFunction(spec, std::move(a));
}

inline GridFunction random_band_limited(const GridSpec& spec, Rng& rng,
                                        unsigned band, bool mean_zero = true) {
    return random_band_pass(spec, rng, 0, band, mean_zero);
}

/// Pair supported on disjoint halves of the box (the degenerate direction
/// for the p > 2 convexity bound).
inline std::pair<GridFunction, GridFunction> disjoint_support_pair(
    const GridSpec& spec, Rng& rng, unsigned band) {
    auto a = random_band_limited(spec, rng, band, false);
    auto b = random_band_limited(spec, rng, band, false);
    std::vector<complexd> va(a.size()), vb(b.size());
    const unsigned n = spec.points_per_side;
    for (std::size_t i = 0; i < a.size(); ++i) {
        // split along the leading axis
        std::size_t lead = i;
        for (unsigned d = 1; d < spec.dim; ++d) lead /= n;
        const bool left = lead < n / 2;
        va[i] = left ? a[i] : complexd{0.0, 0.0};
        vb[i] = left ? complexd{0.0, 0.0} : b[i];
    }
    return {GridFunction(spec, std::move(va)), GridFunction(spec, std::move(vb))};
}

enum class PairFamily { Smooth, Disjoint, NearParallel, SignFlipped };

/// Adversarial pair corpus for the convexity margins: smooth generic pairs,
/// disjoint supports, near-parallel pairs, and sign flips.
inline std::pair<GridFunction, GridFunction> adversarial_pair(
    const GridSpec& spec, Rng& rng, PairFamily family, unsigned band = 24) {
    switch (family) {
        case PairFamily::Smooth: {
            auto f1 = random_band_limited(spec, rng, band, false);
            auto f2 = random_band_limited(spec, rng, band, false);
            return {complexd{rng.uniform(0.2, 3.0), 0.0} * f1,
                    complexd{rng.uniform(0.2, 3.0), 0.0} * f2};
        }
        case PairFamily::Disjoint:
            return disjoint_support_pair(spec, rng, band);
        case PairFamily::NearParallel: {
            auto f1 = random_band_limited(spec, rng, band, false);
            const double eps = std::pow(10.0, rng.uniform(-6.0, -1.0));
            auto bump = random_band_limited(spec, rng, band, false);
            auto f2 = f1 + complexd{eps, 0.0} * f1 + complexd{eps * 0.1, 0.0} * bump;
            return {std::move(f1), std::move(f2)};
        }
        case PairFamily::SignFlipped: {
            auto f1 = random_band_limited(spec, rng, band, false);
            const double eps = rng.uniform(0.0, 0.2);
            auto bump = random_band_limited(spec, rng, band, false);
            auto f2 = complexd{-1.0, 0.0} * f1 + complexd{eps, 0.0} * bump;
            return {std::move(f1), std::move(f2)};
        }
    }
    throw BadInput("unknown pair family");
}

inline PairFamily pair_family_for(std::size_t index) {
    switch (index % 4) {
        case 0: return PairFamily::Smooth;
        case 1: return PairFamily::Disjoint;
        case 2: return PairFamily::NearParallel;
        default: return PairFamily::SignFlipped;
    }
}

}  // namespace ineqlab
