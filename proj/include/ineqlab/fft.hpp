#pragma once

#include <array>
#include <map>
#include <vector>

#include "ineqlab/core.hpp"

namespace ineqlab::fft {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// Twiddle tables are cached per size and per thread; transforms stay
// reentrant without locking.
inline const std::vector<complexd>& twiddles(std::size_t n) {
    thread_local std::map<std::size_t, std::vector<complexd>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::vector<complexd> w(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -2.0 * M_PI * double(k) / double(n);
            w[k] = {std::cos(ang), std::sin(ang)};
        }
        it = cache.emplace(n, std::move(w)).first;
    }
    return it->second;
}

}  // namespace detail

/// In-place radix-2 transform, length a power of two.
/// Forward: F_k = sum_j f_j exp(-2 pi i j k / n). Inverse includes the 1/n.
inline void transform(complexd* a, std::size_t n, bool inverse) {
    if (!is_pow2(n)) throw BadInput("fft length must be a power of two");
    if (n == 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const auto& w = detail::twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                complexd tw = w[k * stride];
                if (inverse) tw = std::conj(tw);
                const complexd u = a[i + k];
                const complexd v = a[i + k + len / 2] * tw;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / double(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= scale;
    }
}

inline void transform(std::vector<complexd>& a, bool inverse) {
    transform(a.data(), a.size(), inverse);
}

/// Separable transform over a dim-dimensional row-major cube of side n.
inline void transform_nd(std::vector<complexd>& a, unsigned dim, std::size_t n, bool inverse) {
    if (dim == 0 || dim > 3) throw BadInput("transform_nd supports dim 1..3");
    std::size_t total = 1;
    for (unsigned d = 0; d < dim; ++d) total *= n;
    if (a.size() != total) throw BadInput("transform_nd size mismatch");

    if (dim == 1) {
        transform(a, inverse);
        return;
    }

    std::vector<complexd> line(n);
    // Axis d has stride n^(dim-1-d) in row-major order.
    for (unsigned d = 0; d < dim; ++d) {
        std::size_t stride = 1;
        for (unsigned k = d + 1; k < dim; ++k) stride *= n;
        const std::size_t lines = total / n;
        for (std::size_t l = 0; l < lines; ++l) {
            // Decompose the line index into the coordinates of the fixed axes.
            std::size_t base = 0, rem = l;
            for (unsigned k = 0; k < dim; ++k) {
                if (k == d) continue;
                std::size_t axis_stride = 1;
                for (unsigned m = k + 1; m < dim; ++m) axis_stride *= n;
                const std::size_t coord = rem % n;
                rem /= n;
                base += coord * axis_stride;
            }
            for (std::size_t i = 0; i < n; ++i) line[i] = a[base + i * stride];
            transform(line, inverse);
            for (std::size_t i = 0; i < n; ++i) a[base + i * stride] = line[i];
        }
    }
}

}  // namespace ineqlab::fft
