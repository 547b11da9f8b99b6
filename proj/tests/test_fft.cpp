#include <catch2/catch_amalgamated.hpp>

#include "ineqlab/fft.hpp"

using namespace ineqlab;

namespace {

// O(n^2) reference DFT, the independent oracle for the fast transform.
std::vector<complexd> naive_dft(const std::vector<complexd>& f, bool inverse) {
    const std::size_t n = f.size();
    std::vector<complexd> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        complexd acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * M_PI * double(j * k % n) / double(n);
            acc += f[j] * complexd{std::cos(ang), std::sin(ang)};
        }
        out[k] = inverse ? acc / double(n) : acc;
    }
    return out;
}

}  // namespace

TEST_CASE("fft matches the naive DFT") {
    Rng rng(42);
    for (std::size_t n : {8u, 64u, 128u}) {
        std::vector<complexd> f(n);
        for (auto& v : f) v = rng.cnormal();
        auto want = naive_dft(f, false);
        auto got = f;
        fft::transform(got, false);
        for (std::size_t k = 0; k < n; ++k)
            REQUIRE(std::abs(got[k] - want[k]) < 1e-10 * std::sqrt(double(n)));
    }
}

TEST_CASE("fft round trip is the identity") {
    Rng rng(7);
    std::vector<complexd> f(1024);
    for (auto& v : f) v = rng.cnormal();
    auto g = f;
    fft::transform(g, false);
    fft::transform(g, true);
    for (std::size_t i = 0; i < f.size(); ++i)
        REQUIRE(std::abs(g[i] - f[i]) < 1e-12);
}

TEST_CASE("fft Parseval identity") {
    Rng rng(3);
    std::vector<complexd> f(256);
    for (auto& v : f) v = rng.cnormal();
    double time_side = 0.0;
    for (const auto& v : f) time_side += std::norm(v);
    auto g = f;
    fft::transform(g, false);
    double freq_side = 0.0;
    for (const auto& v : g) freq_side += std::norm(v);
    REQUIRE(rel_err(freq_side, double(f.size()) * time_side) < 1e-12);
}

TEST_CASE("multidimensional transform matches per-axis naive DFT in 2d") {
    Rng rng(11);
    const std::size_t n = 16;
    std::vector<complexd> f(n * n);
    for (auto& v : f) v = rng.cnormal();

    // rows then columns with the oracle
    std::vector<complexd> want = f;
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<complexd> row(want.begin() + r * n, want.begin() + (r + 1) * n);
        row = naive_dft(row, false);
        std::copy(row.begin(), row.end(), want.begin() + r * n);
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<complexd> col(n);
        for (std::size_t r = 0; r < n; ++r) col[r] = want[r * n + c];
        col = naive_dft(col, false);
        for (std::size_t r = 0; r < n; ++r) want[r * n + c] = col[r];
    }

    auto got = f;
    fft::transform_nd(got, 2, n, false);
    for (std::size_t i = 0; i < f.size(); ++i)
        REQUIRE(std::abs(got[i] - want[i]) < 1e-10);

    fft::transform_nd(got, 2, n, true);
    for (std::size_t i = 0; i < f.size(); ++i)
        REQUIRE(std::abs(got[i] - f[i]) < 1e-12);
}

TEST_CASE("fft rejects non power-of-two lengths") {
    std::vector<complexd> f(12);
    REQUIRE_THROWS_AS(fft::transform(f, false), BadInput);
}
