#include <catch2/catch_amalgamated.hpp>

#include "ineqlab/lp_geometry.hpp"
#include "ineqlab/sampling.hpp"

using namespace ineqlab;

namespace {
const GridSpec kSpec(1, 2.0, 256);

GridFunction smooth(Rng& rng, double amp = 1.0) {
    auto f = random_band_limited(kSpec, rng, 40, false);
    return complexd{amp, 0.0} * f;
}
}  // namespace

TEST_CASE("energy") {
    SECTION("zero function") {
        REQUIRE(energy(GridFunction::zeros(kSpec), 1.5) == 0.0);
    }

    SECTION("p = 2 is half the self-pairing") {
        Rng rng(1);
        auto f = smooth(rng);
        REQUIRE(rel_err(energy(f, 2.0), 0.5 * pairing(f, f)) < 1e-13);
    }

    SECTION("gaussian at p = 1.5 against the closed-form integral") {
        const GridSpec spec(1, 20.0, 4096);
        auto f = GridFunction::sample(
            spec, [](auto x) { return complexd{std::exp(-x[0] * x[0]), 0.0}; });
        // integral of exp(-1.5 x^2) = sqrt(pi / 1.5)
        const double want = std::pow(std::sqrt(M_PI / 1.5), 2.0 / 1.5);
        REQUIRE(rel_err(energy(f, 1.5), want) < 1e-9);
    }

    SECTION("invalid exponents") {
        REQUIRE_THROWS_AS(energy(GridFunction::zeros(kSpec), 1.0), BadExponent);
        REQUIRE_THROWS_AS(energy(GridFunction::zeros(kSpec), 0.5), BadExponent);
    }
}

TEST_CASE("gradient map") {
    Rng rng(2);

    SECTION("p = 2 is the identity") {
        auto f = smooth(rng);
        auto g = grad_energy(f, 2.0);
        for (std::size_t i = 0; i < f.size(); ++i)
            REQUIRE(std::abs(g[i] - f[i]) < 1e-12);
    }

    SECTION("zero maps to zero") {
        auto g = grad_energy(GridFunction::zeros(kSpec), 1.5);
        REQUIRE(lp_norm(g, 2.0) == 0.0);
    }

    SECTION("norm preservation at p = 1.25 (dual exponent 5)") {
        auto f = smooth(rng);
        auto g = grad_energy(f, 1.25);
        REQUIRE(rel_err(lp_norm(g, 5.0), lp_norm(f, 1.25)) < 1e-12);
    }

    SECTION("norm preservation across exponents and fields") {
        for (double p : {1.1, 1.5, 2.5, 4.0}) {
            auto f = smooth(rng, rng.uniform(0.1, 10.0));
            const double pd = ExponentPair(p).p_dual;
            REQUIRE(rel_err(lp_norm(grad_energy(f, p), pd), lp_norm(f, p)) < 1e-12);
        }
    }

    SECTION("Young equality: <f, grad E(f)> = E(f) + E*(grad E(f))") {
        for (double p : {1.25, 1.5, 3.0}) {
            auto f = smooth(rng);
            auto g = grad_energy(f, p);
            const double pd = ExponentPair(p).p_dual;
            REQUIRE(rel_err(pairing(f, g), energy(f, p) + energy(g, pd)) < 1e-10);
        }
    }
}

TEST_CASE("dual gradient map") {
    Rng rng(3);

    SECTION("p = 2 identity") {
        auto g = smooth(rng);
        auto f = grad_energy_dual(g, 2.0);
        for (std::size_t i = 0; i < g.size(); ++i)
            REQUIRE(std::abs(f[i] - g[i]) < 1e-12);
    }

    SECTION("round trip at p = 1.5") {
        auto f = smooth(rng);
        auto back = grad_energy_dual(grad_energy(f, 1.5), 1.5);
        REQUIRE(lp_norm(back - f, 1.5) < 1e-9 * lp_norm(f, 1.5));
    }

    SECTION("round trip both directions across exponents") {
        for (double p : {1.1, 1.75, 2.5, 4.0, 6.0}) {
            auto f = smooth(rng);
            auto back = grad_energy_dual(grad_energy(f, p), p);
            REQUIRE(lp_norm(back - f, p) < 1e-9 * lp_norm(f, p));
        }
    }

    SECTION("unit vector at p = 4: the closed-form one-third power") {
        auto raw = smooth(rng);
        auto v = complexd{1.0 / lp_norm(raw, 4.0 / 3.0), 0.0} * raw;
        auto f = grad_energy_dual(v, 4.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double a = std::abs(v[i]);
            const complexd want =
                a == 0.0 ? complexd{0.0, 0.0} : v[i] * (std::pow(a, 1.0 / 3.0) / a);
            REQUIRE(std::abs(f[i] - want) < 1e-11);
        }
    }
}

TEST_CASE("strong convexity gap") {
    Rng rng(4);

    SECTION("identical inputs") {
        auto f = smooth(rng);
        auto w = strong_convexity_gap(f, f, 1.5);
        REQUIRE(w.gap == 0.0);
        REQUIRE(w.predicted_lower_bound == 0.0);
    }

    SECTION("p = 2 is the Hilbert identity: margin 0") {
        auto f1 = smooth(rng);
        auto f2 = smooth(rng);
        auto w = strong_convexity_gap(f1, f2, 2.0);
        REQUIRE(rel_err(w.gap, w.norm_diff * w.norm_diff) < 1e-11);
        REQUIRE(std::abs(w.margin) < 1e-11 * w.scale);
    }

    SECTION("margins are nonnegative over the adversarial corpus") {
        const double ps[] = {1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0};
        for (double p : ps) {
            for (int rep = 0; rep < 200; ++rep) {
                auto [f1, f2] =
                    adversarial_pair(kSpec, rng, pair_family_for(rep), 24);
                auto w = strong_convexity_gap(f1, f2, p);
                REQUIRE(w.gap >= -1e-10 * w.scale);
                REQUIRE(w.margin >= -1e-9 * w.scale);
            }
        }
    }

    SECTION("p > 2: the quadratic-remainder ratio degenerates") {
        // f2 = f1 + t*w with w supported where f1 vanishes: the ratio
        // gap / ||f2-f1||_p^2 scales like t^(p-2) and drops below 1e-3.
        for (double p : {2.5, 3.0, 4.0, 6.0}) {
            auto [u, w] = disjoint_support_pair(kSpec, rng, 16);
            auto un = complexd{1.0 / lp_norm(u, p), 0.0} * u;
            auto wn = complexd{1.0 / lp_norm(w, p), 0.0} * w;
            const double t = (p <= 2.5) ? 1e-6 : (p <= 3.0 ? 1e-3 : (p <= 4.0 ? 1e-2 : 0.1));
            auto f2 = un + complexd{t, 0.0} * wn;
            auto witness = strong_convexity_gap(un, f2, p);
            const double ratio =
                witness.gap / (witness.norm_diff * witness.norm_diff);
            REQUIRE(ratio < 1e-3);
            REQUIRE(witness.gap >= -1e-10 * witness.scale);

            // shrinking t shrinks the ratio further
            auto f3 = un + complexd{t / 4.0, 0.0} * wn;
            auto witness2 = strong_convexity_gap(un, f3, p);
            const double ratio2 =
                witness2.gap / (witness2.norm_diff * witness2.norm_diff);
            REQUIRE(ratio2 < ratio + 1e-12);
        }
    }

    SECTION("second difference of t -> ||f + t g||_p^2 at 0 dominates 2(p-1)||g||_p^2") {
        // pointwise nonvanishing f
        for (double p : {1.1, 1.5, 2.0}) {
            auto base = smooth(rng);
            std::vector<complexd> vals(base.values().begin(), base.values().end());
            for (auto& v : vals)
                if (std::abs(v) < 0.05) v += complexd{0.1, 0.1};
            GridFunction f(kSpec, std::move(vals));
            auto g = smooth(rng);
            const double t = 1e-3;
            const double second =
                (energy(f + complexd{t, 0.0} * g, p) -
                 2.0 * energy(f, p) + energy(f - complexd{t, 0.0} * g, p)) /
                (t * t);
            const double bound = 2.0 * (p - 1.0) * energy(g, p);
            const double scale = energy(f, p) + energy(g, p);
            REQUIRE(second >= bound - 1e-5 * scale);
        }
    }
}

TEST_CASE("gradient continuity") {
    Rng rng(5);

    SECTION("p = 2: ratio is exactly 1") {
        auto g1 = smooth(rng);
        auto g2 = smooth(rng);
        auto rep = grad_continuity_ratio(g1, g2, 2.0);
        REQUIRE(rel_err(rep.ratio, 1.0) < 1e-12);
    }

    SECTION("p = 1.25: Lipschitz constant 4 bounds all sampled ratios") {
        for (int rep = 0; rep < 200; ++rep) {
            auto g1 = smooth(rng, rng.uniform(0.1, 2.0));
            auto g2 = smooth(rng, rng.uniform(0.1, 2.0));
            auto r = grad_continuity_ratio(g1, g2, 1.25);
            REQUIRE(r.ratio <= 1.0 + 1e-9);
            REQUIRE(rel_err(r.rhs_stated, 4.0 * lp_norm(g1 - g2, 5.0)) < 1e-12);
        }
    }

    SECTION("p = 3, R = 2: Hoelder bound holds on norm-constrained pairs") {
        for (int rep = 0; rep < 200; ++rep) {
            auto g1 = smooth(rng);
            auto g2 = smooth(rng);
            // scale both into the ball of radius R/2 = 1
            auto h1 = complexd{rng.uniform(0.05, 1.0) / lp_norm(g1, 1.5), 0.0} * g1;
            auto h2 = complexd{rng.uniform(0.05, 1.0) / lp_norm(g2, 1.5), 0.0} * g2;
            auto r = grad_continuity_ratio(h1, h2, 3.0, 2.0);
            REQUIRE(r.ratio <= 1.0 + 1e-9);
            REQUIRE(r.ratio_tight <= 1.0 + 1e-9);
            REQUIRE(r.rhs_tight <= r.rhs_stated * (1.0 + 1e-12));
        }
    }

    SECTION("precondition and degeneracy errors") {
        auto g = smooth(rng);
        REQUIRE_THROWS_AS(grad_continuity_ratio(g, g, 3.0, 2.0), DegenerateInput);
        auto big = complexd{10.0 / lp_norm(g, 1.5), 0.0} * g;
        auto other = smooth(rng);
        REQUIRE_THROWS_AS(grad_continuity_ratio(big, other, 3.0, 2.0),
                          PreconditionViolated);
    }
}

TEST_CASE("unit-vector gap for p > 2") {
    Rng rng(6);
    const double p = 4.0;
    const double pd = ExponentPair(p).p_dual;

    SECTION("the gradient pair has zero gap") {
        auto raw = smooth(rng);
        auto u = complexd{1.0 / lp_norm(raw, p), 0.0} * raw;
        auto v = grad_energy(u, p);  // unit in the dual norm by isometry
        const double gap = clarkson_unit_gap(u, v, p);
        REQUIRE(std::abs(gap) < 1e-10);
    }

    SECTION("two-atom antipodal configuration") {
        // one positive and one negative atom; the closed form is exact
        std::vector<complexd> uv(kSpec.total_points(), complexd{0.0, 0.0});
        std::vector<complexd> vv(kSpec.total_points(), complexd{0.0, 0.0});
        const double h = kSpec.cell_volume();
        uv[10] = {1.0 / std::pow(h, 1.0 / p), 0.0};
        vv[10] = {-1.0 / std::pow(h, 1.0 / pd), 0.0};
        GridFunction u(kSpec, std::move(uv));
        GridFunction v(kSpec, std::move(vv));
        const double gap = clarkson_unit_gap(u, v, p);
        // overlap = -1, and grad E*(v) is the antipodal unit atom
        const double want = 2.0 - std::pow(2.0, p) / (p * std::pow(2.0, p - 1.0));
        REQUIRE(rel_err(gap, want) < 1e-12);
        REQUIRE(gap >= -1e-9);
    }

    SECTION("random unit pairs keep the gap nonnegative") {
        for (int rep = 0; rep < 500; ++rep) {
            auto a = smooth(rng);
            auto b = smooth(rng);
            auto u = complexd{1.0 / lp_norm(a, p), 0.0} * a;
            auto v = complexd{1.0 / lp_norm(b, pd), 0.0} * b;
            REQUIRE(clarkson_unit_gap(u, v, p) >= -1e-9);
        }
    }

    SECTION("errors") {
        auto a = smooth(rng);
        auto u = complexd{1.0 / lp_norm(a, p), 0.0} * a;
        REQUIRE_THROWS_AS(clarkson_unit_gap(a + u, u, p), NotUnit);
        REQUIRE_THROWS_AS(clarkson_unit_gap(u, u, 1.5), BadExponent);
    }
}

TEST_CASE("exponent pair validation") {
    REQUIRE(ExponentPair(2.0).p_dual == 2.0);
    REQUIRE(rel_err(ExponentPair(1.25).p_dual, 5.0) < 1e-14);
    REQUIRE_THROWS_AS(ExponentPair(1.0), BadExponent);
    REQUIRE_THROWS_AS(ExponentPair(std::numeric_limits<double>::infinity()),
                      BadExponent);
}
