#include <catch2/catch_amalgamated.hpp>

#include "ineqlab/sobolev.hpp"

using namespace ineqlab;

namespace {

// Shared systems: building one costs two Rayleigh quotients, so cache them.
const SobolevSystem& desk_system() {
    static const SobolevSystem sys = make_system(1, 0.25, GridSpec(1, 80.0, 4096));
    return sys;
}

const SobolevSystem& small_system() {
    static const SobolevSystem sys = make_system(1, 0.25, GridSpec(1, 80.0, 1024));
    return sys;
}

const GridSpec kDesk(1, 80.0, 4096);
const GridSpec kSmall(1, 80.0, 1024);

}  // namespace

TEST_CASE("bubble sampling") {
    const auto& sys = small_system();

    SECTION("reference profile peaks at one") {
        auto h = bubble(BubbleParams{}, sys, kSmall);
        // x = 0 is a grid node (index N/2)
        REQUIRE(std::abs(h[kSmall.points_per_side / 2] - complexd{1.0, 0.0}) < 1e-15);
    }

    SECTION("zero amplitude gives the zero function") {
        BubbleParams p;
        p.z = {0.0, 0.0};
        REQUIRE(lp_norm(bubble(p, sys, kSmall), 2.0) == 0.0);
    }

    SECTION("pointwise closed form") {
        BubbleParams p;
        p.z = {2.0, 0.0};
        p.a = 3.0;
        p.eta0[0] = 1.0;
        auto b = bubble(p, sys, kSmall);
        for (std::size_t i = 0; i < b.size(); i += 37) {
            const double x = kSmall.coord(i);
            const double u = 3.0 * (x - 1.0);
            const double want = 2.0 * std::pow(1.0 + u * u, -sys.profile_power());
            REQUIRE(std::abs(b[i] - complexd{want, 0.0}) <= 1e-14 * (1.0 + want));
        }
    }

    SECTION("boundary decay reporting") {
        // the profile decays like |x|^(-1/2) here, so every scale leaves a
        // visible boundary value; narrower bubbles leave less
        BubbleParams unit;
        const double at_unit = bubble_boundary_value(unit, sys, kSmall);
        REQUIRE(at_unit == Catch::Approx(std::pow(1.0 + 6400.0, -0.25)));
        BubbleParams narrow;
        narrow.a = 100.0;
        REQUIRE(bubble_boundary_value(narrow, sys, kSmall) < at_unit);
        REQUIRE(bubble_boundary_value(narrow, sys, kSmall) > 1e-6);
    }

    SECTION("invalid scale") {
        BubbleParams p;
        p.a = -1.0;
        REQUIRE_THROWS_AS(bubble(p, sys, kSmall), BadInput);
    }
}

TEST_CASE("sharp constant on the grid") {
    SECTION("desk-scale value and refinement acceptance") {
        const auto& sys = desk_system();
        REQUIRE(sys.S == Catch::Approx(1.719417189277).epsilon(1e-6));
        REQUIRE(sys.S_refinement_error < 1e-3);
        REQUIRE(rel_err(sys.p, 4.0) < 1e-14);
        REQUIRE(rel_err(sys.p_dual, 4.0 / 3.0) < 1e-14);
    }

    SECTION("amplitude homogeneity of the quotient is exact") {
        const auto& sys = small_system();
        auto h = bubble(BubbleParams{}, sys, kSmall);
        auto scaled = complexd{0.0, -2.5} * h;  // complex rescaling
        const double q1 = energy(h, sys.p) / spectral_quadratic_form(h, sys.alpha);
        const double q2 =
            energy(scaled, sys.p) / spectral_quadratic_form(scaled, sys.alpha);
        REQUIRE(rel_err(q1, q2) < 1e-12);
    }

    SECTION("exponent validation") {
        REQUIRE_THROWS_AS(make_system(1, 0.5, kSmall), BadExponent);
        REQUIRE_THROWS_AS(make_system(1, -0.1, kSmall), BadExponent);
        REQUIRE_THROWS_AS(make_system(2, 0.25, kSmall), SpecMismatch);
    }
}

TEST_CASE("radial constant for n = 3") {
    SECTION("closed form: (pi^2/4)^(1/3) / (3 pi^2 / 4)") {
        const double want =
            std::pow(M_PI * M_PI / 4.0, 1.0 / 3.0) / (3.0 * M_PI * M_PI / 4.0);
        REQUIRE(rel_err(radial_sobolev_constant(3), want) < 1e-10);
    }

    SECTION("scale invariance of the radial quotient") {
        const double q1 = radial_rayleigh_quotient(3, 1.0);
        for (double a : {0.5, 2.0, 3.0})
            REQUIRE(rel_err(radial_rayleigh_quotient(3, a), q1) < 1e-6);
    }
}

TEST_CASE("sobolev deficit") {
    const auto& sys = desk_system();

    SECTION("zero function") {
        REQUIRE(sobolev_deficit(GridFunction::zeros(kDesk), sys) == 0.0);
    }

    SECTION("the calibration bubble has zero deficit") {
        auto h = bubble(BubbleParams{}, sys, kDesk);
        REQUIRE(std::abs(sobolev_deficit(h, sys)) < 1e-10 * sobolev_scale(h, sys));
    }

    SECTION("shifted and rescaled-amplitude bubbles stay near zero") {
        Rng rng(21);
        for (int i = 0; i < 5; ++i) {
            BubbleParams p;
            p.z = {rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0)};
            p.eta0[0] = rng.uniform(-4.0, 4.0);
            auto b = bubble(p, sys, kDesk);
            REQUIRE(std::abs(sobolev_deficit(b, sys)) <
                    1e-3 * sobolev_scale(b, sys));
        }
    }

    SECTION("perturbed bubble: agreement with the double-resolution oracle") {
        auto h = bubble(BubbleParams{}, sys, kDesk);
        Rng rng(31);
        auto w = random_band_pass(kDesk, rng, 8, 24, true);
        const double hs = std::sqrt(spectral_quadratic_form(h, sys.alpha));
        const double ws = std::sqrt(spectral_quadratic_form(w, sys.alpha));
        auto f = h + complexd{0.1 * hs / ws, 0.0} * w;
        const double d_coarse = sobolev_deficit(f, sys);
        REQUIRE(d_coarse > 0.0);

        const GridSpec fine(1, 80.0, 8192);
        auto f_fine = resample(f, fine);
        const double d_fine = sobolev_deficit(f_fine, sys);
        REQUIRE(rel_err(d_coarse, d_fine) < 1e-2);
    }

    SECTION("random samples clear the bubble-calibrated budget") {
        Rng rng(41);
        // floor over a small shifted-bubble corpus
        double floor = 0.0;
        for (int i = 0; i < 5; ++i) {
            BubbleParams p;
            p.eta0[0] = rng.uniform(-4.0, 4.0);
            p.z = {rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0)};
            auto b = bubble(p, sys, kDesk);
            floor = std::max(floor,
                             std::abs(sobolev_deficit(b, sys)) / sobolev_scale(b, sys));
        }
        const double budget = 3.0 * floor + 1e-12;
        for (int i = 0; i < 100; ++i) {
            auto f = random_band_limited(kDesk, rng, 64, true);
            REQUIRE(sobolev_deficit(f, sys) >= -budget * sobolev_scale(f, sys));
        }
    }
}

TEST_CASE("hls deficit") {
    const auto& sys = desk_system();

    SECTION("zero function") {
        REQUIRE(hls_deficit(GridFunction::zeros(kDesk), sys) == 0.0);
    }

    SECTION("mean-zero random fields are far from optimal") {
        Rng rng(51);
        for (int i = 0; i < 50; ++i) {
            auto g = random_band_limited(kDesk, rng, 64, true);
            REQUIRE(hls_deficit(g, sys) >= -1e-10 * hls_scale(g, sys));
        }
    }

    SECTION("dual images of bubbles: deficits carry the box floor but stay nonnegative") {
        Rng rng(61);
        for (int i = 0; i < 5; ++i) {
            BubbleParams p;
            p.z = {rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0)};
            p.eta0[0] = rng.uniform(-4.0, 4.0);
            auto g = grad_energy(bubble(p, sys, kDesk), sys.p);
            const double rel = hls_deficit(g, sys) / hls_scale(g, sys);
            REQUIRE(rel >= -1e-10);
            REQUIRE(rel < 0.5);  // the measured infrared floor is ~0.35
        }
    }
}

TEST_CASE("hls quadratic form against the real-space kernel oracle") {
    // The oracle integrates the homogeneous kernel exactly over cell pairs
    // (second difference of the double antiderivative), normalized on one
    // modulated-gaussian reference. Localized wave packets keep both the
    // wrap-around images and the singular lowest frequency cells out of play.
    const GridSpec spec(1, 20.0, 512);
    auto sys = make_system(1, 0.25, spec);
    const double lam = 1.0 - 2.0 * sys.alpha;

    auto K2 = [&](double t) {
        return std::pow(std::abs(t), 2.0 - lam) / ((1.0 - lam) * (2.0 - lam));
    };
    auto riesz = [&](const GridFunction& g) {
        const double h = spec.spacing();
        long double acc = 0.0L;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double d = spec.coord(i) - spec.coord(j);
                const double w = K2(d + h) - 2.0 * K2(d) + K2(d - h);
                acc += (g[i].real() * g[j].real() + g[i].imag() * g[j].imag()) * w;
            }
        return double(acc);
    };
    auto spectral = [&](const GridFunction& g) {
        return spectral_quadratic_form(g, -sys.alpha, ZeroModePolicy::CellAverage);
    };

    const double k0 = 9.0 * spec.freq_step();
    auto ref = GridFunction::sample(spec, [&](auto x) {
        return complexd{std::cos(k0 * x[0]), std::sin(k0 * x[0])} *
               std::exp(-x[0] * x[0] / 16.0);
    });
    const double C = spectral(ref) / riesz(ref);

    Rng rng(71);
    for (int rep = 0; rep < 8; ++rep) {
        struct Packet {
            complexd c;
            double x0, w, k;
        };
        std::vector<Packet> ps;
        for (int j = 0; j < 3; ++j)
            ps.push_back({rng.cnormal(), rng.uniform(-6.0, 6.0),
                          rng.uniform(3.0, 6.0),
                          rng.uniform(6.0, 12.0) * spec.freq_step()});
        auto g = GridFunction::sample(spec, [&](auto x) {
            complexd v{0.0, 0.0};
            for (const auto& p : ps) {
                const double u = (x[0] - p.x0) / p.w;
                v += p.c * complexd{std::cos(p.k * x[0]), std::sin(p.k * x[0])} *
                     std::exp(-u * u);
            }
            return v;
        });
        REQUIRE(rel_err(spectral(g), C * riesz(g)) < 1e-2);
    }
}

TEST_CASE("distance to the optimizer family") {
    const auto& sys = desk_system();

    SECTION("an exact member is recovered") {
        BubbleParams truth;
        truth.z = {1.2, -0.4};
        truth.a = 1.7;
        truth.eta0[0] = 2.5;
        auto f = bubble(truth, sys, kDesk);
        auto fit = dist_to_bubbles(f, sys, BubbleNorm::GradNorm);
        const double fnorm = std::sqrt(spectral_quadratic_form(f, sys.alpha));
        REQUIRE(fit.distance <= 1e-6 * fnorm);
        REQUIRE(rel_err(fit.params.a, truth.a) < 1e-3);
        REQUIRE(std::abs(fit.params.eta0[0] - truth.eta0[0]) < 1e-3);
        REQUIRE(std::abs(fit.params.z - truth.z) < 1e-3);

        // fixed-point certificate: restarting does not improve materially
        auto again = refine_from(f, sys, BubbleNorm::GradNorm, fit.params);
        REQUIRE(again.distance >= fit.distance - 1e-6 * fnorm);
    }

    SECTION("a perturbed member is no farther than the perturbation") {
        BubbleParams truth;
        truth.a = 0.8;
        truth.eta0[0] = -1.0;
        auto b = bubble(truth, sys, kDesk);
        Rng rng(81);
        auto w = random_band_pass(kDesk, rng, 8, 24, true);
        const double ws = std::sqrt(spectral_quadratic_form(w, sys.alpha));
        const double eps = 0.05 * std::sqrt(spectral_quadratic_form(b, sys.alpha));
        auto f = b + complexd{eps / ws, 0.0} * w;
        auto fit = dist_to_bubbles(f, sys, BubbleNorm::GradNorm);
        REQUIRE(fit.distance <= eps * (1.0 + 1e-6) + 1e-6);
    }

    SECTION("two separated bubbles: the residue is one bubble up to tail overlap") {
        BubbleParams p1, p2;
        p1.eta0[0] = -40.0;
        p2.eta0[0] = 40.0;
        auto f = bubble(p1, sys, kDesk) + bubble(p2, sys, kDesk);
        auto fit = dist_to_bubbles(f, sys, BubbleNorm::GradNorm);
        const double single =
            std::sqrt(spectral_quadratic_form(bubble(p1, sys, kDesk), sys.alpha));
        // the slow optimizer tails overlap at the percent level on this box,
        // so the residue runs a few percent under one bubble norm
        REQUIRE(fit.distance >= 0.95 * single);
        REQUIRE(fit.distance <= 1.05 * single);

        // a denser multi-start sweep finds nothing better
        BubbleFitOptions dense;
        dense.scales_per_decade = 18;
        dense.centers_per_axis = 19;
        auto oracle = dist_to_bubbles(f, sys, BubbleNorm::GradNorm, dense);
        REQUIRE(fit.distance <= oracle.distance * (1.0 + 1e-6) + 1e-12);
    }

    SECTION("dual-family distance vanishes on a gradient image") {
        auto g = grad_energy(bubble(BubbleParams{}, sys, kDesk), sys.p);
        auto fit = dist_to_bubbles(g, sys, BubbleNorm::DualLpNorm);
        REQUIRE(fit.distance <= 1e-8 * lp_norm(g, sys.p_dual));
        REQUIRE(rel_err(fit.params.a, 1.0) < 1e-4);
    }

    SECTION("zero input is rejected") {
        REQUIRE_THROWS_AS(
            dist_to_bubbles(GridFunction::zeros(kDesk), sys, BubbleNorm::GradNorm),
            DegenerateInput);
    }
}

TEST_CASE("stability transfer inequality") {
    const auto& sys = desk_system();
    Rng rng(91);

    SECTION("young equality of the quadratic pair is exact on mean-zero fields") {
        for (int i = 0; i < 20; ++i) {
            auto g = random_band_limited(kDesk, rng, 64, true);
            auto rep = transfer_inequality_check(g, sys);
            REQUIRE(rep.young_residual < 1e-8);
        }
    }

    SECTION("slack is nonnegative across the mean-zero corpus") {
        for (int i = 0; i < 100; ++i) {
            auto g = random_band_limited(kDesk, rng, 64, true);
            auto rep = transfer_inequality_check(g, sys);
            const double scale = sys.S * energy(g, sys.p_dual);
            REQUIRE(rep.slack >= -1e-10 * scale);
            REQUIRE(rep.gradient_term >= 0.0);
        }
    }

    SECTION("gradient images of far-from-optimal fields have strict slack") {
        for (int i = 0; i < 10; ++i) {
            auto f0 = random_band_limited(kDesk, rng, 64, true);
            auto g = grad_energy(f0, sys.p);
            auto rep = transfer_inequality_check(g, sys);
            const double scale = sys.S * energy(g, sys.p_dual);
            REQUIRE(rep.slack > 1e-4 * scale);
        }
    }

    SECTION("zero input is rejected") {
        REQUIRE_THROWS_AS(transfer_inequality_check(GridFunction::zeros(kDesk), sys),
                          DegenerateInput);
    }
}

TEST_CASE("dual-transfer constant") {
    const auto& sys = desk_system();
    const double q = sys.dual_gap_ratio();
    REQUIRE(rel_err(q, 1.0 / 3.0) < 1e-14);

    SECTION("saturation at large kappa") {
        REQUIRE(rel_err(kappa_star(1e12, sys), 0.5 * q) < 1e-14);
    }

    SECTION("linear branch at small kappa") {
        const double k = 1e-6;
        REQUIRE(rel_err(kappa_star(k, sys), 0.5 * q * q * k / sys.S) < 1e-12);
    }

    SECTION("clamp point continuity to 1e-14") {
        const double k_clamp = sys.S / q;
        const double left = 0.5 * q * (k_clamp * q / sys.S);
        const double right = 0.5 * q;
        REQUIRE(std::abs(left - right) <= 1e-14);
        REQUIRE(std::abs(kappa_star(k_clamp, sys) - right) <= 1e-14);
    }

    SECTION("monotone nondecreasing in kappa") {
        double prev = 0.0;
        for (double k = 1e-4; k < 1e3; k *= 3.0) {
            const double v = kappa_star(k, sys);
            REQUIRE(v >= prev);
            prev = v;
        }
    }

    SECTION("pure function: identical inputs give identical bits") {
        REQUIRE(kappa_star(0.1, sys) == kappa_star(0.1, sys));
    }

    SECTION("bad input") {
        REQUIRE_THROWS_AS(kappa_star(0.0, sys), BadInput);
        REQUIRE_THROWS_AS(kappa_star(-1.0, sys), BadInput);
    }
}

TEST_CASE("stability constants bundle") {
    const auto& sys = desk_system();
    auto c = make_stability_constants(0.1, 0.5, 0.01, sys);
    REQUIRE(c.kappa_BE == 0.1);
    REQUIRE(c.kappa_BE_star == kappa_star(0.1, sys));
    const double ql = sys.dual_gap_ratio();
    REQUIRE(c.local_hls ==
            0.5 * ql * std::min(4.0 * 0.01 * ql / sys.S, 1.0));
    REQUIRE(c.alpha_extrapolated);  // alpha = 0.25, derived formula is alpha = 1
    REQUIRE_THROWS_AS(make_stability_constants(0.0, 0.5, 0.01, sys), BadInput);
}

TEST_CASE("local stability suite") {
    const auto& sys = small_system();
    auto consts = make_stability_constants(0.1, 0.5, 0.01, sys);
    Rng rng(5);
    auto rep = local_stability_suite(sys, kSmall, consts, 8, rng);

    REQUIRE(rep.primal.size() == 8);
    REQUIRE(rep.dual_statement.size() == rep.dual_alternate.size());
    REQUIRE(rep.deficit_floor >= 0.0);
    for (const auto& s : rep.primal) {
        REQUIRE(std::isfinite(s.margin));
        REQUIRE(s.required >= 0.0);
    }
    // the alternate gate is at least as permissive as the statement gate
    for (std::size_t i = 0; i < rep.dual_statement.size(); ++i)
        REQUIRE(rep.dual_alternate[i].threshold >=
                rep.dual_statement[i].threshold);
    REQUIRE(rep.passes());
    // the S-scaled conjugate-gradient map satisfies Young equality strictly
    // better than the unscaled one
    REQUIRE(rep.grad_fstar_normalization_gap > 0.0);
}
