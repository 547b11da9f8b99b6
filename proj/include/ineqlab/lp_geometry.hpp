#pragma once

#include "ineqlab/grid.hpp"

namespace ineqlab {

// ---------------------------------------------------------------------------
// Conjugate exponents
// ---------------------------------------------------------------------------

struct ExponentPair {
    double p;
    double p_dual;

    explicit ExponentPair(double p_) : p(p_), p_dual(p_ / (p_ - 1.0)) {
        if (!(p > 1.0) || !std::isfinite(p))
            throw BadExponent("p must lie in (1, inf)");
        if (std::abs(1.0 / p + 1.0 / p_dual - 1.0) > 1e-14)
            throw BadExponent("conjugate exponent identity failed");
    }
};

// ---------------------------------------------------------------------------
// E(f) = ||f||_p^2 and its gradient map. The gradient formula is evaluated
// pointwise in closed form; sgn(w) = w/|w| with sgn(0) = 0.
// ---------------------------------------------------------------------------

namespace detail {

// Power sums in extended precision: the convexity gaps subtract quantities
// agreeing to ~12 digits, so them and the pairing accumulate in long double.
inline long double lp_power_sum(const GridFunction& f, double p) {
    long double acc = 0.0L, comp = 0.0L;
    for (const auto& v : f.values()) {
        const long double term =
            powl((long double)std::abs(v), (long double)p);
        const long double y = term - comp;
        const long double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return acc;
}

inline long double pairing_ld(const GridFunction& f, const GridFunction& g) {
    require_same_spec(f, g);
    long double acc = 0.0L, comp = 0.0L;
    const auto fv = f.values();
    const auto gv = g.values();
    for (std::size_t i = 0; i < fv.size(); ++i) {
        const long double term = (long double)fv[i].real() * gv[i].real() +
                                 (long double)fv[i].imag() * gv[i].imag();
        const long double y = term - comp;
        const long double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return 2.0L * (long double)f.spec().cell_volume() * acc;
}

inline long double lp_norm_ld(const GridFunction& f, double p) {
    return powl((long double)f.spec().cell_volume() * lp_power_sum(f, p),
                1.0L / (long double)p);
}

inline long double energy_ld(const GridFunction& f, double p) {
    const long double n = lp_norm_ld(f, p);
    return n * n;
}

}  // namespace detail

inline double energy(const GridFunction& f, double p) {
    ExponentPair exps(p);
    f.require_finite("energy");
    return double(detail::energy_ld(f, p));
}

inline GridFunction grad_energy(const GridFunction& f, double p) {
    ExponentPair exps(p);
    f.require_finite("grad_energy");
    const double norm = lp_norm(f, p);
    if (norm == 0.0) return GridFunction::zeros(f.spec());
    const double scale = std::pow(norm, 2.0 - p);
    std::vector<complexd> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::abs(f[i]);
        out[i] = (a == 0.0) ? complexd{0.0, 0.0}
                            : f[i] * (scale * std::pow(a, p - 1.0) / a);
    }
    return GridFunction(f.spec(), std::move(out));
}

/// Gradient of the conjugate functional: the same map with the dual exponent.
inline GridFunction grad_energy_dual(const GridFunction& g, double p) {
    return grad_energy(g, ExponentPair(p).p_dual);
}

// ---------------------------------------------------------------------------
// Quantitative convexity of E
// ---------------------------------------------------------------------------

struct ConvexityWitness {
    GridFunction f1, f2;
    double p = 2.0;
    double norm_f1 = 0.0, norm_f2 = 0.0, norm_diff = 0.0;
    double gap = 0.0;                    // E(f2) - E(f1) - <f2-f1, grad E(f1)>
    double predicted_lower_bound = 0.0;  // exponent-dependent remainder
    double margin = 0.0;                 // gap - predicted_lower_bound
    double scale = 0.0;                  // reference magnitude for tolerances
};

/// Remainder constant for p > 2: (1/4p) (2/3)^(p-1).
inline double p_power_constant(double p) {
    return std::pow(2.0 / 3.0, p - 1.0) / (4.0 * p);
}

inline ConvexityWitness strong_convexity_gap(const GridFunction& f1,
                                             const GridFunction& f2, double p) {
    ExponentPair exps(p);
    require_same_spec(f1, f2);
    f1.require_finite("strong_convexity_gap");
    f2.require_finite("strong_convexity_gap");

    const auto diff = f2 - f1;
    const auto grad = grad_energy(f1, p);
    const long double gap = detail::energy_ld(f2, p) - detail::energy_ld(f1, p) -
                            detail::pairing_ld(diff, grad);

    ConvexityWitness w{f1, f2, p, 0, 0, 0, 0, 0, 0, 0};
    w.norm_f1 = lp_norm(f1, p);
    w.norm_f2 = lp_norm(f2, p);
    w.norm_diff = lp_norm(diff, p);
    w.gap = double(gap);
    if (p <= 2.0) {
        w.predicted_lower_bound = (p - 1.0) * w.norm_diff * w.norm_diff;
    } else if (w.norm_f1 + w.norm_f2 == 0.0) {
        w.predicted_lower_bound = 0.0;
    } else {
        w.predicted_lower_bound = p_power_constant(p) *
                                  std::pow(w.norm_f1 + w.norm_f2, 2.0 - p) *
                                  std::pow(w.norm_diff, p);
    }
    w.margin = double(gap - (long double)w.predicted_lower_bound);
    w.scale = std::max({w.norm_f1 * w.norm_f1, w.norm_f2 * w.norm_f2,
                        w.norm_diff * w.norm_diff, 1e-300});
    return w;
}

// ---------------------------------------------------------------------------
// Continuity of the gradient map of the conjugate functional.
//
// For p > 2 the bracketed constant is the inverse of the remainder constant
// above: ||grad E*(g1) - grad E*(g2)||_p
//   <= (3/2) (4p)^(1/(p-1)) R^((p-2)/(p-1)) ||g1-g2||_{p'}^(1/(p-1))
// whenever both ||g_i||_{p'} <= R/2. The variant with (||g1|| + ||g2||) in
// place of R is tighter and also reported.
// ---------------------------------------------------------------------------

struct GradContinuityReport {
    double lhs = 0.0;
    double rhs_stated = 0.0;  // R-form bound (the contract)
    double rhs_tight = 0.0;   // (||g1|| + ||g2||)-form bound
    double ratio = 0.0;       // lhs / rhs_stated
    double ratio_tight = 0.0;
    double R = 0.0;
};

inline GradContinuityReport grad_continuity_ratio(const GridFunction& g1,
                                                  const GridFunction& g2,
                                                  double p, double R = 0.0) {
    ExponentPair exps(p);
    require_same_spec(g1, g2);
    const auto diff = g1 - g2;
    const double dual_diff = lp_norm(diff, exps.p_dual);
    if (dual_diff == 0.0) throw DegenerateInput("grad_continuity_ratio: g1 == g2");

    const double lhs =
        lp_norm(grad_energy_dual(g1, p) - grad_energy_dual(g2, p), p);

    GradContinuityReport rep;
    rep.lhs = lhs;
    if (p <= 2.0) {
        rep.rhs_stated = dual_diff / (p - 1.0);
        rep.rhs_tight = rep.rhs_stated;
        rep.R = R;
    } else {
        const double n1 = lp_norm(g1, exps.p_dual);
        const double n2 = lp_norm(g2, exps.p_dual);
        if (R <= 0.0) R = 2.0 * std::max(n1, n2);
        if (std::max(n1, n2) > R / 2.0 * (1.0 + 1e-12))
            throw PreconditionViolated("grad_continuity_ratio: norms exceed R/2");
        const double expo = 1.0 / (p - 1.0);
        const double growth = std::pow(dual_diff, expo);
        const double c = 1.5 * std::pow(4.0 * p, expo);
        rep.rhs_stated = c * std::pow(R, (p - 2.0) * expo) * growth;
        rep.rhs_tight = c * std::pow(n1 + n2, (p - 2.0) * expo) * growth;
        rep.R = R;
    }
    rep.ratio = rep.lhs / rep.rhs_stated;
    rep.ratio_tight = rep.lhs / rep.rhs_tight;
    return rep;
}

// ---------------------------------------------------------------------------
// Unit-vector inequality for p > 2:
//   1 - Re int(u v*) >= (1 / (p 2^(p-1))) ||u - grad E*(v)||_p^p
// for ||u||_p = 1, ||v||_{p'} = 1.
// ---------------------------------------------------------------------------

inline double clarkson_unit_gap(const GridFunction& u, const GridFunction& v,
                                double p) {
    if (!(p > 2.0)) throw BadExponent("clarkson_unit_gap needs p > 2");
    ExponentPair exps(p);
    require_same_spec(u, v);
    if (std::abs(lp_norm(u, p) - 1.0) > 1e-10)
        throw NotUnit("u is not an L^p unit vector");
    if (std::abs(lp_norm(v, exps.p_dual) - 1.0) > 1e-10)
        throw NotUnit("v is not an L^p' unit vector");

    // Re int(u v*) is half the real pairing.
    const double overlap = 0.5 * double(detail::pairing_ld(u, v));
    const auto residual = u - grad_energy_dual(v, p);
    const double rem = double(detail::lp_power_sum(residual, p)) *
                       u.spec().cell_volume() / (p * std::pow(2.0, p - 1.0));
    return (1.0 - overlap) - rem;
}

// ---------------------------------------------------------------------------
// CSV rows: (p, ||f1||, ||f2||, ||f2-f1||, gap, bound, margin)
// ---------------------------------------------------------------------------

inline std::string witness_csv_row(const ConvexityWitness& w) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", w.p, w.norm_f1,
                  w.norm_f2, w.norm_diff, w.gap, w.predicted_lower_bound,
                  w.margin);
    return buf;
}

inline const char* witness_csv_header() {
    return "p,norm_f1,norm_f2,norm_diff,gap,bound,margin";
}

}  // namespace ineqlab
