#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "ineqlab/core.hpp"

namespace ineqlab {

// ---------------------------------------------------------------------------
// TabulatedConvexFn: the piecewise-linear interpolant of (knot, value) pairs,
// +infinity outside [first knot, last knot]. Infinite values are stored as a
// mask, never used in arithmetic; the finite entries must form one contiguous
// block (otherwise the epigraph is not convex) and the finite slopes must be
// nondecreasing.
// ---------------------------------------------------------------------------

class TabulatedConvexFn {
public:
    static constexpr double kSlopeTol = 1e-9;

    TabulatedConvexFn(std::vector<double> knots, std::vector<double> values)
        : knots_(std::move(knots)) {
        if (knots_.size() < 2 || knots_.size() != values.size())
            throw BadInput("need matching knot/value arrays with >= 2 entries");
        for (std::size_t i = 1; i < knots_.size(); ++i)
            if (!(knots_[i] > knots_[i - 1]))
                throw BadInput("knots must be strictly increasing");
        values_.resize(values.size());
        finite_.resize(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (std::isnan(values[i])) throw NonFinite("tabulated value is NaN");
            finite_[i] = std::isfinite(values[i]);
            values_[i] = finite_[i] ? values[i] : 0.0;
        }
        auto first = std::find(finite_.begin(), finite_.end(), char(1));
        if (first == finite_.end()) throw EmptyDomain("function is identically +inf");
        lo_ = std::size_t(first - finite_.begin());
        hi_ = lo_;
        while (hi_ + 1 < finite_.size() && finite_[hi_ + 1]) ++hi_;
        for (std::size_t i = hi_ + 1; i < finite_.size(); ++i)
            if (finite_[i])
                throw BadInput("finite values must form a contiguous block");
        check_convexity();
    }

    std::size_t size() const { return knots_.size(); }
    const std::vector<double>& knots() const { return knots_; }
    double knot(std::size_t i) const { return knots_[i]; }
    bool finite_at(std::size_t i) const { return finite_[i] != 0; }
    double value(std::size_t i) const {
        if (!finite_[i]) throw OutOfDomain("value at an infinite knot");
        return values_[i];
    }

    std::size_t first_finite() const { return lo_; }
    std::size_t last_finite() const { return hi_; }
    double domain_lo() const { return knots_[lo_]; }
    double domain_hi() const { return knots_[hi_]; }

    /// Typical knot spacing of the finite block.
    double spacing() const {
        return (domain_hi() - domain_lo()) / double(std::max<std::size_t>(hi_ - lo_, 1));
    }

    /// Piecewise-linear evaluation; x must land in the finite domain.
    double eval(double x) const {
        const double snap = 1e-12 * (1.0 + std::abs(x));
        if (x < domain_lo() - snap || x > domain_hi() + snap)
            throw OutOfDomain("evaluation outside the finite domain");
        x = std::clamp(x, domain_lo(), domain_hi());
        if (hi_ == lo_) return values_[lo_];
        const std::size_t seg = locate(x);
        const double t = (x - knots_[seg]) / (knots_[seg + 1] - knots_[seg]);
        return (1.0 - t) * values_[seg] + t * values_[seg + 1];
    }

    /// Pointwise convex conjugate: max over finite knots of (x*y - f(x)).
    /// Exact for the piecewise-linear interpolant.
    double conjugate_at(double y) const {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = lo_; i <= hi_; ++i)
            best = std::max(best, knots_[i] * y - values_[i]);
        return best;
    }

    /// Knot interval [argmin..argmax] attaining conjugate_at(y) within tol.
    std::pair<double, double> conjugate_argmax(double y, double tol) const {
        const double best = conjugate_at(y);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = lo_; i <= hi_; ++i) {
            if (knots_[i] * y - values_[i] >= best - tol) {
                lo = std::min(lo, knots_[i]);
                hi = std::max(hi, knots_[i]);
            }
        }
        return {lo, hi};
    }

    /// Slopes of the finite segments bracketing x (left, right); +-inf at
    /// the domain endpoints where the function jumps to +infinity.
    std::pair<double, double> slopes_at(double x) const {
        const double snap = snap_tol();
        if (x < domain_lo() - snap || x > domain_hi() + snap)
            throw OutOfDomain("subgradient outside the finite domain");
        x = std::clamp(x, domain_lo(), domain_hi());
        if (hi_ == lo_)
            return {-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};

        // nearest knot within snapping distance?
        std::size_t seg = locate(x);
        std::optional<std::size_t> at_knot;
        if (std::abs(x - knots_[seg]) <= snap) at_knot = seg;
        else if (std::abs(x - knots_[seg + 1]) <= snap) at_knot = seg + 1;

        const auto seg_slope = [&](std::size_t s) {
            return (values_[s + 1] - values_[s]) / (knots_[s + 1] - knots_[s]);
        };
        if (!at_knot) {
            const double sl = seg_slope(seg);
            return {sl, sl};
        }
        const std::size_t k = *at_knot;
        const double left = (k == lo_) ? -std::numeric_limits<double>::infinity()
                                       : seg_slope(k - 1);
        const double right = (k == hi_) ? std::numeric_limits<double>::infinity()
                                        : seg_slope(k);
        return {left, right};
    }

    double min_slope() const {
        if (hi_ == lo_) return -std::numeric_limits<double>::infinity();
        return (values_[lo_ + 1] - values_[lo_]) / (knots_[lo_ + 1] - knots_[lo_]);
    }
    double max_slope() const {
        if (hi_ == lo_) return std::numeric_limits<double>::infinity();
        return (values_[hi_] - values_[hi_ - 1]) / (knots_[hi_] - knots_[hi_ - 1]);
    }

    double snap_tol() const { return 1e-9 * (1.0 + domain_hi() - domain_lo()); }

private:
    void check_convexity() const {
        if (hi_ == lo_) return;  // single finite knot: an indicator, fine
        double prev = -std::numeric_limits<double>::infinity();
        double scale = 1.0;
        for (std::size_t i = lo_; i < hi_; ++i) {
            const double sl = (values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]);
            scale = std::max(scale, std::abs(sl));
            if (sl < prev - kSlopeTol * scale)
                throw BadInput("tabulated values are not convex");
            prev = sl;
        }
    }

    std::size_t locate(double x) const {
        auto it = std::upper_bound(knots_.begin() + long(lo_),
                                   knots_.begin() + long(hi_) + 1, x);
        std::size_t seg = std::size_t(it - knots_.begin());
        seg = (seg == lo_) ? lo_ : seg - 1;
        return std::min(seg, hi_ - 1);
    }

    std::vector<double> knots_, values_;
    std::vector<char> finite_;
    std::size_t lo_ = 0, hi_ = 0;
};

// ---------------------------------------------------------------------------
// Elementary constructions
// ---------------------------------------------------------------------------

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> x(count);
    for (std::size_t i = 0; i < count; ++i)
        x[i] = lo + (hi - lo) * double(i) / double(count - 1);
    return x;
}

template <typename Fn>
TabulatedConvexFn tabulate(const std::vector<double>& knots, Fn&& fn) {
    std::vector<double> v(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) v[i] = fn(knots[i]);
    return TabulatedConvexFn(knots, std::move(v));
}

// ---------------------------------------------------------------------------
// SubgradientSet: a closed slope interval, possibly unbounded at the domain
// boundary (representational infinities only).
// ---------------------------------------------------------------------------

struct SubgradientSet {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double y, double tol) const { return y >= lo - tol && y <= hi + tol; }
    bool contains(const SubgradientSet& other, double tol) const {
        return other.lo >= lo - tol && other.hi <= hi + tol;
    }
    double distance(double y) const {
        if (y < lo) return lo - y;
        if (y > hi) return y - hi;
        return 0.0;
    }
};

inline SubgradientSet subgradient(const TabulatedConvexFn& f, double x) {
    auto [lo, hi] = f.slopes_at(x);
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Legendre transform onto a prescribed dual knot set. Output values are
// finite (max of finitely many affine maps), hence convex by construction.
// ---------------------------------------------------------------------------

inline TabulatedConvexFn legendre(const TabulatedConvexFn& f,
                                  const std::vector<double>& dual_knots) {
    std::vector<double> v(dual_knots.size());
    for (std::size_t i = 0; i < dual_knots.size(); ++i)
        v[i] = f.conjugate_at(dual_knots[i]);
    return TabulatedConvexFn(dual_knots, std::move(v));
}

/// Natural dual knots: the slope breakpoints of f. Conjugating onto these and
/// back reproduces a piecewise-linear convex f exactly (up to roundoff).
inline std::vector<double> slope_breakpoints(const TabulatedConvexFn& f) {
    std::vector<double> s;
    for (std::size_t i = f.first_finite(); i < f.last_finite(); ++i)
        s.push_back((f.value(i + 1) - f.value(i)) / (f.knot(i + 1) - f.knot(i)));
    s.erase(std::unique(s.begin(), s.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-15; }),
            s.end());
    if (s.size() < 2) {  // a linear piece: pad so the conjugate is tabulable
        const double c = s.empty() ? 0.0 : s[0];
        s = {c - 1.0, c, c + 1.0};
    }
    return s;
}

/// Sup-norm distance between f and its double conjugate over interior knots.
inline double biconjugate_check(const TabulatedConvexFn& f) {
    const auto dual = slope_breakpoints(f);
    const auto fstar = legendre(f, dual);
    double worst = 0.0;
    for (std::size_t i = f.first_finite(); i <= f.last_finite(); ++i)
        worst = std::max(worst,
                         std::abs(fstar.conjugate_at(f.knot(i)) - f.value(i)));
    return worst;
}

/// Young gap f(x) + f*(y) - x*y; nonnegative up to roundoff, zero exactly
/// when y supports f at x.
inline double young_gap(const TabulatedConvexFn& f, double x, double y) {
    return f.eval(x) + f.conjugate_at(y) - x * y;
}

// ---------------------------------------------------------------------------
// Optimizer-set duality: where E = F and where E* = F*, and the subgradient
// containments linking them.
// ---------------------------------------------------------------------------

struct OptimizerDualityReport {
    std::vector<double> primal_optimizers;       // X0
    std::vector<double> dual_optimizers;         // Y0
    bool primal_containment_ok = true;           // dE(x0) subset of dF(x0)
    bool dual_covers_image_ok = true;            // Y0 covers dE(X0)
    bool primal_covers_preimage_ok = true;       // X0 covers dF*(Y0)
    double max_violation = 0.0;
};

inline OptimizerDualityReport optimizer_duality_check(const TabulatedConvexFn& E,
                                                      const TabulatedConvexFn& F) {
    if (E.knots() != F.knots())
        throw DomainMismatch("optimizer check needs shared knots");

    double scale = 1.0;
    for (std::size_t i = E.first_finite(); i <= E.last_finite(); ++i)
        if (F.finite_at(i))
            scale = std::max({scale, std::abs(E.value(i)), std::abs(F.value(i))});
    const double tol = 1e-9 * scale;

    OptimizerDualityReport rep;
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (!E.finite_at(i)) continue;
        if (!F.finite_at(i)) continue;  // E finite, F infinite: E < F there
        const double gap = F.value(i) - E.value(i);
        if (gap < -tol)
            throw NotDominated("E exceeds F at knot " + std::to_string(i));
        if (gap <= tol) rep.primal_optimizers.push_back(E.knot(i));
    }

    // Dual grid: slope breakpoints of both functions plus the midpoints of
    // consecutive breakpoints (subdifferential intervals at a knot attain
    // their Young-equality representative in the middle of a breakpoint gap).
    std::vector<double> dual = slope_breakpoints(E);
    for (double s : slope_breakpoints(F)) dual.push_back(s);
    std::sort(dual.begin(), dual.end());
    dual.erase(std::unique(dual.begin(), dual.end()), dual.end());
    if (dual.size() < 2) dual = {dual.empty() ? -1.0 : dual[0] - 1.0, 1.0};
    const std::size_t breakpoint_count = dual.size();
    for (std::size_t i = 0; i + 1 < breakpoint_count; ++i)
        dual.push_back(0.5 * (dual[i] + dual[i + 1]));
    std::sort(dual.begin(), dual.end());
    dual.erase(std::unique(dual.begin(), dual.end()), dual.end());

    const auto Estar = legendre(E, dual);
    const auto Fstar = legendre(F, dual);
    double dual_cell = 0.0;
    for (std::size_t i = 1; i < dual.size(); ++i)
        dual_cell = std::max(dual_cell, dual[i] - dual[i - 1]);

    double dual_scale = 1.0;
    for (std::size_t i = 0; i < dual.size(); ++i)
        dual_scale = std::max({dual_scale, std::abs(Estar.value(i)), std::abs(Fstar.value(i))});
    const double dual_tol = 1e-9 * dual_scale;
    for (std::size_t i = 0; i < dual.size(); ++i) {
        if (Estar.value(i) - Fstar.value(i) <= dual_tol)
            rep.dual_optimizers.push_back(dual[i]);
    }

    const double cell = E.spacing();
    auto near_any = [](const std::vector<double>& set, double x, double tol) {
        for (double s : set)
            if (std::abs(s - x) <= tol) return true;
        return false;
    };

    for (double x0 : rep.primal_optimizers) {
        const auto dE = subgradient(E, x0);
        const auto dF = subgradient(F, x0);
        if (!dF.contains(dE, TabulatedConvexFn::kSlopeTol * (1.0 + std::abs(dE.hi)))) {
            rep.primal_containment_ok = false;
            rep.max_violation = std::max(
                rep.max_violation,
                std::max(dF.lo - dE.lo, dE.hi - dF.hi));
        }
        // Y0 must cover the (finite) endpoints of dE(x0) up to a dual cell.
        for (double y : {dE.lo, dE.hi}) {
            if (!std::isfinite(y)) continue;
            if (!near_any(rep.dual_optimizers, y, dual_cell + 1e-9))
                rep.dual_covers_image_ok = false;
        }
    }

    for (double y0 : rep.dual_optimizers) {
        const auto dFstar = subgradient(Fstar, y0);
        for (double x : {dFstar.lo, dFstar.hi}) {
            if (!std::isfinite(x)) continue;
            if (!near_any(rep.primal_optimizers, x, cell + 1e-9))
                rep.primal_covers_preimage_ok = false;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Deficit comparison through a subgradient point: with y supporting F at x,
// the dual deficit dominates the primal one, and symmetrically.
// ---------------------------------------------------------------------------

struct DeficitGaps {
    double dual_minus_primal = 0.0;  // (E*(y) - F*(y)) - (F(x) - E(x))
    double primal_minus_dual = 0.0;  // (F(x) - E(x)) - (E*(y) - F*(y))
    bool first_precondition_ok = false;   // y in dF(x)
    bool second_precondition_ok = false;  // x in dE*(y)
    double subgradient_distance_F = 0.0;
    double preimage_distance_E = 0.0;
};

inline DeficitGaps deficit_duality_gaps(const TabulatedConvexFn& E,
                                        const TabulatedConvexFn& F, double x,
                                        double y) {
    DeficitGaps out;
    const double primal = F.eval(x) - E.eval(x);
    const double dual = E.conjugate_at(y) - F.conjugate_at(y);
    out.dual_minus_primal = dual - primal;
    out.primal_minus_dual = primal - dual;

    const auto dF = subgradient(F, x);
    out.subgradient_distance_F = dF.distance(y);
    const double slope_tol =
        TabulatedConvexFn::kSlopeTol * (1.0 + std::abs(y)) + F.spacing() * 1e-6;
    out.first_precondition_ok = out.subgradient_distance_F <= slope_tol;

    // x in dE*(y) iff x is within a knot cell of the argmax of x*y - E(x).
    const auto [alo, ahi] = E.conjugate_argmax(y, 1e-9 * (1.0 + std::abs(dual)));
    out.preimage_distance_E =
        (x < alo) ? alo - x : (x > ahi ? x - ahi : 0.0);
    out.second_precondition_ok = out.preimage_distance_E <= E.spacing() + 1e-12;

    if (!out.first_precondition_ok && !out.second_precondition_ok) {
        std::ostringstream msg;
        msg << "neither subgradient precondition holds (dist to dF(x) = "
            << out.subgradient_distance_F << ", dist to dE*(y) preimage = "
            << out.preimage_distance_E << ")";
        throw PreconditionViolated(msg.str());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Strengthened deficit comparison under quadratic convexity. The remainder
// can be charged in either variable; which one applies depends on which side
// carries the convexity modulus, so both candidates are exposed and the
// caller asserts the one matching its hypothesis.
// ---------------------------------------------------------------------------

struct StrengthenedRemainders {
    double gap = 0.0;             // (E*(y) - F*(y)) - (F(x) - E(x))
    double dual_candidate = 0.0;  // lambda_dual * (y - slope_E(x))^2
    double primal_candidate = 0.0;  // lambda_primal * (x - argmax_E(y))^2
};

/// For y in dF(x): the dual-deficit surplus dominates a quadratic remainder.
/// lambda_dual is the convexity modulus hypothesized for the conjugate of E,
/// lambda_primal the one for E itself.
inline StrengthenedRemainders strengthened_deficit_remainders(
    const TabulatedConvexFn& E, const TabulatedConvexFn& F, double x, double y,
    double lambda_dual, double lambda_primal) {
    StrengthenedRemainders out;
    out.gap = (E.conjugate_at(y) - F.conjugate_at(y)) - (F.eval(x) - E.eval(x));
    const auto sE = subgradient(E, x);
    const double grad_e = 0.5 * (std::max(sE.lo, E.min_slope()) +
                                 std::min(sE.hi, E.max_slope()));
    out.dual_candidate = lambda_dual * (y - grad_e) * (y - grad_e);
    const auto [alo, ahi] = E.conjugate_argmax(y, 1e-12 * (1.0 + std::abs(y)));
    const double preimage = 0.5 * (alo + ahi);
    out.primal_candidate = lambda_primal * (x - preimage) * (x - preimage);
    return out;
}

// ---------------------------------------------------------------------------
// RateFn: convex, zero at zero, nonnegative on [0, T]. Strict slope growth is
// required by default; the infimal convolution below may legitimately produce
// a linear branch, so it builds with require_strict = false.
// ---------------------------------------------------------------------------

class RateFn {
public:
    RateFn(std::vector<double> knots, std::vector<double> values,
           bool require_strict = true)
        : fn_(std::move(knots), std::move(values)) {
        if (fn_.first_finite() != 0 || fn_.last_finite() + 1 != fn_.size())
            throw BadInput("rate function must be finite on all knots");
        if (fn_.knot(0) != 0.0) throw BadInput("rate function domain starts at 0");
        if (std::abs(fn_.value(0)) > 1e-14) throw BadInput("rate function needs f(0) = 0");
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < fn_.size(); ++i) {
            const double sl =
                (fn_.value(i + 1) - fn_.value(i)) / (fn_.knot(i + 1) - fn_.knot(i));
            const double tol = 1e-12 * (1.0 + std::abs(sl));
            if (require_strict ? (sl <= prev + tol) : (sl < prev - tol))
                throw BadInput("rate function slopes must increase");
            prev = sl;
        }
        for (std::size_t i = 0; i < fn_.size(); ++i)
            if (fn_.value(i) < -1e-14)
                throw BadInput("rate function must be nonnegative");
    }

    const TabulatedConvexFn& fn() const { return fn_; }
    double eval(double t) const { return fn_.eval(t); }
    double horizon() const { return fn_.domain_hi(); }
    const std::vector<double>& knots() const { return fn_.knots(); }

private:
    TabulatedConvexFn fn_;
};

/// Rate function below both inputs: integrate the pointwise minimum of the
/// two slope sequences over the merged knot set.
inline RateFn rate_min(const RateFn& a, const RateFn& b) {
    if (std::abs(a.horizon() - b.horizon()) > 1e-12)
        throw DomainMismatch("rate functions live on different horizons");
    std::vector<double> knots = a.knots();
    knots.insert(knots.end(), b.knots().begin(), b.knots().end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                knots.end());

    auto slope_on = [](const RateFn& f, double mid) {
        const auto s = subgradient(f.fn(), mid);
        return 0.5 * (s.lo + s.hi);
    };
    std::vector<double> values(knots.size(), 0.0);
    KahanSum acc;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const double mid = 0.5 * (knots[i - 1] + knots[i]);
        const double sl = std::min(slope_on(a, mid), slope_on(b, mid));
        acc.add(sl * (knots[i] - knots[i - 1]));
        values[i] = acc.value();
    }
    return RateFn(std::move(knots), std::move(values));
}

// ---------------------------------------------------------------------------
// Psi = Phi(t)/t, extended by the right slope at zero, and its infimal
// convolution with chi(s) = s on s >= 0.
// ---------------------------------------------------------------------------

struct MonotoneTable {
    std::vector<double> knots;
    std::vector<double> values;
};

inline MonotoneTable psi_from_phi(const RateFn& phi) {
    MonotoneTable out;
    out.knots = phi.knots();
    out.values.resize(out.knots.size());
    for (std::size_t i = 0; i < out.knots.size(); ++i) {
        if (out.knots[i] == 0.0) {
            out.values[i] = subgradient(phi.fn(), 0.0).hi;  // limit of Phi(t)/t
        } else {
            out.values[i] = phi.eval(out.knots[i]) / out.knots[i];
        }
    }
    return out;
}

/// hat(Psi)(t) = inf over s in [0, t] of { Psi(t - s) + s }, evaluated by a
/// linear scan: t + running min of (Psi(u) - u).
inline RateFn inf_convolution_hat(const MonotoneTable& psi) {
    if (psi.knots.empty() || psi.knots[0] != 0.0)
        throw BadInput("psi table must start at t = 0");
    if (std::abs(psi.values[0]) > 1e-14) throw BadInput("psi(0) must be 0");
    std::vector<double> values(psi.knots.size());
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < psi.knots.size(); ++i) {
        running = std::min(running, psi.values[i] - psi.knots[i]);
        values[i] = psi.knots[i] + running;
    }
    return RateFn(psi.knots, std::move(values), /*require_strict=*/false);
}

// ---------------------------------------------------------------------------
// CSV: two columns (knot, value), "inf" marks +infinity.
// ---------------------------------------------------------------------------

inline void write_csv(const TabulatedConvexFn& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << "knot,value\n";
    char buf[80];
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.finite_at(i))
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", f.knot(i), f.value(i));
        else
            std::snprintf(buf, sizeof(buf), "%.17g,inf\n", f.knot(i));
        out << buf;
    }
}

inline TabulatedConvexFn read_convex_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> knots, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigParse("bad csv row: " + line);
        knots.push_back(std::stod(line.substr(0, comma)));
        const std::string v = line.substr(comma + 1);
        values.push_back(v == "inf" ? std::numeric_limits<double>::infinity()
                                    : std::stod(v));
    }
    return TabulatedConvexFn(std::move(knots), std::move(values));
}

}  // namespace ineqlab
