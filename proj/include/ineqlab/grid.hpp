#pragma once

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <vector>

#include "ineqlab/core.hpp"
#include "ineqlab/fft.hpp"

namespace ineqlab {

// ---------------------------------------------------------------------------
// GridSpec: uniform periodic box [-L, L)^dim with N points per side.
// ---------------------------------------------------------------------------

struct GridSpec {
    unsigned dim = 1;
    double half_width = 1.0;     // L
    unsigned points_per_side = 8;  // N, power of two

    GridSpec() = default;
    GridSpec(unsigned dim_, double half_width_, unsigned n)
        : dim(dim_), half_width(half_width_), points_per_side(n) {
        if (dim < 1 || dim > 3) throw BadInput("grid dimension must be 1..3");
        if (!(half_width > 0.0)) throw BadInput("half_width must be positive");
        if (points_per_side < 8 || !fft::is_pow2(points_per_side))
            throw BadInput("points_per_side must be a power of two >= 8");
    }

    double spacing() const { return 2.0 * half_width / double(points_per_side); }
    double cell_volume() const { return std::pow(spacing(), double(dim)); }
    std::size_t total_points() const {
        std::size_t t = 1;
        for (unsigned d = 0; d < dim; ++d) t *= points_per_side;
        return t;
    }
    /// Frequency lattice step pi/L.
    double freq_step() const { return M_PI / half_width; }

    double coord(std::size_t i) const { return -half_width + double(i) * spacing(); }

    bool operator==(const GridSpec& o) const {
        return dim == o.dim && half_width == o.half_width &&
               points_per_side == o.points_per_side;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

// ---------------------------------------------------------------------------
// GridFunction: complex samples on a GridSpec, row-major over dim indices.
// Treated as immutable by every public operation; operations return copies.
// ---------------------------------------------------------------------------

class GridFunction {
public:
    GridFunction(GridSpec spec, std::vector<complexd> values)
        : spec_(spec), values_(std::move(values)) {
        if (values_.size() != spec_.total_points())
            throw SpecMismatch("value count does not match grid");
    }

    static GridFunction zeros(const GridSpec& spec) {
        return GridFunction(spec, std::vector<complexd>(spec.total_points()));
    }

    /// Sample a pointwise map x -> f(x); Point carries dim coordinates.
    template <typename Fn>
    static GridFunction sample(const GridSpec& spec, Fn&& fn) {
        std::vector<complexd> v(spec.total_points());
        std::array<double, 3> x{0, 0, 0};
        const unsigned n = spec.points_per_side;
        std::array<std::size_t, 3> idx{0, 0, 0};
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::size_t rem = i;
            for (unsigned d = spec.dim; d-- > 0;) {
                idx[d] = rem % n;
                rem /= n;
            }
            for (unsigned d = 0; d < spec.dim; ++d) x[d] = spec.coord(idx[d]);
            v[i] = fn(std::span<const double>(x.data(), spec.dim));
        }
        return GridFunction(spec, std::move(v));
    }

    const GridSpec& spec() const { return spec_; }
    std::span<const complexd> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    const complexd& operator[](std::size_t i) const { return values_[i]; }

    bool finite() const {
        for (const auto& v : values_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    void require_finite(const char* who) const {
        if (!finite()) throw NonFinite(who);
    }

    /// Internal mutable access for constructing results.
    std::vector<complexd>& mutable_values() { return values_; }

private:
    GridSpec spec_;
    std::vector<complexd> values_;
};

// ---------------------------------------------------------------------------
// Algebra on matching grids
// ---------------------------------------------------------------------------

inline void require_same_spec(const GridFunction& a, const GridFunction& b) {
    if (a.spec() != b.spec()) throw SpecMismatch("grid functions live on different grids");
}

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    require_same_spec(a, b);
    std::vector<complexd> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
    return GridFunction(a.spec(), std::move(v));
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    require_same_spec(a, b);
    std::vector<complexd> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
    return GridFunction(a.spec(), std::move(v));
}

inline GridFunction operator*(complexd c, const GridFunction& a) {
    std::vector<complexd> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * a[i];
    return GridFunction(a.spec(), std::move(v));
}

// ---------------------------------------------------------------------------
// Quadrature norms and the real bilinear pairing <f,g> = 2 Re h^n sum f* g
// ---------------------------------------------------------------------------

inline double lp_norm(const GridFunction& f, double p) {
    f.require_finite("lp_norm");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : f.values()) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw BadExponent("lp_norm requires p >= 1");
    KahanSum s;
    if (p == 2.0) {
        for (const auto& v : f.values()) s.add(std::norm(v));
    } else {
        for (const auto& v : f.values()) s.add(std::pow(std::abs(v), p));
    }
    return std::pow(f.spec().cell_volume() * s.value(), 1.0 / p);
}

inline double pairing(const GridFunction& f, const GridFunction& g) {
    require_same_spec(f, g);
    KahanSum s;
    const auto fv = f.values();
    const auto gv = g.values();
    for (std::size_t i = 0; i < fv.size(); ++i)
        s.add(fv[i].real() * gv[i].real() + fv[i].imag() * gv[i].imag());
    return 2.0 * f.spec().cell_volume() * s.value();
}

// ---------------------------------------------------------------------------
// FreqMultiplier: the radial symbol |xi|^s on the discrete frequency lattice
// xi = (pi/L) * k, k in [-N/2, N/2)^dim. The zero mode is the only point
// where |xi|^s is singular for s < 0; the policy decides its weight.
// ---------------------------------------------------------------------------

enum class ZeroModePolicy { CellAverage, SetZero };

/// Composite 5-point Gauss-Legendre over [lo, hi] split into `panels` pieces.
template <typename Fn>
double gauss_panels(double lo, double hi, unsigned panels, Fn&& fn) {
    static const std::array<double, 5> nodes = {
        -0.9061798459386640, -0.5384693101056831, 0.0,
        0.5384693101056831, 0.9061798459386640};
    static const std::array<double, 5> wts = {
        0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
        0.4786286704993665, 0.2369268850561891};
    const double w = (hi - lo) / double(panels);
    KahanSum acc;
    for (unsigned p = 0; p < panels; ++p) {
        const double c = lo + (double(p) + 0.5) * w;
        for (int k = 0; k < 5; ++k)
            acc.add(wts[k] * fn(c + 0.5 * w * nodes[k]));
    }
    return 0.5 * w * acc.value();
}

struct FreqMultiplier {
    GridSpec spec;
    double exponent = 0.0;  // applied as |xi|^exponent
    ZeroModePolicy zero_mode_policy = ZeroModePolicy::SetZero;

    FreqMultiplier(GridSpec spec_, double s, ZeroModePolicy policy)
        : spec(spec_), exponent(s), zero_mode_policy(policy) {
        if (policy == ZeroModePolicy::CellAverage && exponent < 0.0 &&
            exponent <= -double(spec.dim))
            throw BadExponent("cell-average zero mode needs s > -dim");
    }

    double zero_mode_weight() const {
        if (exponent == 0.0) return 1.0;
        if (exponent > 0.0) return 0.0;
        if (zero_mode_policy == ZeroModePolicy::SetZero) return 0.0;
        return cell_average_weight();
    }

    /// Average of |xi|^s over the fundamental cell [-dxi/2, dxi/2)^dim.
    /// The radial part of the integral is done in closed form, so the
    /// singularity at the origin never gets sampled; the remaining angular
    /// (dim 2) or face (dim 3) factor is smooth and handled by composite
    /// 5-point Gauss panels.
    double cell_average_weight() const {
        const double s = exponent;
        const double a = spec.freq_step() / 2.0;  // half cell side
        const unsigned dim = spec.dim;
        if (dim == 1) {
            // (1/2a) * 2 * a^(s+1)/(s+1)
            return std::pow(a, s) / (s + 1.0);
        }
        if (dim == 2) {
            // integral over the cell = (1/(s+2)) * 8 * int_0^{pi/4} (a/cos t)^{s+2} dt
            const double integral =
                8.0 / (s + 2.0) *
                gauss_panels(0.0, M_PI / 4.0, 16, [&](double t) {
                    return std::pow(a / std::cos(t), s + 2.0);
                });
            return integral / (4.0 * a * a);
        }
        // dim == 3: integral over the cell
        //   = (1/(s+3)) * 6a * int_{[-a,a]^2} (x^2 + y^2 + a^2)^{s/2} dx dy,
        // the face form of the spherical decomposition with R = a / max|u_i|.
        const double inner = gauss_panels(-a, a, 16, [&](double x) {
            return gauss_panels(-a, a, 16, [&](double y) {
                return std::pow(x * x + y * y + a * a, s / 2.0);
            });
        });
        const double integral = 6.0 * a * inner / (s + 3.0);
        return integral / (8.0 * a * a * a);
    }

    /// Weight at mode index (row-major flat index over [0,N)^dim).
    double weight_at(std::size_t flat) const {
        const unsigned n = spec.points_per_side;
        const double dxi = spec.freq_step();
        double r2 = 0.0;
        std::size_t rem = flat;
        for (unsigned d = spec.dim; d-- > 0;) {
            const long k = long(rem % n);
            rem /= n;
            const long ks = k < long(n / 2) ? k : k - long(n);
            const double xi = dxi * double(ks);
            r2 += xi * xi;
        }
        if (r2 == 0.0) return zero_mode_weight();
        return std::pow(r2, exponent / 2.0);
    }
};

// ---------------------------------------------------------------------------
// Spectral operators
// ---------------------------------------------------------------------------

/// (-Delta)^(s/2) as the multiplier |xi|^s.
inline GridFunction frac_laplacian(const GridFunction& f, double s,
                                   ZeroModePolicy policy = ZeroModePolicy::SetZero) {
    f.require_finite("frac_laplacian");
    const FreqMultiplier mult(f.spec(), s, policy);
    std::vector<complexd> a(f.values().begin(), f.values().end());
    fft::transform_nd(a, f.spec().dim, f.spec().points_per_side, false);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= mult.weight_at(i);
    fft::transform_nd(a, f.spec().dim, f.spec().points_per_side, true);
    return GridFunction(f.spec(), std::move(a));
}

/// Frequency-side evaluation of || |xi|^s f^ ||_2^2 (one forward transform).
/// Equals lp_norm(frac_laplacian(f, s, policy), 2)^2 by Plancherel.
inline double spectral_quadratic_form(const GridFunction& f, double s,
                                      ZeroModePolicy policy = ZeroModePolicy::SetZero) {
    f.require_finite("spectral_quadratic_form");
    const FreqMultiplier mult(f.spec(), s, policy);
    std::vector<complexd> a(f.values().begin(), f.values().end());
    const auto& spec = f.spec();
    fft::transform_nd(a, spec.dim, spec.points_per_side, false);
    // f^(xi_k) = h^n * phase * DFT_k, and sum_k |f^|^2 / (2L)^n = ||f||_2^2.
    const double hn = spec.cell_volume();
    const double box = std::pow(2.0 * spec.half_width, double(spec.dim));
    KahanSum sum;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = mult.weight_at(i);
        sum.add(w * w * std::norm(a[i]));
    }
    return hn * hn / box * sum.value();
}

/// Spectral zero-padding / truncation onto a grid with the same box size.
inline GridFunction resample(const GridFunction& f, const GridSpec& target) {
    if (target.dim != f.spec().dim || target.half_width != f.spec().half_width)
        throw SpecMismatch("resample requires the same box");
    const unsigned ns = f.spec().points_per_side;
    const unsigned nt = target.points_per_side;
    if (ns == nt) return f;

    const unsigned dim = f.spec().dim;
    std::vector<complexd> src(f.values().begin(), f.values().end());
    fft::transform_nd(src, dim, ns, false);

    std::vector<complexd> dst(target.total_points(), complexd{0.0, 0.0});
    const unsigned keep = std::min(ns, nt);  // shared band [-keep/2, keep/2)
    std::array<long, 3> k{0, 0, 0};
    std::size_t count = 1;
    for (unsigned d = 0; d < dim; ++d) count *= keep;
    const double amp = double(nt) / double(ns);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t rem = i;
        std::size_t si = 0, di = 0;
        for (unsigned d = dim; d-- > 0;) {
            k[d] = long(rem % keep) - long(keep / 2);
            rem /= keep;
        }
        for (unsigned d = 0; d < dim; ++d) {
            const std::size_t sk = std::size_t((k[d] + long(ns)) % long(ns));
            const std::size_t dk = std::size_t((k[d] + long(nt)) % long(nt));
            si = si * ns + sk;
            di = di * nt + dk;
        }
        dst[di] = amp * src[si];
    }
    fft::transform_nd(dst, dim, nt, true);
    return GridFunction(target, std::move(dst));
}

inline GridFunction mean_removed(const GridFunction& f) {
    complexd mean{0.0, 0.0};
    for (const auto& v : f.values()) mean += v;
    mean /= double(f.size());
    std::vector<complexd> v(f.values().begin(), f.values().end());
    for (auto& x : v) x -= mean;
    return GridFunction(f.spec(), std::move(v));
}

// ---------------------------------------------------------------------------
// Serialization: binary header (dim u32, N u32, L f64) + little-endian
// (re, im) f64 pairs; CSV export (index tuple, re, im).
// ---------------------------------------------------------------------------

inline void write_binary(const GridFunction& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path);
    const std::uint32_t dim = f.spec().dim;
    const std::uint32_t n = f.spec().points_per_side;
    const double L = f.spec().half_width;
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&L), 8);
    for (const auto& v : f.values()) {
        const double re = v.real(), im = v.imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!out) throw IoError("write failed: " + path);
}

inline GridFunction read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::uint32_t dim = 0, n = 0;
    double L = 0.0;
    in.read(reinterpret_cast<char*>(&dim), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&L), 8);
    if (!in) throw IoError("truncated header: " + path);
    GridSpec spec(dim, L, n);
    std::vector<complexd> v(spec.total_points());
    for (auto& x : v) {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        x = {re, im};
    }
    if (!in) throw IoError("truncated payload: " + path);
    return GridFunction(spec, std::move(v));
}

inline void write_csv(const GridFunction& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    const unsigned dim = f.spec().dim;
    const unsigned n = f.spec().points_per_side;
    for (unsigned d = 0; d < dim; ++d) out << "i" << d << ",";
    out << "re,im\n";
    char buf[64];
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::size_t rem = i;
        for (unsigned d = dim; d-- > 0;) {
            idx[d] = rem % n;
            rem /= n;
        }
        for (unsigned d = 0; d < dim; ++d) out << idx[d] << ",";
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", f[i].real(), f[i].imag());
        out << buf;
    }
}

}  // namespace ineqlab
