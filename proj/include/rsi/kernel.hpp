#pragma once

#include <algorithm>
#include <complex>
#include <numeric>
#include <vector>

#include "rsi/common.hpp"

namespace rsi {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLog2 = 0.69314718055994530942;

// ---------------------------------------------------------------------------
// SphereKernel: a mean-zero angular profile on S^{n-1}, n in {1,2}.
//
// n=1: exactly two samples, Omega(+1) and Omega(-1).
// n=2: N equispaced samples at theta_i = 2*pi*i/N with nearest-sample
//      lookup. No interpolation: the profile is genuinely rough and the
//      sup norm is exactly the largest |sample|.
// ---------------------------------------------------------------------------

struct SphereKernel {
    int dim = 1;
    std::vector<double> samples;
    double sup_norm = 0.0;

    std::size_t sample_count() const { return samples.size(); }

    /// Value at the direction of a nonzero point (nearest sample / sign).
    double angular(Vec x) const {
        if (dim == 1) return x.x >= 0.0 ? samples[0] : samples[1];
        const std::size_t n = samples.size();
        const double dtheta = 2.0 * kPi / static_cast<double>(n);
        const double theta = std::atan2(x.y, x.x);
        std::int64_t i = static_cast<std::int64_t>(std::llround(theta / dtheta));
        i %= static_cast<std::int64_t>(n);
        if (i < 0) i += static_cast<std::int64_t>(n);
        return samples[static_cast<std::size_t>(i)];
    }

    double angle_of(std::size_t i) const { return 2.0 * kPi * static_cast<double>(i) / static_cast<double>(samples.size()); }
};

inline double uniform_mean(const std::vector<double>& s) {
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

inline SphereKernel make_sphere_kernel(int dim, std::vector<double> samples) {
    if (samples.empty()) throw invalid_input_error("SphereKernel: empty sample list");
    if (dim == 1) {
        if (samples.size() != 2) throw invalid_input_error("SphereKernel: n=1 takes exactly two samples");
    } else if (dim == 2) {
        if (samples.size() < 8 || !is_pow2(static_cast<std::int64_t>(samples.size())))
            throw invalid_input_error("SphereKernel: n=2 needs N >= 8 samples, N a power of two");
    } else {
        throw invalid_input_error("SphereKernel: dimension must be 1 or 2");
    }
    SphereKernel k;
    k.dim = dim;
    k.samples = std::move(samples);
    for (double v : k.samples) k.sup_norm = std::max(k.sup_norm, std::abs(v));
    const double mean = uniform_mean(k.samples);
    if (std::abs(mean) > 1e-12 * std::max(k.sup_norm, 1e-300))
        throw invalid_input_error("SphereKernel: samples are not mean-zero");
    return k;
}

/// Subtract the uniform mean and build the kernel.
inline SphereKernel project_zero_mean(std::vector<double> raw, int dim) {
    if (raw.empty()) throw invalid_input_error("project_zero_mean: empty sample list");
    const double mean = uniform_mean(raw);
    for (double& v : raw) v -= mean;
    return make_sphere_kernel(dim, std::move(raw));
}

/// K(x) = Omega(x/|x|) / |x|^n.
inline double kernel_value(const SphereKernel& omega, Vec x) {
    const double r2 = x.norm2();
    if (r2 == 0.0) throw singularity_error("kernel_value: x = 0");
    const double a = omega.angular(x);
    return omega.dim == 1 ? a / std::sqrt(r2) : a / r2;
}

// ------------------------------- presets ----------------------------------

inline SphereKernel make_preset(const std::string& name, int dim, std::size_t n2_samples = 64, std::uint64_t seed = 0) {
    if (dim == 1) {
        if (name == "random-rademacher") {
            SplitMix64 rng(seed);
            const double s = (rng.next() & 1) ? 1.0 : -1.0;
            return make_sphere_kernel(1, {s, -s});
        }
        if (name == "hilbert" || name == "cos" || name == "sign-bands") return make_sphere_kernel(1, {1.0, -1.0});
        throw invalid_input_error("make_preset: unknown preset '" + name + "'");
    }
    const std::size_t n = n2_samples;
    std::vector<double> s(n);
    auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
    if (name == "hilbert") {
        for (std::size_t i = 0; i < n; ++i) s[i] = sgn(std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    } else if (name == "cos") {
        for (std::size_t i = 0; i < n; ++i) s[i] = std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    } else if (name == "sign-bands") {
        for (std::size_t i = 0; i < n; ++i) s[i] = sgn(std::sin(8.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    } else if (name == "random-rademacher") {
        for (std::size_t i = 0; i < n; ++i) s[i] = i < n / 2 ? 1.0 : -1.0;
        SplitMix64 rng(seed);
        for (std::size_t i = n - 1; i > 0; --i) std::swap(s[i], s[rng.below(i + 1)]);
        return make_sphere_kernel(2, std::move(s));
    } else {
        throw invalid_input_error("make_preset: unknown preset '" + name + "'");
    }
    return project_zero_mean(std::move(s), 2);
}

// ---------------------------------------------------------------------------
// Radial cutoff psi(t) = h(t) - h(2t) with a fixed smooth transition h equal
// to 1 on (0,1] and 0 on [2,inf). supp psi is [1/2,2] and the dilates
// psi(2^-j t) telescope to a partition of unity on (0,inf).
// ---------------------------------------------------------------------------

inline double bump_glue(double s) { return s <= 0.0 ? 0.0 : std::exp(-1.0 / s); }

inline double smooth_transition(double t) {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    const double a = bump_glue(2.0 - t);
    const double b = bump_glue(t - 1.0);
    return a / (a + b);
}

inline double radial_cutoff(double t) { return smooth_transition(t) - smooth_transition(2.0 * t); }

/// K_j(x) = psi(2^-j |x|) K(x); zero outside 2^{j-1} <= |x| <= 2^{j+1}.
inline double annular_piece_value(const SphereKernel& omega, int j, Vec x) {
    const double r = x.norm();
    if (r == 0.0) throw singularity_error("annular_piece_value: x = 0");
    const double t = std::ldexp(r, -j);
    if (t <= 0.5 || t >= 2.0) return 0.0;
    return radial_cutoff(t) * kernel_value(omega, x);
}

// ---------------------------------------------------------------------------
// Mollifier. Any C^inf bump supported in the open unit ball with unit mass
// is admissible; the frozen default is an off-center bump
//   phi(x) = c * exp(-1 / (1 - |x - x0|^2 / r0^2)),  x0 = (0.4, 0), r0 = 0.5.
// The off-center choice makes the angular smoothing error of a smooth
// profile first order in epsilon, so the eps-decay experiments see a clean
// power law; a centered bump cancels the first moment and is also provided.
// ---------------------------------------------------------------------------

struct BumpProfile {
    Vec center{0.4, 0.0};
    double radius = 0.5;

    double unnormalized(Vec x, int dim) const {
        const double dx = x.x - center.x;
        const double dy = dim == 2 ? x.y - center.y : 0.0;
        const double q = (dx * dx + dy * dy) / (radius * radius);
        if (q >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - q));
    }

    static BumpProfile offset() { return BumpProfile{}; }
    static BumpProfile centered() { return BumpProfile{{0.0, 0.0}, 1.0}; }
};

inline double bump_normalization(const BumpProfile& b, int dim, int res = 1024) {
    double s = 0.0;
    if (dim == 1) {
        const double a = b.center.x - b.radius, w = 2.0 * b.radius;
        const double dh = w / static_cast<double>(res * 16);
        for (int i = 0; i < res * 16; ++i) s += b.unnormalized({a + (i + 0.5) * dh, 0.0}, 1) * dh;
    } else {
        const double ax = b.center.x - b.radius, ay = b.center.y - b.radius, w = 2.0 * b.radius;
        const double dh = w / static_cast<double>(res);
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j) s += b.unnormalized({ax + (i + 0.5) * dh, ay + (j + 0.5) * dh}, 2) * dh * dh;
    }
    return 1.0 / s;
}

struct MollifierSpec {
    double epsilon;
    BumpProfile profile;
    double norm_const_1d;
    double norm_const_2d;

    explicit MollifierSpec(double eps, BumpProfile prof = BumpProfile::offset())
        : epsilon(eps), profile(prof), norm_const_1d(bump_normalization(prof, 1)), norm_const_2d(bump_normalization(prof, 2)) {
        if (!(eps > 0.0) || eps >= 1.0) throw parameter_error("MollifierSpec: need 0 < epsilon < 1");
    }

    /// phi(x) on the unit scale, with int phi = 1.
    double phi(Vec x, int dim) const { return (dim == 1 ? norm_const_1d : norm_const_2d) * profile.unnormalized(x, dim); }
    /// phi_eps(x) = eps^-n phi(x/eps).
    double phi_eps(Vec x, int dim) const {
        const double s = 1.0 / epsilon;
        const double scale = dim == 1 ? s : s * s;
        return scale * phi({x.x * s, x.y * s}, dim);
    }
};

struct MollifierQuadrature {
    int outer = 1 << 12;   // n=1 radial points
    int inner = 1 << 12;   // n=1 convolution points
    int radial = 192;      // n=2 along-ray points
    int transverse = 48;   // n=2 across-ray points
    int chord = 24;        // n=2 points per mollifier chord

    MollifierQuadrature refined(int factor) const {
        MollifierQuadrature q = *this;
        q.outer *= factor;
        q.inner *= factor;
        q.radial *= factor;
        q.transverse *= factor;
        q.chord *= factor;
        return q;
    }
};

/// Omega_0(x) = K(x) on the annulus 1 <= |x| <= 2, zero elsewhere.
inline double omega0_value(const SphereKernel& omega, Vec x) {
    const double r = x.norm();
    if (r < 1.0 || r > 2.0) return 0.0;
    return kernel_value(omega, x);
}

namespace detail {

// n=1 evaluation of Omega_eps(theta) = (1/log2) int (Omega_0 * phi_eps)(t theta) dt.
// The convolution is integrated in the kernel variable w = u - z so that the
// annulus boundaries (where Omega_0 jumps) are fixed interval endpoints;
// midpoint quadrature then sees only smooth integrands.
inline double mollified_omega_1d(const SphereKernel& omega, const MollifierSpec& m, double theta_sign,
                                 const MollifierQuadrature& quad) {
    const double eps = m.epsilon;
    const double z0 = eps * (m.profile.center.x - m.profile.radius);
    const double z1 = eps * (m.profile.center.x + m.profile.radius);

    auto convolution = [&](double u) {
        const double w0 = u - z1, w1 = u - z0;
        double conv = 0.0;
        for (int piece = 0; piece < 2; ++piece) {
            const double a = std::max(w0, piece == 0 ? 1.0 : -2.0);
            const double b = std::min(w1, piece == 0 ? 2.0 : -1.0);
            if (b <= a) continue;
            const int n = std::max(16, static_cast<int>(std::lround(quad.inner * (b - a) / (w1 - w0))));
            const double dw = (b - a) / static_cast<double>(n);
            for (int i = 0; i < n; ++i) {
                const double w = a + (i + 0.5) * dw;
                const double om = w >= 0.0 ? omega.samples[0] : omega.samples[1];
                conv += om / std::abs(w) * m.phi_eps({u - w, 0.0}, 1) * dw;
            }
        }
        return conv;
    };

    const double t0 = std::max(0.0, 1.0 - eps);
    const double t1 = 2.0 + eps;
    const int mo = quad.outer;
    const double dt = (t1 - t0) / static_cast<double>(mo);
    double acc = 0.0;
    for (int a = 0; a < mo; ++a) {
        const double t = t0 + (a + 0.5) * dt;
        acc += convolution(t * theta_sign) * dt;
    }
    return acc / kLog2;
}

// n=2 evaluation via the mollifier-chord form: with u = s e_theta + d e_perp,
//   Omega_eps(theta) = (1/log2) int int Omega_0(u) G(u) ds dd,
//   G(u) = int_0^inf phi_eps(t e_theta - u) t dt,
// and G is a short integral over the chord where the ray meets the shifted
// mollifier ball of radius eps*r0 centered at u + eps*x0.
inline double mollified_omega_2d(const SphereKernel& omega, const MollifierSpec& m, double theta,
                                 const MollifierQuadrature& quad) {
    const double eps = m.epsilon;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double bpar = eps * (m.profile.center.x * ct + m.profile.center.y * st);
    const double bperp = eps * (-m.profile.center.x * st + m.profile.center.y * ct);
    const double rho = eps * m.profile.radius;

    const double s0 = std::max(0.0, 1.0 - eps);
    const double s1 = 2.0 + eps;
    const int ms = quad.radial, md = quad.transverse, mt = quad.chord;
    const double ds = (s1 - s0) / static_cast<double>(ms);
    const double dd = 2.0 * eps / static_cast<double>(md);

    double acc = 0.0;
    for (int a = 0; a < ms; ++a) {
        const double s = s0 + (a + 0.5) * ds;
        for (int b = 0; b < md; ++b) {
            const double d = -eps + (b + 0.5) * dd;
            const double r2 = s * s + d * d;
            if (r2 < 1.0 || r2 > 4.0) continue;
            const Vec u{s * ct - d * st, s * st + d * ct};
            const double om = omega.angular(u) / r2;
            // chord of the ray through the shifted ball around u
            const double cpar = s + bpar;
            const double cperp = d + bperp;
            const double disc = rho * rho - cperp * cperp;
            if (disc <= 0.0) continue;
            const double w = std::sqrt(disc);
            const double tlo = std::max(0.0, cpar - w);
            const double thi = cpar + w;
            if (thi <= tlo) continue;
            const double dt = (thi - tlo) / static_cast<double>(mt);
            double chord = 0.0;
            for (int c = 0; c < mt; ++c) {
                const double t = tlo + (c + 0.5) * dt;
                chord += m.phi_eps({t * ct - u.x, t * st - u.y}, 2) * t * dt;
            }
            acc += om * chord * ds * dd;
        }
    }
    return acc / kLog2;
}

}  // namespace detail

/// Omega_eps at a direction: theta = +-1 for n=1 (pass {+-1,0}), an angle
/// for n=2 (pass a unit vector).
inline double mollified_omega(const SphereKernel& omega, const MollifierSpec& m, Vec theta,
                              const MollifierQuadrature& quad = MollifierQuadrature{}) {
    if (omega.dim == 1) return detail::mollified_omega_1d(omega, m, theta.x >= 0.0 ? 1.0 : -1.0, quad);
    return detail::mollified_omega_2d(omega, m, std::atan2(theta.y, theta.x), quad);
}

// ---------------------------------------------------------------------------
// A tabulated Omega_eps. For n=2 the table is linear-interpolated: Omega_eps
// is smooth at scale eps, so the grid is sized ~16/eps points and the
// interpolation error stays far below the mollification scale. For n=1
// there are just the two exact directions.
// ---------------------------------------------------------------------------

struct MollifiedOmega {
    int dim = 1;
    double epsilon = 0.0;
    std::vector<double> table;  // n=1: {value(+1), value(-1)}; n=2: values at 2*pi*i/M

    double value_dir(Vec x) const {
        if (dim == 1) return x.x >= 0.0 ? table[0] : table[1];
        const std::size_t msize = table.size();
        double theta = std::atan2(x.y, x.x);
        if (theta < 0.0) theta += 2.0 * kPi;
        const double pos = theta / (2.0 * kPi) * static_cast<double>(msize);
        const std::size_t i0 = static_cast<std::size_t>(pos) % msize;
        const std::size_t i1 = (i0 + 1) % msize;
        const double w = pos - std::floor(pos);
        return (1.0 - w) * table[i0] + w * table[i1];
    }

    double max_abs() const {
        double v = 0.0;
        for (double t : table) v = std::max(v, std::abs(t));
        return v;
    }
};

inline std::size_t mollified_table_size(double eps) {
    std::size_t m = 512;
    while (m < static_cast<std::size_t>(16.0 / eps) && m < 8192) m <<= 1;
    return m;
}

inline MollifiedOmega build_mollified_omega(const SphereKernel& omega, const MollifierSpec& m,
                                            const MollifierQuadrature& quad = MollifierQuadrature{},
                                            std::size_t table_size = 0, int threads = 1) {
    MollifiedOmega out;
    out.dim = omega.dim;
    out.epsilon = m.epsilon;
    if (omega.dim == 1) {
        out.table = {detail::mollified_omega_1d(omega, m, 1.0, quad), detail::mollified_omega_1d(omega, m, -1.0, quad)};
        return out;
    }
    const std::size_t msize = table_size ? table_size : mollified_table_size(m.epsilon);
    out.table.assign(msize, 0.0);
    parallel_for(msize, threads, [&](std::size_t i) {
        const double theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(msize);
        out.table[i] = detail::mollified_omega_2d(omega, m, theta, quad);
    });
    return out;
}

/// K_eps(x) = Omega_eps(x/|x|) / |x|^n from a prebuilt table.
inline double mollified_kernel_value(const MollifiedOmega& me, Vec x) {
    const double r2 = x.norm2();
    if (r2 == 0.0) throw singularity_error("mollified_kernel_value: x = 0");
    return me.dim == 1 ? me.value_dir(x) / std::sqrt(r2) : me.value_dir(x) / r2;
}

// ---------------------------------------------------------------------------
// Fourier probe of the annulus kernel: hat(Omega_0)(xi) by midpoint
// quadrature. The angular grid is a power-of-two multiple of the sample
// count, so sector sums are exact and the mean-zero cancellation at xi = 0
// survives discretization.
// ---------------------------------------------------------------------------

struct FourierQuadrature {
    int points_1d = 4096;
    int radial_2d = 512;
    int angular_target_2d = 2048;
};

inline std::complex<double> omega0_fourier(const SphereKernel& omega, Vec xi,
                                           const FourierQuadrature& quad = FourierQuadrature{}) {
    const std::complex<double> I(0.0, 1.0);
    if (omega.dim == 1) {
        const int mpts = quad.points_1d;
        const double dr = 1.0 / static_cast<double>(mpts);
        std::complex<double> acc(0.0, 0.0);
        for (int i = 0; i < mpts; ++i) {
            const double r = 1.0 + (i + 0.5) * dr;
            acc += omega.samples[0] / r * std::exp(-2.0 * kPi * I * (r * xi.x)) * dr;
            acc += omega.samples[1] / r * std::exp(-2.0 * kPi * I * (-r * xi.x)) * dr;
        }
        return acc;
    }
    const std::size_t nsamp = omega.sample_count();
    std::size_t ma = nsamp;
    while (ma < static_cast<std::size_t>(quad.angular_target_2d)) ma <<= 1;
    const int mr = quad.radial_2d;
    const double dr = 1.0 / static_cast<double>(mr);
    const double da = 2.0 * kPi / static_cast<double>(ma);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t a = 0; a < ma; ++a) {
        const double theta = (static_cast<double>(a) + 0.5) * da;
        const double ct = std::cos(theta), st = std::sin(theta);
        const double om = omega.angular({ct, st});
        if (om == 0.0) continue;
        const double phase_scale = -2.0 * kPi * (ct * xi.x + st * xi.y);
        std::complex<double> radial(0.0, 0.0);
        for (int i = 0; i < mr; ++i) {
            const double r = 1.0 + (i + 0.5) * dr;
            radial += std::exp(I * (phase_scale * r)) / r * dr;  // (1/r^2) * r dr
        }
        acc += om * radial * da;
    }
    return acc;
}

/// Log-log slope of the RMS of |hat(Omega_0)| over a few directions,
/// fitted across the given magnitudes.
inline double fourier_decay_slope(const SphereKernel& omega, const std::vector<double>& mags, int directions = 4,
                                  const FourierQuadrature& quad = FourierQuadrature{}) {
    std::vector<double> lx, ly;
    for (double m : mags) {
        double rms = 0.0;
        const int nd = omega.dim == 1 ? 1 : directions;
        for (int d = 0; d < nd; ++d) {
            const double ang = (static_cast<double>(d) + 0.371) * kPi / static_cast<double>(std::max(nd, 1));
            const Vec xi = omega.dim == 1 ? Vec{m, 0.0} : Vec{m * std::cos(ang), m * std::sin(ang)};
            const double v = std::abs(omega0_fourier(omega, xi, quad));
            rms += v * v;
        }
        rms = std::sqrt(rms / static_cast<double>(std::max(omega.dim == 1 ? 1 : directions, 1)));
        lx.push_back(std::log(m));
        ly.push_back(std::log(std::max(rms, 1e-300)));
    }
    return fit_slope(lx, ly);
}

// ---------------------------------------------------------------------------
// Dini modulus. For the mollified kernel the modulus normalizes to
// omega(t) = min(1, t/eps) with the closed-form Dini constant 1 + log(1/eps).
// ---------------------------------------------------------------------------

struct DiniModulus {
    std::function<double(double)> omega;
    double dini_constant = 0.0;
};

inline DiniModulus dini_of_mollified(double eps) {
    if (!(eps > 0.0) || eps > 1.0) throw parameter_error("dini_of_mollified: need 0 < eps <= 1");
    DiniModulus d;
    d.omega = [eps](double t) { return std::min(1.0, t / eps); };
    d.dini_constant = 1.0 + std::log(1.0 / eps);
    return d;
}

/// Numeric [omega]_Dini = int_0^1 omega(t) dt/t on [t_min, 1]; test oracle.
inline double dini_integral(const std::function<double(double)>& omega, double t_min = 1e-9, int points = 1 << 16) {
    // substitute t = e^-u so the integrand is omega(e^-u) du
    const double u_max = -std::log(t_min);
    const double du = u_max / static_cast<double>(points);
    double s = 0.0;
    for (int i = 0; i < points; ++i) {
        const double u = (i + 0.5) * du;
        s += omega(std::exp(-u)) * du;
    }
    return s;
}

}  // namespace rsi
