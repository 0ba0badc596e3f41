// AVX2 + FMA variants. Compiled with -mavx2 -mfma and only called after a CPUID check.

#include "jdcev/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace jdcev::simd {
namespace {

constexpr std::size_t W = 4;

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

// exp on |x| <= 700: x = n ln2 + r, |r| <= ln2/2, degree-13 Taylor on r, scale by 2^n.
inline __m256d vexp(__m256d x) {
    x = _mm256_min_pd(_mm256_max_pd(x, splat(-700.0)), splat(700.0));
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, splat(1.4426950408889634)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, splat(6.93147180369123816490e-01), x);
    r = _mm256_fnmadd_pd(n, splat(1.90821492927058770002e-10), r);

    __m256d p = splat(1.0 / 6227020800.0);  // 1/13!
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, splat(0.5));
    p = _mm256_fmadd_pd(p, r, splat(1.0));
    p = _mm256_fmadd_pd(p, r, splat(1.0));

    const __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i bits = _mm256_cvtepi32_epi64(n32);
    bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// log on normal positive x: x = 2^e m, m in [sqrt(1/2), sqrt(2)), log m = 2 atanh(f / (2 + f)).
inline __m256d vlog(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_exp = _mm256_set1_epi64x(0x3FF0000000000000LL);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_exp));

    // biased exponent as double via the 2^52 trick
    const __m256i biased = _mm256_srli_epi64(bits, 52);
    const __m256d two52 = splat(4503599627370496.0);
    __m256d e = _mm256_sub_pd(
        _mm256_castsi256_pd(_mm256_or_si256(biased, _mm256_castpd_si256(two52))), two52);
    e = _mm256_sub_pd(e, splat(1023.0));

    const __m256d big = _mm256_cmp_pd(m, splat(1.4142135623730951), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, splat(0.5)), big);
    e = _mm256_add_pd(e, _mm256_and_pd(big, splat(1.0)));

    const __m256d f = _mm256_sub_pd(m, splat(1.0));
    const __m256d s = _mm256_div_pd(f, _mm256_add_pd(splat(2.0), f));
    const __m256d z = _mm256_mul_pd(s, s);
    __m256d p = splat(1.0 / 23.0);
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 21.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 19.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 17.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 15.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 13.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 11.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 9.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 7.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 5.0));
    p = _mm256_fmadd_pd(p, z, splat(1.0 / 3.0));
    // log m = f - s f + 2 s z p  (2s = f - s f), keeps the leading term exact
    const __m256d two_s = _mm256_fnmadd_pd(s, f, f);
    const __m256d log_m = _mm256_fmadd_pd(_mm256_mul_pd(two_s, z), p, two_s);
    const __m256d lo = _mm256_fmadd_pd(e, splat(1.90821492927058770002e-10), log_m);
    return _mm256_fmadd_pd(e, splat(6.93147180369123816490e-01), lo);
}

// Tail handling: copy up to three lanes through a stack buffer.
struct Lanes {
    alignas(32) double v[W];
};

inline __m256d load_tail(const double* p, std::size_t n, double fill) {
    Lanes l;
    for (std::size_t i = 0; i < W; ++i) l.v[i] = i < n ? p[i] : fill;
    return _mm256_load_pd(l.v);
}

inline void store_tail(double* p, std::size_t n, __m256d v) {
    Lanes l;
    _mm256_store_pd(l.v, v);
    for (std::size_t i = 0; i < n; ++i) p[i] = l.v[i];
}

template <class Body>
inline void for_lanes(std::size_t n, Body&& body) {
    std::size_t i = 0;
    for (; i + W <= n; i += W) body(i, W);
    if (i < n) body(i, n - i);
}

inline __m256d load(const double* p, std::size_t count, double fill = 1.0) {
    return count == W ? _mm256_loadu_pd(p) : load_tail(p, count, fill);
}

inline void store(double* p, std::size_t count, __m256d v) {
    if (count == W) {
        _mm256_storeu_pd(p, v);
    } else {
        store_tail(p, count, v);
    }
}

void exp_avx2(std::span<const double> x, std::span<double> out) {
    for_lanes(x.size(), [&](std::size_t i, std::size_t n) {
        store(out.data() + i, n, vexp(load(x.data() + i, n, 0.0)));
    });
}

void log_avx2(std::span<const double> x, std::span<double> out) {
    for_lanes(x.size(), [&](std::size_t i, std::size_t n) {
        store(out.data() + i, n, vlog(load(x.data() + i, n, 1.0)));
    });
}

// Time-only factors shared by the coefficient kernels.
struct TimeFactors {
    double a, b, ekt, emkt;
};

TimeFactors time_factors(const CoefficientPack& p, double tau) {
    const double t = p.maturity - tau;
    const double ekt = std::exp(p.kappa * t);
    return {p.a1 * t + p.a2, p.b1 * t + p.b2, ekt, 1.0 / ekt};
}

void velocity_avx2(const CoefficientPack& p, double tau, std::span<const double> x1,
                   std::span<const double> x2, std::span<double> v1, std::span<double> v2) {
    const TimeFactors tf = time_factors(p, tau);
    const __m256d beta = splat(p.beta);
    const __m256d s_min = splat(p.s_min);
    const __m256d y_half = splat(p.y_half);
    const __m256d drift1 = splat(tf.a * tf.a * (p.beta + 1.0));
    const __m256d ca2 = splat(p.c * tf.a * tf.a);
    const __m256d b = splat(tf.b);
    const __m256d emkt = splat(tf.emkt);
    const __m256d cross = splat(0.5 * p.rho * p.delta * tf.a * (p.beta + 1.0));
    const __m256d kt = splat(p.kappa * p.theta);
    const __m256d ekt = splat(tf.ekt);

    for_lanes(x1.size(), [&](std::size_t i, std::size_t n) {
        const __m256d s = _mm256_add_pd(load(x1.data() + i, n, 1.0), s_min);
        const __m256d y = _mm256_sub_pd(load(x2.data() + i, n, 0.0), y_half);
        const __m256d sb = vexp(_mm256_mul_pd(beta, vlog(s)));
        const __m256d s2b = _mm256_mul_pd(sb, sb);
        const __m256d lambda = _mm256_fmadd_pd(ca2, s2b, b);
        const __m256d rate_plus = _mm256_fmadd_pd(y, emkt, lambda);
        const __m256d a = _mm256_fmsub_pd(drift1, s2b, rate_plus);
        store(v1.data() + i, n, _mm256_mul_pd(a, s));
        store(v2.data() + i, n, _mm256_mul_pd(_mm256_fmsub_pd(cross, sb, kt), ekt));
    });
}

void point_coefficients_avx2(const CoefficientPack& p, double tau, std::span<const double> x1,
                             std::span<const double> x2, const CoefficientColumns& out) {
    const TimeFactors tf = time_factors(p, tau);
    const double a2 = tf.a * tf.a;
    const __m256d beta = splat(p.beta);
    const __m256d s_min = splat(p.s_min);
    const __m256d y_half = splat(p.y_half);
    const __m256d half_a2 = splat(0.5 * a2);
    const __m256d a12c = splat(0.5 * p.rho * p.delta * tf.a * tf.ekt);
    const __m256d a22 = splat(0.5 * p.delta * p.delta * tf.ekt * tf.ekt);
    const __m256d ca2 = splat(p.c * a2);
    const __m256d b = splat(tf.b);
    const __m256d emkt = splat(tf.emkt);
    const __m256d neg_emkt = splat(-tf.emkt);
    const __m256d l11c = splat((2.0 * p.beta + 1.0) * a2 * (p.beta + 1.0 - p.c));
    const __m256d l21c = splat(0.5 * p.rho * p.delta * tf.a * (p.beta + 1.0) * p.beta * tf.ekt);
    const __m256d gd1c = splat(2.0 * p.beta * (2.0 * p.beta + 1.0) * a2 * (p.beta + 1.0 - p.c));

    for_lanes(x1.size(), [&](std::size_t i, std::size_t n) {
        const __m256d s = _mm256_add_pd(load(x1.data() + i, n, 1.0), s_min);
        const __m256d y = _mm256_sub_pd(load(x2.data() + i, n, 0.0), y_half);
        const __m256d sb = vexp(_mm256_mul_pd(beta, vlog(s)));
        const __m256d s2b = _mm256_mul_pd(sb, sb);
        const __m256d sb1 = _mm256_mul_pd(sb, s);
        const __m256d rate = _mm256_mul_pd(y, emkt);
        const __m256d inv_s = _mm256_div_pd(splat(1.0), s);

        store(out.a11 + i, n, _mm256_mul_pd(half_a2, _mm256_mul_pd(sb1, sb1)));
        store(out.a12 + i, n, _mm256_mul_pd(a12c, sb1));
        store(out.a22 + i, n, a22);
        store(out.reaction + i, n, _mm256_add_pd(rate, _mm256_fmadd_pd(ca2, s2b, b)));
        store(out.l11 + i, n, _mm256_sub_pd(_mm256_fmsub_pd(l11c, s2b, rate), b));
        store(out.l12 + i, n, _mm256_mul_pd(neg_emkt, s));
        store(out.l21 + i, n, _mm256_mul_pd(l21c, _mm256_mul_pd(sb, inv_s)));
        store(out.grad_div1 + i, n, _mm256_mul_pd(gd1c, _mm256_mul_pd(s2b, inv_s)));
        store(out.grad_div2 + i, n, neg_emkt);
    });
}

void element_matrices_avx2(const ElementTables& t, std::size_t n_elements, const double* mass_c,
                           const double* k11, const double* k12, const double* k22,
                           double* out) {
    // 81 = 20 vectors of 4 plus one scalar lane
    for (std::size_t e = 0; e < n_elements; ++e) {
        __m256d acc[20];
        for (auto& a : acc) a = _mm256_setzero_pd();
        double last = 0.0;
        for (int q = 0; q < 9; ++q) {
            const std::size_t iq = e * 9 + q;
            const __m256d cm = splat(mass_c[iq]);
            const __m256d c11 = splat(k11[iq]);
            const __m256d c12 = splat(k12[iq]);
            const __m256d c22 = splat(k22[iq]);
            const double* pm = t.mass[q].data();
            const double* p11 = t.g11[q].data();
            const double* p12 = t.g12[q].data();
            const double* p22 = t.g22[q].data();
            for (int v = 0; v < 20; ++v) {
                __m256d a = acc[v];
                a = _mm256_fmadd_pd(cm, _mm256_loadu_pd(pm + 4 * v), a);
                a = _mm256_fmadd_pd(c11, _mm256_loadu_pd(p11 + 4 * v), a);
                a = _mm256_fmadd_pd(c12, _mm256_loadu_pd(p12 + 4 * v), a);
                a = _mm256_fmadd_pd(c22, _mm256_loadu_pd(p22 + 4 * v), a);
                acc[v] = a;
            }
            last = std::fma(mass_c[iq], pm[80], last);
            last = std::fma(k11[iq], p11[80], last);
            last = std::fma(k12[iq], p12[80], last);
            last = std::fma(k22[iq], p22[80], last);
        }
        double* m = out + e * 81;
        for (int v = 0; v < 20; ++v) _mm256_storeu_pd(m + 4 * v, acc[v]);
        m[80] = last;
    }
}

void element_vectors_avx2(const ElementTables& t, std::size_t n_elements, const double* c0,
                          const double* g1, const double* g2, double* out) {
    // 9 = 2 vectors of 4 plus one scalar lane
    for (std::size_t e = 0; e < n_elements; ++e) {
        __m256d lo = _mm256_setzero_pd();
        __m256d hi = _mm256_setzero_pd();
        double last = 0.0;
        for (int q = 0; q < 9; ++q) {
            const std::size_t iq = e * 9 + q;
            const __m256d a = splat(c0[iq]);
            const __m256d b = splat(g1[iq]);
            const __m256d c = splat(g2[iq]);
            lo = _mm256_fmadd_pd(a, _mm256_loadu_pd(t.wphi[q].data()), lo);
            lo = _mm256_fmadd_pd(b, _mm256_loadu_pd(t.wdxi[q].data()), lo);
            lo = _mm256_fmadd_pd(c, _mm256_loadu_pd(t.wdeta[q].data()), lo);
            hi = _mm256_fmadd_pd(a, _mm256_loadu_pd(t.wphi[q].data() + 4), hi);
            hi = _mm256_fmadd_pd(b, _mm256_loadu_pd(t.wdxi[q].data() + 4), hi);
            hi = _mm256_fmadd_pd(c, _mm256_loadu_pd(t.wdeta[q].data() + 4), hi);
            last = std::fma(c0[iq], t.wphi[q][8], last);
            last = std::fma(g1[iq], t.wdxi[q][8], last);
            last = std::fma(g2[iq], t.wdeta[q][8], last);
        }
        double* v = out + e * 9;
        _mm256_storeu_pd(v, lo);
        _mm256_storeu_pd(v + 4, hi);
        v[8] = last;
    }
}

void mc_step_avx2(const McStepConstants& k, std::size_t n_paths, const McState& s,
                  const double* z1, const double* z2) {
    const __m256d dt = splat(k.dt);
    const __m256d half_dt = splat(0.5 * k.dt);
    const __m256d sqrt_dt = splat(k.sqrt_dt);
    const __m256d a_now = splat(k.a_now);
    const __m256d b_now = splat(k.b_now);
    const __m256d a_next = splat(k.a_next);
    const __m256d b_next = splat(k.b_next);
    const __m256d c = splat(k.c);
    const __m256d beta = splat(k.beta);
    const __m256d decay = splat(k.decay);
    const __m256d theta = splat(k.theta);
    const __m256d rate_sd = splat(k.rate_sd);
    const __m256d rho = splat(k.rho);
    const __m256d rho_bar = splat(k.rho_bar);
    const __m256d floor = splat(k.log_floor);
    const __m256d half = splat(0.5);
    const __m256d one = splat(1.0);

    for_lanes(n_paths, [&](std::size_t i, std::size_t n) {
        const __m256d x = load(s.log_s + i, n, 0.0);
        const __m256d r = load(s.rate + i, n, 0.0);
        const __m256d w1 = load(z1 + i, n, 0.0);
        const __m256d w2 = load(z2 + i, n, 0.0);
        const __m256d sigma = _mm256_mul_pd(a_now, vexp(_mm256_mul_pd(beta, x)));
        const __m256d var = _mm256_mul_pd(sigma, sigma);
        const __m256d lambda = _mm256_fmadd_pd(c, var, b_now);

        const __m256d r_new = _mm256_fmadd_pd(rate_sd, w1,
                                              _mm256_fmadd_pd(_mm256_sub_pd(r, theta), decay, theta));
        const __m256d dw = _mm256_mul_pd(sqrt_dt, _mm256_fmadd_pd(rho, w1, _mm256_mul_pd(rho_bar, w2)));
        const __m256d drift = _mm256_add_pd(_mm256_fnmadd_pd(half, var, r), lambda);
        const __m256d x_new = _mm256_fmadd_pd(sigma, dw, _mm256_fmadd_pd(drift, dt, x));

        const __m256d sigma_new = _mm256_mul_pd(a_next, vexp(_mm256_mul_pd(beta, x_new)));
        const __m256d lambda_new = _mm256_fmadd_pd(c, _mm256_mul_pd(sigma_new, sigma_new), b_next);
        const __m256d total = _mm256_add_pd(_mm256_add_pd(r, lambda), _mm256_add_pd(r_new, lambda_new));
        store(s.integral + i, n, _mm256_fmadd_pd(total, half_dt, load(s.integral + i, n, 0.0)));

        const __m256d was_alive = _mm256_cmp_pd(load(s.alive + i, n, 0.0), splat(0.0), _CMP_NEQ_OQ);
        const __m256d above = _mm256_cmp_pd(x_new, floor, _CMP_GE_OQ);
        const __m256d survives = _mm256_and_pd(was_alive, above);
        store(s.alive + i, n, _mm256_and_pd(survives, one));
        store(s.log_s + i, n, _mm256_blendv_pd(x, x_new, survives));
        store(s.rate + i, n, r_new);
    });
}

} // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2,
                             &exp_avx2,
                             &log_avx2,
                             &velocity_avx2,
                             &point_coefficients_avx2,
                             &element_matrices_avx2,
                             &element_vectors_avx2,
                             &mc_step_avx2};
} // namespace detail

} // namespace jdcev::simd
