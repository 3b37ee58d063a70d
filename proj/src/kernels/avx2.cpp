// Compiled with -mavx2 -mfma. Nothing here may run before avx2_table()
// has confirmed CPU support.

#include "probelight/kernels.hpp"

#include "kernel_detail.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define PROBELIGHT_HAVE_AVX2 1
#else
#define PROBELIGHT_HAVE_AVX2 0
#endif

namespace probelight::kernels {

#if PROBELIGHT_HAVE_AVX2

namespace {

constexpr std::size_t kLanes = 8;
// Float partial sums are flushed to double every this many vectors.
constexpr std::size_t kFlushEvery = 64;

double hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    __m256d wide = _mm256_add_pd(_mm256_cvtps_pd(lo), _mm256_cvtps_pd(hi));
    __m128d a = _mm256_castpd256_pd128(wide);
    __m128d b = _mm256_extractf128_pd(wide, 1);
    a = _mm_add_pd(a, b);
    return _mm_cvtsd_f64(a) + _mm_cvtsd_f64(_mm_unpackhi_pd(a, a));
}

double hsum(__m256d v) {
    __m128d a = _mm256_castpd256_pd128(v);
    __m128d b = _mm256_extractf128_pd(v, 1);
    a = _mm_add_pd(a, b);
    return _mm_cvtsd_f64(a) + _mm_cvtsd_f64(_mm_unpackhi_pd(a, a));
}

__m256 ipow(__m256 base, int exponent) {
    __m256 result = _mm256_set1_ps(1.0f);
    __m256 p = base;
    while (exponent > 0) {
        if (exponent & 1)
            result = _mm256_mul_ps(result, p);
        exponent >>= 1;
        if (exponent > 0)
            p = _mm256_mul_ps(p, p);
    }
    return result;
}

std::array<double, 3> lobe_sum_avx2(const DirectionalSamples& s, const std::array<float, 3>& axis, int exponent) {
    const std::size_t n = s.size();
    const std::size_t body = n - n % kLanes;
    const __m256 ax = _mm256_set1_ps(axis[0]);
    const __m256 ay = _mm256_set1_ps(axis[1]);
    const __m256 az = _mm256_set1_ps(axis[2]);
    const __m256 zero = _mm256_setzero_ps();

    double total[3] = {0.0, 0.0, 0.0};
    __m256 ar = zero, ag = zero, ab = zero;
    std::size_t pending = 0;
    for (std::size_t i = 0; i < body; i += kLanes) {
        __m256 c = _mm256_mul_ps(ax, _mm256_loadu_ps(s.x.data() + i));
        c = _mm256_fmadd_ps(ay, _mm256_loadu_ps(s.y.data() + i), c);
        c = _mm256_fmadd_ps(az, _mm256_loadu_ps(s.z.data() + i), c);
        c = _mm256_max_ps(c, zero);
        const __m256 w = exponent == 1 ? c : ipow(c, exponent);
        ar = _mm256_fmadd_ps(w, _mm256_loadu_ps(s.r.data() + i), ar);
        ag = _mm256_fmadd_ps(w, _mm256_loadu_ps(s.g.data() + i), ag);
        ab = _mm256_fmadd_ps(w, _mm256_loadu_ps(s.b.data() + i), ab);
        if (++pending == kFlushEvery) {
            total[0] += hsum(ar);
            total[1] += hsum(ag);
            total[2] += hsum(ab);
            ar = ag = ab = zero;
            pending = 0;
        }
    }
    total[0] += hsum(ar);
    total[1] += hsum(ag);
    total[2] += hsum(ab);

    for (std::size_t i = body; i < n; ++i) {
        const float c = axis[0] * s.x[i] + axis[1] * s.y[i] + axis[2] * s.z[i];
        if (c <= 0.0f)
            continue;
        const float w = detail::ipow(c, exponent);
        total[0] += static_cast<double>(w * s.r[i]);
        total[1] += static_cast<double>(w * s.g[i]);
        total[2] += static_cast<double>(w * s.b[i]);
    }
    return {total[0], total[1], total[2]};
}

std::array<double, 3> dot_sums_avx2(std::span<const float> p, std::span<const float> g) {
    const std::size_t n = p.size();
    const std::size_t body = n - n % 4;
    __m256d pg = _mm256_setzero_pd(), pp = pg, gg = pg;
    for (std::size_t i = 0; i < body; i += 4) {
        const __m256d a = _mm256_cvtps_pd(_mm_loadu_ps(p.data() + i));
        const __m256d b = _mm256_cvtps_pd(_mm_loadu_ps(g.data() + i));
        pg = _mm256_fmadd_pd(a, b, pg);
        pp = _mm256_fmadd_pd(a, a, pp);
        gg = _mm256_fmadd_pd(b, b, gg);
    }
    double out[3] = {hsum(pg), hsum(pp), hsum(gg)};
    for (std::size_t i = body; i < n; ++i) {
        const double a = p[i], b = g[i];
        out[0] += a * b;
        out[1] += a * a;
        out[2] += b * b;
    }
    return {out[0], out[1], out[2]};
}

double scaled_sq_diff_avx2(std::span<const float> p, std::span<const float> g, double scale) {
    const std::size_t n = p.size();
    const std::size_t body = n - n % 4;
    const __m256d s = _mm256_set1_pd(scale);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += 4) {
        const __m256d a = _mm256_cvtps_pd(_mm_loadu_ps(p.data() + i));
        const __m256d b = _mm256_cvtps_pd(_mm_loadu_ps(g.data() + i));
        const __m256d d = _mm256_fmsub_pd(s, a, b);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double total = hsum(acc);
    for (std::size_t i = body; i < n; ++i) {
        const double d = scale * p[i] - g[i];
        total += d * d;
    }
    return total;
}

// The two elementwise kernels below avoid FMA so they round exactly like
// the scalar reference.

void blend_avx2(std::span<const float> a, std::span<const float> b, std::span<const float> w, std::span<float> out) {
    const std::size_t n = out.size();
    const std::size_t body = n - n % kLanes;
    const __m256 one = _mm256_set1_ps(1.0f);
    for (std::size_t i = 0; i < body; i += kLanes) {
        const __m256 wv = _mm256_loadu_ps(w.data() + i);
        const __m256 lhs = _mm256_mul_ps(_mm256_sub_ps(one, wv), _mm256_loadu_ps(a.data() + i));
        const __m256 rhs = _mm256_mul_ps(wv, _mm256_loadu_ps(b.data() + i));
        _mm256_storeu_ps(out.data() + i, _mm256_add_ps(lhs, rhs));
    }
    for (std::size_t i = body; i < n; ++i)
        out[i] = detail::blend_one(a[i], b[i], w[i]);
}

void merge_step_avx2(std::span<float> acc, std::span<const float> current, float exposure) {
    const std::size_t n = acc.size();
    const std::size_t body = n - n % kLanes;
    const __m256 e = _mm256_set1_ps(exposure);
    const __m256 threshold = _mm256_set1_ps(detail::kMergeThreshold);
    const __m256 ramp = _mm256_set1_ps(detail::kMergeRamp);
    const __m256 zero = _mm256_setzero_ps();
    const __m256 one = _mm256_set1_ps(1.0f);
    for (std::size_t i = 0; i < body; i += kLanes) {
        const __m256 l = _mm256_loadu_ps(acc.data() + i);
        const __m256 li = _mm256_loadu_ps(current.data() + i);
        __m256 m = _mm256_div_ps(_mm256_sub_ps(_mm256_mul_ps(e, li), threshold), ramp);
        m = _mm256_min_ps(_mm256_max_ps(m, zero), one);
        m = _mm256_and_ps(m, _mm256_cmp_ps(l, li, _CMP_GT_OQ));
        const __m256 out = _mm256_add_ps(_mm256_mul_ps(_mm256_sub_ps(one, m), li), _mm256_mul_ps(m, l));
        _mm256_storeu_ps(acc.data() + i, out);
    }
    for (std::size_t i = body; i < n; ++i)
        acc[i] = detail::merge_one(acc[i], current[i], exposure);
}

bool cpu_supports_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

} // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{
        "avx2", lobe_sum_avx2, dot_sums_avx2, scaled_sq_diff_avx2, blend_avx2, merge_step_avx2,
    };
    static const bool supported = cpu_supports_avx2();
    return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table() {
    return nullptr;
}

#endif

} // namespace probelight::kernels
