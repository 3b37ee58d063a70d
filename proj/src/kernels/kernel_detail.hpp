#pragma once

// Per-element formulas shared by the scalar kernels and the scalar tails of
// the vector kernels, so both agree bit-for-bit on the elementwise ops.

namespace probelight::kernels::detail {

// Internal linkage: this header is compiled with different ISA flags per TU.
namespace {

inline constexpr float kMergeThreshold = 0.9f;
inline constexpr float kMergeRamp = 0.1f;

// Square-and-multiply, low bit first. The vector variant uses the same order.
inline float ipow(float base, int exponent) {
    float result = 1.0f;
    float p = base;
    while (exponent > 0) {
        if (exponent & 1)
            result = result * p;
        exponent >>= 1;
        if (exponent > 0)
            p = p * p;
    }
    return result;
}

inline float blend_one(float a, float b, float w) {
    return (1.0f - w) * a + w * b;
}

inline float merge_one(float acc, float current, float exposure) {
    float m = (exposure * current - kMergeThreshold) / kMergeRamp;
    m = m < 0.0f ? 0.0f : (m > 1.0f ? 1.0f : m);
    if (!(acc > current))
        m = 0.0f;
    return (1.0f - m) * current + m * acc;
}

} // namespace

} // namespace probelight::kernels::detail
