#pragma once

// Data-parallel inner loops. Every kernel has a portable scalar reference
// implementation; an AVX2+FMA variant is compiled separately and picked at
// runtime when the CPU supports it. The equivalence tests pin how far the
// variants may drift apart:
//   * blend, merge_step: bit-identical (no FMA contraction, same op order)
//   * reductions: same value up to float/double summation-order rounding

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace probelight::kernels {

/// Structure-of-arrays view over weighted directions (unit vectors plus RGB
/// weights). All spans have the same length.
struct DirectionalSamples {
    std::span<const float> x, y, z;
    std::span<const float> r, g, b;

    std::size_t size() const { return x.size(); }
};

struct KernelTable {
    std::string_view name;

    /// sum_i max(0, axis . dir_i)^exponent * weight_i, per colour channel.
    /// exponent >= 1.
    std::array<double, 3> (*lobe_sum)(const DirectionalSamples& samples, const std::array<float, 3>& axis,
                                      int exponent);

    /// {sum p*g, sum p*p, sum g*g}
    std::array<double, 3> (*dot_sums)(std::span<const float> p, std::span<const float> g);

    /// sum (scale*p - g)^2
    double (*scaled_sq_diff)(std::span<const float> p, std::span<const float> g, double scale);

    /// out_i = (1 - w_i) * a_i + w_i * b_i
    void (*blend)(std::span<const float> a, std::span<const float> b, std::span<const float> w, std::span<float> out);

    /// One luminance-replacement step of the bracket merge, in place on `acc`:
    ///   m = clip((exposure * current_i - 0.9) / 0.1, 0, 1) * [acc_i > current_i]
    ///   acc_i = (1 - m) * current_i + m * acc_i
    void (*merge_step)(std::span<float> acc, std::span<const float> current, float exposure);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table used by the library. Defaults to the widest supported variant;
/// the PROBELIGHT_SIMD environment variable ("scalar" or "avx2") overrides it.
const KernelTable& active();

} // namespace probelight::kernels
