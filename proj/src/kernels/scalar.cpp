#include "probelight/kernels.hpp"

#include "kernel_detail.hpp"

namespace probelight::kernels {

namespace {

std::array<double, 3> lobe_sum_scalar(const DirectionalSamples& s, const std::array<float, 3>& axis, int exponent) {
    double acc[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        float c = axis[0] * s.x[i] + axis[1] * s.y[i] + axis[2] * s.z[i];
        if (c <= 0.0f)
            continue;
        const float w = detail::ipow(c, exponent);
        acc[0] += static_cast<double>(w * s.r[i]);
        acc[1] += static_cast<double>(w * s.g[i]);
        acc[2] += static_cast<double>(w * s.b[i]);
    }
    return {acc[0], acc[1], acc[2]};
}

std::array<double, 3> dot_sums_scalar(std::span<const float> p, std::span<const float> g) {
    double pg = 0.0, pp = 0.0, gg = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = p[i], b = g[i];
        pg += a * b;
        pp += a * a;
        gg += b * b;
    }
    return {pg, pp, gg};
}

double scaled_sq_diff_scalar(std::span<const float> p, std::span<const float> g, double scale) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = scale * p[i] - g[i];
        acc += d * d;
    }
    return acc;
}

void blend_scalar(std::span<const float> a, std::span<const float> b, std::span<const float> w, std::span<float> out) {
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = detail::blend_one(a[i], b[i], w[i]);
}

void merge_step_scalar(std::span<float> acc, std::span<const float> current, float exposure) {
    for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] = detail::merge_one(acc[i], current[i], exposure);
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        "scalar", lobe_sum_scalar, dot_sums_scalar, scaled_sq_diff_scalar, blend_scalar, merge_step_scalar,
    };
    return table;
}

} // namespace probelight::kernels
