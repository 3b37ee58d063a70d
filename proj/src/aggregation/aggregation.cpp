#include "probelight/aggregation.hpp"

#include "probelight/error.hpp"
#include "probelight/kernels.hpp"

#include <algorithm>
#include <vector>

namespace probelight {

RasterImage pixelwise_median(std::span<const RasterImage> stack) {
    if (stack.empty())
        throw EmptyStack("median of an empty stack");
    const RasterImage& first = stack.front();
    for (const auto& img : stack)
        if (!img.same_shape(first) || img.space() != first.space())
            throw DimensionMismatch("median stack images differ in shape or space");

    const std::size_t n = stack.size();
    const std::size_t mid = n / 2;
    RasterImage out(first.width(), first.height(), first.channels(), first.space());
    auto dst = out.data();
    std::vector<float> column(n);
    for (std::size_t i = 0; i < dst.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k)
            column[k] = stack[k].data()[i];
        std::nth_element(column.begin(), column.begin() + mid, column.end());
        const float upper = column[mid];
        if (n % 2 == 1) {
            dst[i] = upper;
        } else {
            const float lower = *std::max_element(column.begin(), column.begin() + mid);
            dst[i] = static_cast<float>((static_cast<double>(lower) + upper) / 2.0);
        }
    }
    return out;
}

RasterImage composite(const RasterImage& base, const RasterImage& overlay, const PixelMask& mask) {
    if (!base.same_shape(overlay))
        throw DimensionMismatch("composite base and overlay differ in shape");
    if (mask.width() != base.width() || mask.height() != base.height())
        throw DimensionMismatch("composite mask size differs from image");

    const int channels = base.channels();
    std::vector<float> weights(base.sample_count());
    auto m = mask.data();
    for (std::size_t p = 0; p < m.size(); ++p)
        std::fill_n(weights.begin() + p * channels, channels, m[p]);

    RasterImage out(base.width(), base.height(), channels, base.space());
    kernels::active().blend(base.data(), overlay.data(), weights, out.data());
    return out;
}

PixelMask ball_mask(const BallSpec& spec) {
    spec.validate();
    PixelMask mask(spec.image_width, spec.image_height);
    for (int y = 0; y < spec.image_height; ++y)
        for (int x = 0; x < spec.image_width; ++x)
            if (spec.contains(x, y))
                mask.at(x, y) = 1.0f;
    return mask;
}

RasterImage paint_depth_circle(const RasterImage& depth, const BallSpec& spec, DepthFill fill) {
    if (depth.channels() != 1)
        throw ChannelMismatch("depth map must be single-channel");
    if (depth.width() != spec.image_width || depth.height() != spec.image_height)
        throw DimensionMismatch("depth map size does not match the ball canvas");
    spec.validate();
    float value = 1.0f;
    if (fill == DepthFill::SceneMax && !depth.empty())
        value = *std::max_element(depth.data().begin(), depth.data().end());
    RasterImage out = depth;
    for (int y = 0; y < depth.height(); ++y)
        for (int x = 0; x < depth.width(); ++x)
            if (spec.contains(x, y))
                out.at(x, y, 0) = value;
    return out;
}

} // namespace probelight
