#pragma once

#include "probelight/geometry.hpp"
#include "probelight/image.hpp"

#include <span>

namespace probelight {

/// Per-pixel, per-channel median of equally shaped images. Even counts take
/// the mean of the two middle order statistics.
RasterImage pixelwise_median(std::span<const RasterImage> stack);

/// (1 - m) * base + m * overlay, per pixel.
RasterImage composite(const RasterImage& base, const RasterImage& overlay, const PixelMask& mask);

/// Binary disk mask: 1 where the pixel centre lies within the radius.
PixelMask ball_mask(const BallSpec& spec);

enum class DepthFill {
    SceneMax, ///< the nearest depth present in the map
    White,    ///< 1.0
};

/// Paints the ball disk into a single-channel depth map (1 = nearest).
RasterImage paint_depth_circle(const RasterImage& depth, const BallSpec& spec, DepthFill fill = DepthFill::SceneMax);

} // namespace probelight
