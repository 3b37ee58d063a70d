#pragma once

#include "probelight/image.hpp"

#include <array>
#include <span>
#include <vector>

namespace probelight {

/// Exposure compensation in stops; radiance scales by 2^ev.
struct ExposureValue {
    double ev = 0.0;

    constexpr ExposureValue() = default;
    constexpr explicit ExposureValue(double stops) : ev(stops) {}

    double gain() const;
    friend constexpr auto operator<=>(const ExposureValue&, const ExposureValue&) = default;
};

inline constexpr double kDefaultGamma = 2.4;

/// sRGB/Rec.709 luminance weights used by the bracket merge.
inline constexpr std::array<float, 3> kLuminanceWeights = {0.21267f, 0.71516f, 0.07217f};

struct ToneMapParams {
    double gamma = kDefaultGamma;
    double percentile = 99.0; ///< rank in (0, 100)
    double target = 0.9;      ///< LDR value the percentile sample maps to

    void validate() const;
};

/// Exact linear-interpolated percentile of `values` (numpy "linear" rule).
/// p in [0, 100]. Returns 0 for an empty range.
double percentile(std::span<const float> values, double p);

/// Per-pixel (I^gamma . weights) * 2^-ev. Input must be 3-channel LdrSrgb.
RasterImage luminance(const RasterImage& ldr, ExposureValue ev, double gamma = kDefaultGamma);

/// Per-sample v^gamma.
RasterImage linearize(const RasterImage& ldr, double gamma = kDefaultGamma);

/// Merges an exposure bracket (evs strictly descending, evs[0] == 0) into a
/// linear HDR image, replacing luminance in over-exposed regions with
/// exposure-corrected luminance from darker frames while keeping the
/// chroma of the EV0 frame.
RasterImage merge_brackets(std::span<const RasterImage> images, std::span<const ExposureValue> evs,
                           double gamma = kDefaultGamma);

/// Linear-domain scale that sends the given percentile of `hdr` to
/// `target` after the 1/gamma curve: target^gamma / P. Zero when P <= 1e-12.
double tonemap_scale(const RasterImage& hdr, const ToneMapParams& params = {});

/// Same scale computed over selected samples only (e.g. pixels inside a disk).
double tonemap_scale(std::span<const float> samples, const ToneMapParams& params = {});

/// clip((scale * hdr)^(1/gamma), 0, 1), tagged LdrSrgb.
RasterImage tonemap_with_scale(const RasterImage& hdr, double scale, double gamma = kDefaultGamma);

/// Percentile-normalized gamma tone map.
RasterImage tonemap(const RasterImage& hdr, const ToneMapParams& params = {});

/// Multiplies every sample by `factor`.
RasterImage scaled(const RasterImage& img, double factor);

} // namespace probelight
