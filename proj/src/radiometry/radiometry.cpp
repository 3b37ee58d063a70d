#include "probelight/radiometry.hpp"

#include "probelight/error.hpp"
#include "probelight/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace probelight {

double ExposureValue::gain() const {
    return std::exp2(ev);
}

void ToneMapParams::validate() const {
    if (!(gamma > 0.0))
        throw RangeError("tone-map gamma must be positive");
    if (!(percentile > 0.0 && percentile < 100.0))
        throw RangeError("tone-map percentile must lie in (0, 100)");
    if (!(target > 0.0 && target <= 1.0))
        throw RangeError("tone-map target must lie in (0, 1]");
}

double percentile(std::span<const float> values, double p) {
    if (values.empty())
        return 0.0;
    std::vector<float> work(values.begin(), values.end());
    const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(work.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    std::nth_element(work.begin(), work.begin() + lo, work.end());
    const double lo_value = work[lo];
    if (frac == 0.0 || lo + 1 >= work.size())
        return lo_value;
    // The next order statistic is the minimum of the upper partition.
    const double hi_value = *std::min_element(work.begin() + lo + 1, work.end());
    return lo_value + frac * (hi_value - lo_value);
}

namespace {

void require_ldr(const RasterImage& img, const char* op) {
    if (img.space() != ColorSpace::LdrSrgb)
        throw SpaceMismatch(std::string(op) + " expects LdrSrgb input, got " + std::string(to_string(img.space())));
}

float decode(float v, double gamma) {
    return static_cast<float>(std::pow(static_cast<double>(v), gamma));
}

} // namespace

RasterImage luminance(const RasterImage& ldr, ExposureValue ev, double gamma) {
    require_ldr(ldr, "luminance");
    if (ldr.channels() != 3)
        throw ChannelMismatch("luminance expects 3 channels");
    const double inv_gain = std::exp2(-ev.ev);
    RasterImage out(ldr.width(), ldr.height(), 1, ColorSpace::LinearLuminance);
    auto src = ldr.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double y = static_cast<double>(kLuminanceWeights[0]) * decode(src[3 * i], gamma) +
                         static_cast<double>(kLuminanceWeights[1]) * decode(src[3 * i + 1], gamma) +
                         static_cast<double>(kLuminanceWeights[2]) * decode(src[3 * i + 2], gamma);
        dst[i] = static_cast<float>(y * inv_gain);
    }
    return out;
}

RasterImage linearize(const RasterImage& ldr, double gamma) {
    require_ldr(ldr, "linearize");
    RasterImage out(ldr.width(), ldr.height(), ldr.channels(), ColorSpace::LinearHdr);
    auto src = ldr.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = decode(src[i], gamma);
    return out;
}

RasterImage merge_brackets(std::span<const RasterImage> images, std::span<const ExposureValue> evs, double gamma) {
    if (images.empty())
        throw LengthMismatch("merge needs at least one image");
    if (images.size() != evs.size())
        throw LengthMismatch(std::to_string(images.size()) + " images but " + std::to_string(evs.size()) + " EVs");
    if (evs[0].ev != 0.0)
        throw EvOrderError("first EV must be 0");
    for (std::size_t i = 1; i < evs.size(); ++i)
        if (!(evs[i].ev < evs[i - 1].ev))
            throw EvOrderError("EVs must be strictly descending");
    for (const auto& img : images) {
        require_ldr(img, "merge_brackets");
        if (!img.same_shape(images[0]) || img.channels() != 3)
            throw DimensionMismatch("bracket images must share 3-channel dimensions");
    }

    const std::size_t n = images.size();
    const auto& kernels = kernels::active();

    RasterImage acc = luminance(images[n - 1], evs[n - 1], gamma);
    RasterImage current;
    for (std::size_t step = n - 1; step-- > 0;) {
        current = luminance(images[step], evs[step], gamma);
        kernels.merge_step(acc.data(), current.data(), static_cast<float>(evs[step].gain()));
    }
    // After the loop `current` holds the EV0 luminance (or, with one image,
    // acc does and the ratio is 1).
    const RasterImage& base_luma = n == 1 ? acc : current;

    RasterImage out = linearize(images[0], gamma);
    auto rgb = out.data();
    auto merged = acc.data();
    auto base = base_luma.data();
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const float ratio = base[i] > 0.0f ? merged[i] / base[i] : 0.0f;
        rgb[3 * i] *= ratio;
        rgb[3 * i + 1] *= ratio;
        rgb[3 * i + 2] *= ratio;
    }
    return out;
}

double tonemap_scale(std::span<const float> samples, const ToneMapParams& params) {
    params.validate();
    const double p = percentile(samples, params.percentile);
    if (p <= 1e-12)
        return 0.0;
    return std::pow(params.target, params.gamma) / p;
}

double tonemap_scale(const RasterImage& hdr, const ToneMapParams& params) {
    return tonemap_scale(hdr.data(), params);
}

RasterImage tonemap_with_scale(const RasterImage& hdr, double scale, double gamma) {
    RasterImage out(hdr.width(), hdr.height(), hdr.channels(), ColorSpace::LdrSrgb);
    auto src = hdr.data();
    auto dst = out.data();
    const double inv_gamma = 1.0 / gamma;
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double v = scale * static_cast<double>(src[i]);
        dst[i] = v > 0.0 ? static_cast<float>(std::min(std::pow(v, inv_gamma), 1.0)) : 0.0f;
    }
    return out;
}

RasterImage tonemap(const RasterImage& hdr, const ToneMapParams& params) {
    return tonemap_with_scale(hdr, tonemap_scale(hdr, params), params.gamma);
}

RasterImage scaled(const RasterImage& img, double factor) {
    RasterImage out = img;
    for (float& v : out.data())
        v = static_cast<float>(static_cast<double>(v) * factor);
    return out;
}

} // namespace probelight
