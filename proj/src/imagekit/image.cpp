#include "probelight/image.hpp"

#include "probelight/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace probelight {

std::string_view to_string(ColorSpace space) {
    switch (space) {
    case ColorSpace::LdrSrgb: return "LdrSrgb";
    case ColorSpace::LinearHdr: return "LinearHdr";
    case ColorSpace::LinearLuminance: return "LinearLuminance";
    }
    return "?";
}

namespace {

void check_shape(int width, int height, int channels) {
    if (width < 0 || height < 0)
        throw DimensionMismatch("negative image size");
    if (channels != 1 && channels != 3)
        throw ChannelMismatch("images carry 1 or 3 channels, got " + std::to_string(channels));
}

} // namespace

RasterImage::RasterImage(int width, int height, int channels, ColorSpace space, float fill)
    : width_(width), height_(height), channels_(channels), space_(space) {
    check_shape(width, height, channels);
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, ColorSpace space, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), space_(space), data_(std::move(data)) {
    check_shape(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels)
        throw DimensionMismatch("data length " + std::to_string(data_.size()) + " does not match " +
                                std::to_string(width) + "x" + std::to_string(height) + "x" +
                                std::to_string(channels));
}

RasterImage RasterImage::with_space(ColorSpace space) const {
    RasterImage out = *this;
    out.space_ = space;
    return out;
}

void RasterImage::validate() const {
    for (float v : data_) {
        if (!std::isfinite(v))
            throw FormatError("non-finite sample");
        if (v < 0.0f)
            throw FormatError("negative sample in " + std::string(to_string(space_)) + " image");
        if (space_ == ColorSpace::LdrSrgb && v > 1.0f)
            throw FormatError("LdrSrgb sample above 1");
    }
}

PixelMask::PixelMask(int width, int height, float fill) : width_(width), height_(height) {
    if (width < 0 || height < 0)
        throw DimensionMismatch("negative mask size");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

PixelMask::PixelMask(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(width) * height)
        throw DimensionMismatch("mask data length mismatch");
    for (float v : data_)
        if (!(v >= 0.0f && v <= 1.0f))
            throw FormatError("mask sample outside [0,1]");
}

double PixelMask::total() const {
    return std::accumulate(data_.begin(), data_.end(), 0.0);
}

RasterImage PixelMask::to_image() const {
    return RasterImage(width_, height_, 1, ColorSpace::LdrSrgb, data_);
}

PixelMask PixelMask::from_image(const RasterImage& img) {
    if (img.channels() != 1)
        throw ChannelMismatch("mask image must be single-channel");
    auto d = img.data();
    return PixelMask(img.width(), img.height(), std::vector<float>(d.begin(), d.end()));
}

RasterImage crop(const RasterImage& img, int x0, int y0, int width, int height) {
    if (x0 < 0 || y0 < 0 || width < 0 || height < 0 || x0 + width > img.width() || y0 + height > img.height())
        throw DimensionMismatch("crop rectangle outside image");
    RasterImage out(width, height, img.channels(), img.space());
    const std::size_t row = static_cast<std::size_t>(width) * img.channels();
    for (int y = 0; y < height; ++y) {
        auto src = img.pixel(x0, y0 + y);
        std::copy_n(src.data(), row, out.pixel(0, y).data());
    }
    return out;
}

void paste(RasterImage& img, const RasterImage& patch, int x0, int y0) {
    if (patch.channels() != img.channels())
        throw ChannelMismatch("paste channel count differs");
    if (x0 < 0 || y0 < 0 || x0 + patch.width() > img.width() || y0 + patch.height() > img.height())
        throw DimensionMismatch("paste rectangle outside image");
    const std::size_t row = static_cast<std::size_t>(patch.width()) * patch.channels();
    for (int y = 0; y < patch.height(); ++y)
        std::copy_n(patch.pixel(0, y).data(), row, img.pixel(x0, y0 + y).data());
}

RasterImage quantize_8bit(const RasterImage& img) {
    RasterImage out = img;
    for (float& v : out.data()) {
        const float c = std::clamp(v, 0.0f, 1.0f);
        v = static_cast<float>(std::lround(c * 255.0f)) / 255.0f;
    }
    return out;
}

} // namespace probelight
