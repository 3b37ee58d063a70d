#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace probelight {

/// Colorimetric interpretation of a raster's samples.
enum class ColorSpace {
    LdrSrgb,         ///< display-referred, samples in [0,1]
    LinearHdr,       ///< linear radiance, samples >= 0
    LinearLuminance, ///< single-channel linear luminance, samples >= 0
};

std::string_view to_string(ColorSpace space);

/// Row-major, channel-interleaved float image. Row 0 is the top row.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, ColorSpace space, float fill = 0.0f);
    RasterImage(int width, int height, int channels, ColorSpace space, std::vector<float> data);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    ColorSpace space() const { return space_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    std::size_t sample_count() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
    float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

    std::span<float> pixel(int x, int y) { return {data_.data() + index(x, y, 0), static_cast<std::size_t>(channels_)}; }
    std::span<const float> pixel(int x, int y) const { return {data_.data() + index(x, y, 0), static_cast<std::size_t>(channels_)}; }

    /// Same samples, different tag. Does not check range invariants.
    RasterImage with_space(ColorSpace space) const;

    bool same_shape(const RasterImage& other) const {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    /// Throws FormatError if the range invariants of the tagged space are violated.
    void validate() const;

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    ColorSpace space_ = ColorSpace::LdrSrgb;
    std::vector<float> data_;
};

/// Per-pixel weights in [0,1].
class PixelMask {
public:
    PixelMask() = default;
    PixelMask(int width, int height, float fill = 0.0f);
    PixelMask(int width, int height, std::vector<float> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return data_.size(); }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    double total() const;

    /// Single-channel LdrSrgb view of the mask (for PNG transport).
    RasterImage to_image() const;
    /// Reads channel 0 of a single-channel image; throws ChannelMismatch otherwise.
    static PixelMask from_image(const RasterImage& img);

    friend bool operator==(const PixelMask&, const PixelMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// Rectangular sub-image copy. The rectangle must lie inside the image.
RasterImage crop(const RasterImage& img, int x0, int y0, int width, int height);

/// Writes `patch` into `img` with its top-left corner at (x0, y0).
void paste(RasterImage& img, const RasterImage& patch, int x0, int y0);

/// Rounds LdrSrgb samples to the nearest 8-bit level, v -> round(v*255)/255.
RasterImage quantize_8bit(const RasterImage& img);

} // namespace probelight
