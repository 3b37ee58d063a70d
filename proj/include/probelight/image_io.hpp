#pragma once

#include "probelight/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace probelight {

/// Loads a .png (-> LdrSrgb, v/255) or .pfm (-> LinearHdr) file.
RasterImage load_image(const std::filesystem::path& path);

/// Writes .png (LdrSrgb only, round(v*255)) or .pfm (any space, little-endian).
void save_image(const RasterImage& img, const std::filesystem::path& path);

// In-memory codecs, shared by the file functions and the backend wire format.

/// 8-bit PNG. Gray input gives a 1-channel image, RGB/RGBA a 3-channel one
/// (alpha dropped). 16-bit PNGs are rejected with FormatError.
RasterImage decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const RasterImage& img);

/// "PF" (3 channels) or "Pf" (1 channel). A negative scale means
/// little-endian samples; |scale| multiplies every sample on read.
RasterImage decode_pfm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pfm(const RasterImage& img);

} // namespace probelight
