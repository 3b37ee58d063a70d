#include "probelight/error.hpp"
#include "probelight/image_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

namespace probelight {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    // Whitespace-separated token; PFM headers are ASCII.
    std::string token() {
        while (pos_ < bytes_.size() && std::isspace(bytes_[pos_]))
            ++pos_;
        std::string out;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]))
            out.push_back(static_cast<char>(bytes_[pos_++]));
        if (out.empty())
            throw FormatError("truncated PFM header");
        return out;
    }

    // The header ends with exactly one whitespace byte after the scale.
    std::size_t data_offset() {
        if (pos_ >= bytes_.size())
            throw FormatError("PFM header not terminated");
        return pos_ + 1;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

int parse_dimension(const std::string& s) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        throw FormatError("bad PFM dimension '" + s + "'");
    }
    if (used != s.size() || v <= 0 || v > (1 << 24))
        throw FormatError("bad PFM dimension '" + s + "'");
    return static_cast<int>(v);
}

float decode_float(const std::uint8_t* p, bool little_endian) {
    std::uint32_t bits = 0;
    if (little_endian)
        bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
    else
        bits = std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[0]) << 24;
    return std::bit_cast<float>(bits);
}

} // namespace

RasterImage decode_pfm(std::span<const std::uint8_t> bytes) {
    HeaderReader reader(bytes);
    const std::string magic = reader.token();
    int channels = 0;
    if (magic == "PF")
        channels = 3;
    else if (magic == "Pf")
        channels = 1;
    else
        throw FormatError("bad PFM magic '" + magic + "'");

    const int width = parse_dimension(reader.token());
    const int height = parse_dimension(reader.token());
    const std::string scale_text = reader.token();
    double scale = 0.0;
    try {
        scale = std::stod(scale_text);
    } catch (const std::exception&) {
        throw FormatError("bad PFM scale '" + scale_text + "'");
    }
    if (scale == 0.0 || !std::isfinite(scale))
        throw FormatError("bad PFM scale '" + scale_text + "'");
    const bool little_endian = scale < 0.0;
    const float magnitude = static_cast<float>(std::fabs(scale));

    const std::size_t offset = reader.data_offset();
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() - offset < count * 4)
        throw FormatError("PFM payload truncated");

    RasterImage img(width, height, channels, ColorSpace::LinearHdr);
    auto out = img.data();
    const std::size_t row_samples = static_cast<std::size_t>(width) * channels;
    // PFM stores the bottom row first.
    for (int file_row = 0; file_row < height; ++file_row) {
        const std::uint8_t* src = bytes.data() + offset + file_row * row_samples * 4;
        float* dst = out.data() + static_cast<std::size_t>(height - 1 - file_row) * row_samples;
        for (std::size_t i = 0; i < row_samples; ++i) {
            const float v = decode_float(src + 4 * i, little_endian);
            dst[i] = magnitude == 1.0f ? v : v * magnitude;
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_pfm(const RasterImage& img) {
    if (img.width() <= 0 || img.height() <= 0)
        throw FormatError("cannot encode an empty image");
    const std::string header = std::string(img.channels() == 3 ? "PF" : "Pf") + "\n" +
                               std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n-1.0\n";
    const std::size_t row_samples = static_cast<std::size_t>(img.width()) * img.channels();
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + row_samples * img.height() * 4);
    auto src = img.data();
    for (int file_row = 0; file_row < img.height(); ++file_row) {
        const float* row = src.data() + static_cast<std::size_t>(img.height() - 1 - file_row) * row_samples;
        for (std::size_t i = 0; i < row_samples; ++i) {
            const auto bits = std::bit_cast<std::uint32_t>(row[i]);
            out.push_back(static_cast<std::uint8_t>(bits));
            out.push_back(static_cast<std::uint8_t>(bits >> 8));
            out.push_back(static_cast<std::uint8_t>(bits >> 16));
            out.push_back(static_cast<std::uint8_t>(bits >> 24));
        }
    }
    return out;
}

} // namespace probelight
