#include "probelight/image_io.hpp"

#include "probelight/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace probelight {

namespace {

enum class FileKind { Png, Pfm };

FileKind kind_of(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png")
        return FileKind::Png;
    if (ext == ".pfm")
        return FileKind::Pfm;
    throw FormatError("unsupported extension '" + ext + "' (expected .png or .pfm)");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed for " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed for " + path.string());
}

} // namespace

RasterImage load_image(const std::filesystem::path& path) {
    const FileKind kind = kind_of(path);
    const auto bytes = read_file(path);
    RasterImage img = kind == FileKind::Png ? decode_png(bytes) : decode_pfm(bytes);
    if (kind == FileKind::Pfm)
        img.validate();
    return img;
}

void save_image(const RasterImage& img, const std::filesystem::path& path) {
    const FileKind kind = kind_of(path);
    // Encode fully before touching the filesystem so failures leave no partial file.
    const auto bytes = kind == FileKind::Png ? encode_png(img) : encode_pfm(img);
    write_file(path, bytes);
}

} // namespace probelight
