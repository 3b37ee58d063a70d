#include "probelight/backend.hpp"

#include "probelight/error.hpp"
#include "probelight/image_io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>

namespace probelight {

using nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                        static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0)
        throw ProtocolError("base64 payload length is not a multiple of 4");
    std::vector<std::uint8_t> out(3 * (text.size() / 4));
    const int written = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                        static_cast<int>(text.size()));
    if (written < 0)
        throw ProtocolError("invalid base64 payload");
    // EVP_DecodeBlock counts the padding bytes as zeros.
    std::size_t padding = 0;
    for (auto it = text.rbegin(); it != text.rend() && *it == '=' && padding < 2; ++it)
        ++padding;
    out.resize(static_cast<std::size_t>(written) - padding);
    return out;
}

void InpaintRequest::validate() const {
    if (image.channels() != 3 || image.space() != ColorSpace::LdrSrgb)
        throw ProtocolError("request image must be 3-channel LDR");
    if (image.width() <= 0 || image.height() <= 0)
        throw ProtocolError("request image is empty");
    if (mask.width() != image.width() || mask.height() != image.height())
        throw ProtocolError("mask size differs from image");
    if (depth.channels() != 1 || depth.width() != image.width() || depth.height() != image.height())
        throw ProtocolError("depth must be single-channel and match the image size");
    if (!(embed_weight >= 0.0 && embed_weight <= 1.0))
        throw ProtocolError("embed_weight must lie in [0, 1]");
    if (!(denoising_strength > 0.0 && denoising_strength <= 1.0))
        throw ProtocolError("denoising_strength must lie in (0, 1]");
    if (steps < 1)
        throw ProtocolError("steps must be >= 1");
    if (!std::isfinite(guidance) || !std::isfinite(lora_scale))
        throw ProtocolError("guidance and lora_scale must be finite");
}

namespace {

std::string png_field(const RasterImage& img) {
    return base64_encode(encode_png(img));
}

RasterImage image_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        throw ProtocolError(std::string("missing image field '") + key + "'");
    try {
        return decode_png(base64_decode(j[key].get<std::string>()));
    } catch (const FormatError& e) {
        throw ProtocolError(std::string("field '") + key + "': " + e.what());
    }
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ProtocolError(std::string("field '") + key + "' has the wrong type");
    }
}

json parse(const std::string& body) {
    try {
        json j = json::parse(body);
        if (!j.is_object())
            throw ProtocolError("JSON body must be an object");
        return j;
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what());
    }
}

} // namespace

std::string encode_request(const InpaintRequest& req) {
    req.validate();
    json j{
        {"image", png_field(req.image)},
        {"mask", png_field(req.mask.to_image())},
        {"depth", png_field(req.depth.with_space(ColorSpace::LdrSrgb))},
        {"prompt", req.prompt},
        {"negative_prompt", req.negative_prompt},
        {"embed_weight", req.embed_weight},
        {"denoising_strength", req.denoising_strength},
        {"seed", req.seed},
        {"steps", req.steps},
        {"guidance", req.guidance},
        {"lora_scale", req.lora_scale},
    };
    return j.dump();
}

InpaintRequest decode_request(const std::string& body) {
    const json j = parse(body);
    InpaintRequest req;
    req.image = image_field(j, "image");
    if (req.image.channels() != 3)
        throw ProtocolError("request image must be RGB");
    const RasterImage mask = image_field(j, "mask");
    if (mask.channels() != 1)
        throw ProtocolError("mask must be a single-channel PNG");
    req.mask = PixelMask::from_image(mask);
    req.depth = image_field(j, "depth");
    req.prompt = field<std::string>(j, "prompt", "");
    req.negative_prompt = field<std::string>(j, "negative_prompt", "");
    req.embed_weight = field<double>(j, "embed_weight", 0.0);
    req.denoising_strength = field<double>(j, "denoising_strength", 1.0);
    req.seed = field<std::uint64_t>(j, "seed", 0);
    req.steps = field<int>(j, "steps", 30);
    req.guidance = field<double>(j, "guidance", 5.0);
    req.lora_scale = field<double>(j, "lora_scale", 0.75);
    req.validate();
    return req;
}

std::string encode_response(const InpaintResponse& resp) {
    json j{
        {"image", png_field(resp.image)},
        {"backend_id", resp.backend_id},
        {"elapsed_ms", resp.elapsed_ms},
    };
    return j.dump();
}

InpaintResponse decode_response(const std::string& body) {
    const json j = parse(body);
    InpaintResponse resp;
    resp.image = image_field(j, "image");
    if (resp.image.channels() != 3)
        throw ProtocolError("response image must be RGB");
    resp.backend_id = field<std::string>(j, "backend_id", "");
    resp.elapsed_ms = field<std::int64_t>(j, "elapsed_ms", 0);
    return resp;
}

std::vector<InpaintResponse> InpaintBackend::inpaint_all(std::span<const InpaintRequest> requests) {
    std::vector<InpaintResponse> out;
    out.reserve(requests.size());
    for (const auto& req : requests)
        out.push_back(inpaint(req));
    return out;
}

} // namespace probelight
