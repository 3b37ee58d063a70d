#include "probelight/aggregation.hpp"
#include "probelight/backend.hpp"
#include "probelight/error.hpp"
#include "probelight/radiometry.hpp"

#include <chrono>
#include <cmath>

namespace probelight {

namespace {

constexpr int kCheckerCell = 8;

} // namespace

void MockConfig::validate() const {
    if (env_map.height() <= 0)
        throw ConfigError("mock needs an environment map");
    ball_spec.validate();
    if (!(corrupt_fraction >= 0.0 && corrupt_fraction < 1.0))
        throw ConfigError("corrupt_fraction must lie in [0, 1)");
    if (!(ev_min < 0.0))
        throw ConfigError("ev_min must be negative");
}

MockBackend::MockBackend(MockConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const BallSpec& spec = cfg_.ball_spec;
    const BallRender full = envmap_to_ball(cfg_.env_map, spec);
    hdr_crop_ = crop(full.image, spec.crop_x0(), spec.crop_y0(), spec.crop_size(), spec.crop_size());

    // The EV0 tone-map scale comes from disk pixels only and is shared by
    // every exposure, so brackets stay radiometrically consistent.
    std::vector<float> disk;
    for (int y = 0; y < spec.image_height; ++y)
        for (int x = 0; x < spec.image_width; ++x)
            if (full.mask.at(x, y) > 0.5f)
                for (float v : full.image.pixel(x, y))
                    disk.push_back(v);
    scale_ = tonemap_scale(disk);
}

bool MockBackend::is_corrupt(std::uint64_t seed) const {
    return static_cast<double>(seed % 1000) / 1000.0 < cfg_.corrupt_fraction;
}

RasterImage MockBackend::clean_ball(double ev) const {
    return quantize_8bit(tonemap_with_scale(hdr_crop_, scale_ * std::exp2(ev)));
}

RasterImage MockBackend::corruption_pattern() const {
    const int size = hdr_crop_.width();
    RasterImage out(size, size, 3, ColorSpace::LdrSrgb);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            float v = 0.5f;
            if (cfg_.corruption == Corruption::Checkerboard)
                v = ((x / kCheckerCell + y / kCheckerCell) % 2) ? 1.0f : 0.0f;
            for (float& s : out.pixel(x, y))
                s = v;
        }
    return out;
}

InpaintResponse MockBackend::inpaint(const InpaintRequest& req) {
    const auto start = std::chrono::steady_clock::now();
    req.validate();
    const BallSpec& spec = cfg_.ball_spec;
    if (req.image.width() != spec.image_width || req.image.height() != spec.image_height)
        throw ProtocolError("request canvas " + std::to_string(req.image.width()) + "x" +
                            std::to_string(req.image.height()) + " does not match the mock's " +
                            std::to_string(spec.image_width) + "x" + std::to_string(spec.image_height));

    // What the request would look like after PNG transport.
    const RasterImage image = quantize_8bit(req.image);
    PixelMask mask = req.mask;
    for (float& m : mask.data())
        m = static_cast<float>(std::lround(m * 255.0f)) / 255.0f;

    const RasterImage fresh_crop =
        is_corrupt(req.seed) ? corruption_pattern() : clean_ball(req.embed_weight * cfg_.ev_min);
    RasterImage fresh(image.width(), image.height(), 3, ColorSpace::LdrSrgb);
    paste(fresh, fresh_crop, spec.crop_x0(), spec.crop_y0());

    // SDEdit analogue: strength 1 ignores the input, small strengths hug it.
    const PixelMask strength(image.width(), image.height(), static_cast<float>(req.denoising_strength));
    const RasterImage blended = composite(image, fresh, strength);

    InpaintResponse resp;
    resp.image = quantize_8bit(composite(image, blended, mask));
    resp.backend_id = "probelight-mock";
    resp.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                          .count();
    return resp;
}

InpaintResponse mock_inpaint(const InpaintRequest& req, const MockConfig& cfg) {
    MockBackend backend(cfg);
    return backend.inpaint(req);
}

} // namespace probelight
