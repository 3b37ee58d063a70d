#include "probelight/orchestrator.hpp"

#include "probelight/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace probelight {

void ProbeConfig::validate() const {
    if (n_balls < 1)
        throw ConfigError("n_balls must be >= 1");
    if (iterations < 1)
        throw ConfigError("iterations must be >= 1");
    if (!(strength > 0.0 && strength <= 1.0))
        throw ConfigError("strength must lie in (0, 1]");
    if (ev_list.empty() || ev_list.front().ev != 0.0)
        throw ConfigError("ev_list must start with 0");
    for (std::size_t i = 1; i < ev_list.size(); ++i)
        if (!(ev_list[i].ev < ev_list[i - 1].ev))
            throw ConfigError("ev_list must be strictly descending");
    if (!(ev_min < 0.0))
        throw ConfigError("ev_min must be negative");
    if (!(ev_min <= ev_list.back().ev))
        throw ConfigError("ev_min must not exceed the smallest EV");
    if (steps < 1)
        throw ConfigError("steps must be >= 1");
    if (env_height < 1)
        throw ConfigError("env_height must be >= 1");
    if (ball_spec.image_width != ball_spec.image_height)
        throw ConfigError("the backend canvas must be square");
    try {
        ball_spec.validate();
    } catch (const DegenerateSpec& e) {
        throw ConfigError(e.what());
    }
}

double prompt_weight(ExposureValue ev, ExposureValue ev_min) {
    if (!(ev_min.ev < 0.0))
        throw RangeError("ev_min must be negative");
    if (!(ev.ev >= ev_min.ev && ev.ev <= 0.0))
        throw RangeError("ev " + std::to_string(ev.ev) + " outside [" + std::to_string(ev_min.ev) + ", 0]");
    return ev.ev / ev_min.ev;
}

RasterImage letterbox(const RasterImage& img, int canvas) {
    if (img.width() <= 0 || img.height() <= 0)
        throw DimensionMismatch("cannot letterbox an empty image");
    const double scale = std::min(static_cast<double>(canvas) / img.width(), static_cast<double>(canvas) / img.height());
    const int w = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
    const int h = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
    const int x0 = (canvas - w) / 2, y0 = (canvas - h) / 2;
    const double sx = static_cast<double>(img.width()) / w;
    const double sy = static_cast<double>(img.height()) / h;

    RasterImage out(canvas, canvas, img.channels(), img.space());
    for (int y = 0; y < h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
        const int y0i = static_cast<int>(fy);
        const int y1i = std::min(y0i + 1, img.height() - 1);
        const double ty = fy - y0i;
        for (int x = 0; x < w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
            const int x0i = static_cast<int>(fx);
            const int x1i = std::min(x0i + 1, img.width() - 1);
            const double tx = fx - x0i;
            for (int c = 0; c < img.channels(); ++c) {
                const double top = (1.0 - tx) * img.at(x0i, y0i, c) + tx * img.at(x1i, y0i, c);
                const double bottom = (1.0 - tx) * img.at(x0i, y1i, c) + tx * img.at(x1i, y1i, c);
                out.at(x0 + x, y0 + y, c) = static_cast<float>((1.0 - ty) * top + ty * bottom);
            }
        }
    }
    return out;
}

std::vector<std::uint64_t> iteration_seeds(const ProbeConfig& cfg, int ev_index, int iteration) {
    const std::uint64_t base = cfg.base_seed + static_cast<std::uint64_t>(ev_index) * kEvSeedStride;
    const auto n = static_cast<std::uint64_t>(cfg.n_balls);
    if (iteration == cfg.iterations + 1)
        return {base + static_cast<std::uint64_t>(cfg.iterations) * n};
    if (iteration < 1 || iteration > cfg.iterations)
        throw RangeError("iteration out of range");
    std::vector<std::uint64_t> seeds(cfg.n_balls);
    for (std::uint64_t j = 0; j < n; ++j)
        seeds[j] = base + static_cast<std::uint64_t>(iteration - 1) * n + j;
    return seeds;
}

namespace {

RasterImage ball_crop(const RasterImage& canvas, const BallSpec& spec) {
    return crop(canvas, spec.crop_x0(), spec.crop_y0(), spec.crop_size(), spec.crop_size());
}

} // namespace

RasterImage iterative_inpaint(const RasterImage& input, const RasterImage& depth, InpaintBackend& backend,
                              const ProbeConfig& cfg, ExposureValue ev, int ev_index,
                              const InpaintObserver& observer) {
    cfg.validate();
    const BallSpec& spec = cfg.ball_spec;
    if (input.space() != ColorSpace::LdrSrgb || input.channels() != 3)
        throw ConfigError("input canvas must be 3-channel LDR");
    if (input.width() != spec.image_width || input.height() != spec.image_height)
        throw ConfigError("input canvas does not match the ball canvas size");

    const PixelMask mask = ball_mask(spec);
    const RasterImage painted_depth = paint_depth_circle(depth, spec, cfg.depth_fill);
    const double weight = prompt_weight(ev, ExposureValue{cfg.ev_min});

    auto make_request = [&](const RasterImage& canvas, double strength, std::uint64_t seed) {
        InpaintRequest req;
        req.image = canvas;
        req.mask = mask;
        req.depth = painted_depth;
        req.prompt = cfg.prompt;
        req.negative_prompt = cfg.negative_prompt;
        req.embed_weight = weight;
        req.denoising_strength = strength;
        req.seed = seed;
        req.steps = cfg.steps;
        req.guidance = cfg.guidance;
        req.lora_scale = cfg.lora_scale;
        return req;
    };

    RasterImage canvas = input;
    for (int i = 1; i <= cfg.iterations; ++i) {
        const double strength = i > 1 ? cfg.strength : 1.0;
        std::vector<InpaintRequest> requests;
        requests.reserve(cfg.n_balls);
        for (std::uint64_t seed : iteration_seeds(cfg, ev_index, i))
            requests.push_back(make_request(canvas, strength, seed));
        if (observer)
            for (const auto& r : requests)
                observer({ev_index, i, &r});

        const auto responses = backend.inpaint_all(requests);
        std::vector<RasterImage> balls;
        balls.reserve(responses.size());
        for (const auto& resp : responses)
            balls.push_back(ball_crop(resp.image, spec));

        RasterImage overlay = canvas;
        paste(overlay, pixelwise_median(balls), spec.crop_x0(), spec.crop_y0());
        canvas = composite(canvas, overlay, mask);
    }

    const InpaintRequest last = make_request(canvas, cfg.strength, iteration_seeds(cfg, ev_index, cfg.iterations + 1)[0]);
    if (observer)
        observer({ev_index, cfg.iterations + 1, &last});
    return ball_crop(backend.inpaint(last).image, spec);
}

ProbeResult probe(const RasterImage& input, const std::optional<RasterImage>& depth, InpaintBackend& backend,
                  const ProbeConfig& cfg, const InpaintObserver& observer) {
    cfg.validate();
    if (input.space() != ColorSpace::LdrSrgb || input.channels() != 3)
        throw ConfigError("probe input must be a 3-channel LDR image");
    const int canvas_size = cfg.ball_spec.image_width;
    const RasterImage canvas = letterbox(input, canvas_size);

    ProbeConfig run_cfg = cfg;
    RasterImage depth_canvas;
    if (depth) {
        if (depth->channels() != 1)
            throw ChannelMismatch("depth map must be single-channel");
        depth_canvas = letterbox(*depth, canvas_size);
    } else {
        // No depth network here: a flat map with a white disk still tells
        // the backend where the ball goes.
        depth_canvas = RasterImage(canvas_size, canvas_size, 1, ColorSpace::LdrSrgb, 0.5f);
        run_cfg.depth_fill = DepthFill::White;
    }

    ProbeResult result;
    for (std::size_t e = 0; e < cfg.ev_list.size(); ++e)
        result.ldr_balls.push_back(
            iterative_inpaint(canvas, depth_canvas, backend, run_cfg, cfg.ev_list[e], static_cast<int>(e), observer));

    result.hdr_ball = merge_brackets(result.ldr_balls, cfg.ev_list);
    result.env = ball_to_envmap(result.hdr_ball, cfg.ball_spec.in_crop(), cfg.env_height);
    return result;
}

} // namespace probelight
