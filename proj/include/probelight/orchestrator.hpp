#pragma once

#include "probelight/aggregation.hpp"
#include "probelight/backend.hpp"
#include "probelight/geometry.hpp"
#include "probelight/radiometry.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace probelight {

struct ProbeConfig {
    int n_balls = 30;       ///< samples per median iteration
    int iterations = 2;     ///< median iterations
    double strength = 0.8;  ///< denoising strength after the first iteration
    std::vector<ExposureValue> ev_list{ExposureValue{0.0}, ExposureValue{-2.5}, ExposureValue{-5.0}};
    double ev_min = -5.0;
    std::string prompt = "a perfect mirrored reflective chrome ball sphere";
    std::string negative_prompt = "matte, diffuse, flat, dull";
    int steps = 30;
    double guidance = 5.0;
    double lora_scale = 0.75;
    BallSpec ball_spec = BallSpec::centered(1024, 256.0);
    std::uint64_t base_seed = 0;
    int env_height = 128;
    DepthFill depth_fill = DepthFill::SceneMax;

    /// Throws ConfigError on invariant violations.
    void validate() const;
};

/// Seed offset between exposure brackets.
inline constexpr std::uint64_t kEvSeedStride = 1'000'000;

/// Prompt-embedding interpolation weight ev / ev_min.
double prompt_weight(ExposureValue ev, ExposureValue ev_min);

/// Observer for individual backend round trips (logging, tests).
struct InpaintEvent {
    int ev_index = 0;
    int iteration = 0; ///< 1-based; iterations + 1 marks the final request
    const InpaintRequest* request = nullptr;
};
using InpaintObserver = std::function<void(const InpaintEvent&)>;

/// Aspect-preserving bilinear resize into a square canvas, letterboxed with black.
RasterImage letterbox(const RasterImage& img, int canvas);

/// Seeds used by one iteration (1-based) or by the final request
/// (iteration == iterations + 1) for bracket `ev_index`.
std::vector<std::uint64_t> iteration_seeds(const ProbeConfig& cfg, int ev_index, int iteration);

/// Iterative median inpainting for one exposure. `input` is the LDR canvas,
/// `depth` a single-channel map of the same size. Returns the ball crop
/// (cfg.ball_spec.crop_size() square, LdrSrgb) of the final request.
RasterImage iterative_inpaint(const RasterImage& input, const RasterImage& depth, InpaintBackend& backend,
                              const ProbeConfig& cfg, ExposureValue ev, int ev_index = 0,
                              const InpaintObserver& observer = {});

struct ProbeResult {
    EnvironmentMap env;
    std::vector<RasterImage> ldr_balls; ///< one crop per EV, in ev_list order
    RasterImage hdr_ball;               ///< merged linear ball crop
};

/// Full pipeline: one iterative inpaint per EV, luminance merge in ball
/// space, then a single unwrap to an equirectangular map.
ProbeResult probe(const RasterImage& input, const std::optional<RasterImage>& depth, InpaintBackend& backend,
                  const ProbeConfig& cfg, const InpaintObserver& observer = {});

} // namespace probelight
