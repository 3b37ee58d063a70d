#pragma once

#include "probelight/geometry.hpp"
#include "probelight/image.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace probelight {

/// Least-squares scale s* = sum(p g) / sum(p^2) applied to the prediction;
/// 0 when the prediction is all zero.
double si_rmse_scale(std::span<const float> pred, std::span<const float> gt);

/// RMSE(s* p, g) over all samples.
double si_rmse(std::span<const float> pred, std::span<const float> gt);
double si_rmse(const RasterImage& pred, const RasterImage& gt);

/// Plain RMSE over all samples.
double rmse(std::span<const float> pred, std::span<const float> gt);
double rmse(const RasterImage& pred, const RasterImage& gt);

/// Mean per-pixel angle (degrees) between RGB vectors; samples are
/// interleaved RGB. Pixels where either vector is (near) zero count as 0.
double angular_error(std::span<const float> pred_rgb, std::span<const float> gt_rgb);
double angular_error(const RasterImage& pred, const RasterImage& gt);

/// RMSE after mapping each image's 0.1st/99.9th percentiles to 0/1.
double normalized_rmse(std::span<const float> pred, std::span<const float> gt);
double normalized_rmse(const RasterImage& pred, const RasterImage& gt);

struct MaterialScores {
    double si_rmse = 0.0;
    double angular_error_deg = 0.0;
    double normalized_rmse = 0.0;
    std::optional<double> rmse;
    std::size_t pixels = 0;
};

struct EvalReport {
    std::string protocol;
    MaterialScores diffuse;
    MaterialScores matte;   ///< absent in the array protocol (zero pixels)
    MaterialScores mirror;  ///< absent in the array protocol (zero pixels)
    std::optional<double> envmap_si_rmse; ///< whole-map si-RMSE when the maps share a size

    std::string to_json() const;
    std::string to_table() const;
};

struct ThreeSphereOptions {
    BallSpec sphere = BallSpec::centered(64, 64.0);
    MaterialParams materials;
    bool include_plain_rmse = true;
};

/// Renders diffuse, matte and mirror spheres from both maps and scores disk
/// pixels only.
EvalReport evaluate_three_spheres(const EnvironmentMap& pred, const EnvironmentMap& gt,
                                  const ThreeSphereOptions& options = {});

struct ArrayOptions {
    int rows = 3;
    int cols = 5;
    int sphere_diameter = 32;
    double azimuth_span_deg = 120.0;  ///< view azimuths spread across columns
    double elevation_span_deg = 40.0; ///< view elevations spread across rows
    double albedo = 0.5;
    bool include_plain_rmse = true;
};

/// Grid of diffuse spheres, each seen from its own view direction, scored
/// over all disk pixels of the grid.
EvalReport evaluate_sphere_array(const EnvironmentMap& pred, const EnvironmentMap& gt,
                                 const ArrayOptions& options = {});

/// Renders the array grid (exposed for the CLI and tests).
RasterImage render_sphere_array(const EnvironmentMap& env, const ArrayOptions& options, PixelMask* mask = nullptr);

/// Uniform FOV in [30, 150], elevation in [-45, 45], azimuth in [0, 360).
CameraCrop sample_random_camera(std::uint64_t seed, int width = 256, int height = 192);

} // namespace probelight
