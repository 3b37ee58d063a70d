#include "probelight/metrics.hpp"

#include "probelight/error.hpp"
#include "probelight/kernels.hpp"
#include "probelight/radiometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace probelight {

namespace {

void require_same_length(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw DimensionMismatch("metric inputs differ in length: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
}

void require_same_shape(const RasterImage& a, const RasterImage& b) {
    if (!a.same_shape(b))
        throw DimensionMismatch("metric inputs differ in shape");
}

std::vector<float> percentile_normalize(std::span<const float> x) {
    const double lo = percentile(x, 0.1);
    const double hi = percentile(x, 99.9);
    const double span = hi - lo;
    std::vector<float> out(x.size(), 0.0f);
    if (span < 1e-12)
        return out;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = static_cast<float>(std::clamp((x[i] - lo) / span, 0.0, 1.0));
    return out;
}

} // namespace

double si_rmse_scale(std::span<const float> pred, std::span<const float> gt) {
    require_same_length(pred, gt);
    const auto sums = kernels::active().dot_sums(pred, gt);
    return sums[1] > 0.0 ? sums[0] / sums[1] : 0.0;
}

double si_rmse(std::span<const float> pred, std::span<const float> gt) {
    require_same_length(pred, gt);
    if (pred.empty())
        return 0.0;
    const double s = si_rmse_scale(pred, gt);
    return std::sqrt(kernels::active().scaled_sq_diff(pred, gt, s) / static_cast<double>(pred.size()));
}

double si_rmse(const RasterImage& pred, const RasterImage& gt) {
    require_same_shape(pred, gt);
    return si_rmse(pred.data(), gt.data());
}

double rmse(std::span<const float> pred, std::span<const float> gt) {
    require_same_length(pred, gt);
    if (pred.empty())
        return 0.0;
    return std::sqrt(kernels::active().scaled_sq_diff(pred, gt, 1.0) / static_cast<double>(pred.size()));
}

double rmse(const RasterImage& pred, const RasterImage& gt) {
    require_same_shape(pred, gt);
    return rmse(pred.data(), gt.data());
}

double angular_error(std::span<const float> pred, std::span<const float> gt) {
    require_same_length(pred, gt);
    if (pred.size() % 3 != 0)
        throw ChannelMismatch("angular error needs interleaved RGB samples");
    const std::size_t pixels = pred.size() / 3;
    if (pixels == 0)
        return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) {
        const double p[3] = {pred[3 * i], pred[3 * i + 1], pred[3 * i + 2]};
        const double g[3] = {gt[3 * i], gt[3 * i + 1], gt[3 * i + 2]};
        const double np = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        const double ng = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        if (np < 1e-8 || ng < 1e-8)
            continue;
        const double c = (p[0] * g[0] + p[1] * g[1] + p[2] * g[2]) / (np * ng);
        total += std::acos(std::clamp(c, -1.0, 1.0));
    }
    return total / static_cast<double>(pixels) * 180.0 / std::numbers::pi;
}

double angular_error(const RasterImage& pred, const RasterImage& gt) {
    require_same_shape(pred, gt);
    if (pred.channels() != 3)
        throw ChannelMismatch("angular error needs 3-channel images");
    return angular_error(pred.data(), gt.data());
}

double normalized_rmse(std::span<const float> pred, std::span<const float> gt) {
    require_same_length(pred, gt);
    const auto np = percentile_normalize(pred);
    const auto ng = percentile_normalize(gt);
    return rmse(np, ng);
}

double normalized_rmse(const RasterImage& pred, const RasterImage& gt) {
    require_same_shape(pred, gt);
    return normalized_rmse(pred.data(), gt.data());
}

CameraCrop sample_random_camera(std::uint64_t seed, int width, int height) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> fov(30.0, 150.0);
    std::uniform_real_distribution<double> elevation(-45.0, 45.0);
    std::uniform_real_distribution<double> azimuth(0.0, 360.0);
    CameraCrop cam;
    cam.vfov_deg = fov(rng);
    cam.elevation_deg = elevation(rng);
    cam.azimuth_deg = azimuth(rng);
    cam.width = width;
    cam.height = height;
    return cam;
}

} // namespace probelight
