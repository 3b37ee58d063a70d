#include "probelight/aggregation.hpp"
#include "probelight/error.hpp"
#include "probelight/metrics.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>
#include <vector>

namespace probelight {

namespace {

std::vector<float> masked_samples(const RasterImage& img, const PixelMask& mask) {
    std::vector<float> out;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (mask.at(x, y) > 0.5f)
                for (float v : img.pixel(x, y))
                    out.push_back(v);
    return out;
}

MaterialScores score(const RasterImage& pred, const RasterImage& gt, const PixelMask& mask, bool plain_rmse) {
    const auto p = masked_samples(pred, mask);
    const auto g = masked_samples(gt, mask);
    MaterialScores s;
    s.pixels = p.size() / 3;
    s.si_rmse = si_rmse(p, g);
    s.angular_error_deg = angular_error(p, g);
    s.normalized_rmse = normalized_rmse(p, g);
    if (plain_rmse)
        s.rmse = rmse(p, g);
    return s;
}

std::optional<double> whole_map_si_rmse(const EnvironmentMap& pred, const EnvironmentMap& gt) {
    if (!pred.image().same_shape(gt.image()))
        return std::nullopt;
    return si_rmse(pred.image(), gt.image());
}

nlohmann::json scores_json(const MaterialScores& s) {
    nlohmann::json j{
        {"si_rmse", s.si_rmse},
        {"angular_error_deg", s.angular_error_deg},
        {"normalized_rmse", s.normalized_rmse},
        {"pixels", s.pixels},
    };
    if (s.rmse)
        j["rmse"] = *s.rmse;
    return j;
}

} // namespace

EvalReport evaluate_three_spheres(const EnvironmentMap& pred, const EnvironmentMap& gt,
                                  const ThreeSphereOptions& options) {
    const PixelMask mask = ball_mask(options.sphere);
    EvalReport report;
    report.protocol = "three-sphere";
    auto run = [&](Material m) {
        return score(render_sphere(pred, m, options.sphere, options.materials),
                     render_sphere(gt, m, options.sphere, options.materials), mask, options.include_plain_rmse);
    };
    report.diffuse = run(Material::Diffuse);
    report.matte = run(Material::Matte);
    report.mirror = run(Material::Mirror);
    report.envmap_si_rmse = whole_map_si_rmse(pred, gt);
    return report;
}

RasterImage render_sphere_array(const EnvironmentMap& env, const ArrayOptions& options, PixelMask* mask) {
    if (options.rows < 1 || options.cols < 1 || options.sphere_diameter < 4)
        throw RangeError("sphere array needs >= 1 row/column and diameter >= 4");
    const int d = options.sphere_diameter;
    RasterImage grid(options.cols * d, options.rows * d, 3, ColorSpace::LinearHdr);
    PixelMask grid_mask(options.cols * d, options.rows * d);
    const BallSpec tile = BallSpec::centered(d, d);
    const PixelMask tile_mask = ball_mask(tile);
    MaterialParams params;
    params.diffuse_albedo = options.albedo;

    auto spread = [](int i, int n, double span) { return n == 1 ? 0.0 : span * (static_cast<double>(i) / (n - 1) - 0.5); };
    for (int r = 0; r < options.rows; ++r) {
        for (int c = 0; c < options.cols; ++c) {
            // Top row looks down on its sphere, bottom row looks up.
            const ViewRotation view{spread(c, options.cols, options.azimuth_span_deg),
                                    -spread(r, options.rows, options.elevation_span_deg)};
            paste(grid, render_sphere(env, Material::Diffuse, tile, params, view), c * d, r * d);
            for (int y = 0; y < d; ++y)
                for (int x = 0; x < d; ++x)
                    grid_mask.at(c * d + x, r * d + y) = tile_mask.at(x, y);
        }
    }
    if (mask)
        *mask = std::move(grid_mask);
    return grid;
}

EvalReport evaluate_sphere_array(const EnvironmentMap& pred, const EnvironmentMap& gt, const ArrayOptions& options) {
    PixelMask mask;
    const RasterImage p = render_sphere_array(pred, options, &mask);
    const RasterImage g = render_sphere_array(gt, options);
    EvalReport report;
    report.protocol = "array";
    report.diffuse = score(p, g, mask, options.include_plain_rmse);
    report.envmap_si_rmse = whole_map_si_rmse(pred, gt);
    return report;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["protocol"] = protocol;
    j["diffuse"] = scores_json(diffuse);
    if (matte.pixels > 0)
        j["matte"] = scores_json(matte);
    if (mirror.pixels > 0)
        j["mirror"] = scores_json(mirror);
    if (envmap_si_rmse)
        j["envmap"] = {{"si_rmse", *envmap_si_rmse}};
    return j.dump(2);
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out << "protocol: " << protocol << "\n";
    out << std::left << std::setw(10) << "material" << std::right << std::setw(12) << "si-RMSE" << std::setw(14)
        << "angular(deg)" << std::setw(12) << "norm-RMSE" << std::setw(12) << "RMSE" << std::setw(10) << "pixels"
        << "\n";
    auto row = [&](const char* name, const MaterialScores& s) {
        if (s.pixels == 0)
            return;
        out << std::left << std::setw(10) << name << std::right << std::fixed << std::setprecision(4) << std::setw(12)
            << s.si_rmse << std::setw(14) << s.angular_error_deg << std::setw(12) << s.normalized_rmse;
        if (s.rmse)
            out << std::setw(12) << *s.rmse;
        else
            out << std::setw(12) << "-";
        out << std::setw(10) << s.pixels << "\n";
    };
    row("diffuse", diffuse);
    row("matte", matte);
    row("mirror", mirror);
    if (envmap_si_rmse)
        out << "envmap si-RMSE: " << std::fixed << std::setprecision(6) << *envmap_si_rmse << "\n";
    return out.str();
}

} // namespace probelight
