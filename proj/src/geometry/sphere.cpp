#include "probelight/error.hpp"
#include "probelight/geometry.hpp"
#include "probelight/kernels.hpp"

#include <numbers>
#include <vector>

namespace probelight {

namespace {

// Texels with non-zero radiance, flattened for the lobe kernel. Weights
// carry radiance times texel solid angle.
struct TexelSet {
    std::vector<float> x, y, z, r, g, b;

    explicit TexelSet(const EnvironmentMap& env) {
        const std::size_t n = static_cast<std::size_t>(env.width()) * env.height();
        for (auto* v : {&x, &y, &z, &r, &g, &b})
            v->reserve(n);
        for (int row = 0; row < env.height(); ++row) {
            const double d_omega = env.texel_solid_angle(row);
            for (int col = 0; col < env.width(); ++col) {
                const auto px = env.image().pixel(col, row);
                if (px[0] == 0.0f && px[1] == 0.0f && px[2] == 0.0f)
                    continue;
                const Vec3 d = env.texel_direction(col, row);
                x.push_back(static_cast<float>(d.x));
                y.push_back(static_cast<float>(d.y));
                z.push_back(static_cast<float>(d.z));
                r.push_back(static_cast<float>(px[0] * d_omega));
                g.push_back(static_cast<float>(px[1] * d_omega));
                b.push_back(static_cast<float>(px[2] * d_omega));
            }
        }
    }

    kernels::DirectionalSamples view() const { return {x, y, z, r, g, b}; }
};

} // namespace

RasterImage render_sphere(const EnvironmentMap& env, Material material, const BallSpec& spec,
                          const MaterialParams& params, const ViewRotation& view) {
    if (material == Material::Mirror)
        return envmap_to_ball(env, spec, view).image;

    spec.validate();
    if (material == Material::Matte && params.matte_exponent < 1)
        throw RangeError("matte lobe exponent must be >= 1");

    const TexelSet texels(env);
    const auto samples = texels.view();
    const auto& kernels = kernels::active();

    const bool diffuse = material == Material::Diffuse;
    const int exponent = diffuse ? 1 : params.matte_exponent;
    // Diffuse: rho / pi * sum L max(0, n.w) dw.
    // Matte: normalized cosine-power lobe about the mirror direction,
    // (e + 1) / (2 pi) * sum L max(0, r.w)^e dw, scaled by the albedo.
    const double norm = diffuse ? params.diffuse_albedo / std::numbers::pi
                                : params.matte_albedo * (exponent + 1) / (2.0 * std::numbers::pi);

    RasterImage out(spec.image_width, spec.image_height, 3, ColorSpace::LinearHdr);
    const int x0 = spec.crop_x0(), y0 = spec.crop_y0(), size = spec.crop_size();
    for (int y = std::max(y0, 0); y < std::min(y0 + size, spec.image_height); ++y) {
        for (int x = std::max(x0, 0); x < std::min(x0 + size, spec.image_width); ++x) {
            if (!spec.contains(x, y))
                continue;
            const auto [a, b] = spec.disk_coords(x, y);
            const Vec3 n{a, b, std::sqrt(std::max(0.0, 1.0 - a * a - b * b))};
            const Vec3 lobe_axis = diffuse ? n : Vec3{2.0 * n.z * n.x, 2.0 * n.z * n.y, 2.0 * n.z * n.z - 1.0};
            const Vec3 world = view.apply(lobe_axis);
            const std::array<float, 3> axis{static_cast<float>(world.x), static_cast<float>(world.y),
                                            static_cast<float>(world.z)};
            const auto sum = kernels.lobe_sum(samples, axis, exponent);
            auto px = out.pixel(x, y);
            for (int c = 0; c < 3; ++c)
                px[c] = static_cast<float>(norm * sum[c]);
        }
    }
    return out;
}

} // namespace probelight
