#include "probelight/error.hpp"
#include "probelight/geometry.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace probelight;

namespace {

constexpr double kPi = std::numbers::pi;

bool rgb_near(const Rgb& a, const Rgb& b, double tol) {
    for (int c = 0; c < 3; ++c)
        if (std::abs(a[c] - b[c]) > tol)
            return false;
    return true;
}

Rgb pixel_rgb(const RasterImage& img, int x, int y) {
    return {img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
}

} // namespace

TEST_CASE("direction and uv mappings are mutually inverse") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uu(0.01, 0.99), vv(0.01, 0.99);
    for (int i = 0; i < 1000; ++i) {
        const double u = uu(rng), v = vv(rng);
        const auto back = direction_to_uv(uv_to_direction(u, v));
        CHECK(std::abs(back[0] - u) < 1e-12);
        CHECK(std::abs(back[1] - v) < 1e-12);
    }
    const auto fwd = direction_to_uv({0, 0, -1});
    CHECK(fwd[0] == doctest::Approx(0.5));
    CHECK(fwd[1] == doctest::Approx(0.5));
    CHECK(direction_to_uv({0, 1, 0})[1] == doctest::Approx(0.0));
    const auto right = direction_to_uv({1, 0, 0});
    CHECK(right[0] == doctest::Approx(0.75));
}

TEST_CASE("environment map shape and sampling") {
    CHECK_THROWS_AS(EnvironmentMap(RasterImage(10, 4, 3, ColorSpace::LinearHdr)), DimensionMismatch);
    CHECK_THROWS_AS(EnvironmentMap(RasterImage(8, 4, 1, ColorSpace::LinearHdr)), ChannelMismatch);

    // Texel centres sample exactly; horizontal seam wraps.
    RasterImage img(8, 4, 3, ColorSpace::LinearHdr);
    for (int x = 0; x < 8; ++x)
        for (int c = 0; c < 3; ++c)
            img.at(x, 1, c) = static_cast<float>(x);
    const EnvironmentMap env(img);
    CHECK(env.sample_uv(2.5 / 8.0, 1.5 / 4.0)[0] == 2.0f);
    CHECK(env.sample_uv(0.0, 1.5 / 4.0)[0] == doctest::Approx(3.5)); // halfway between x=7 and x=0
    CHECK(env.sample_uv(1.0, 1.5 / 4.0)[0] == doctest::Approx(3.5));
    // Vertical clamp at the poles.
    CHECK(env.sample_uv(2.5 / 8.0, 0.0)[0] == 0.0f);

    double total = 0.0;
    for (int y = 0; y < 64; ++y)
        total += 128 * testing::constant_env(64, 1.0f).texel_solid_angle(y);
    CHECK(total == doctest::Approx(4.0 * kPi).epsilon(1e-3));
}

TEST_CASE("BallSpec membership and crop") {
    const BallSpec spec = BallSpec::centered(1024, 256.0);
    CHECK(spec.radius == 128.0);
    CHECK(spec.contains(512, 512));
    CHECK_FALSE(spec.contains(512 + 130, 512));
    CHECK(spec.crop_x0() == 384);
    CHECK(spec.crop_size() == 256);
    const BallSpec local = spec.in_crop();
    CHECK(local.center_x == 128.0);
    CHECK(local.image_width == 256);

    CHECK_THROWS_AS((BallSpec{10, 10, 20, 64, 64}.validate()), DegenerateSpec);
    CHECK_THROWS_AS((BallSpec{10, 10, 0, 64, 64}.validate()), DegenerateSpec);
}

TEST_CASE("envmap_to_ball examples") {
    SUBCASE("constant environment") {
        const BallRender r = envmap_to_ball(testing::constant_env(16, 2.5f), BallSpec::centered(40, 32.0));
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 40; ++x) {
                const bool inside = BallSpec::centered(40, 32.0).contains(x, y);
                CHECK(r.mask.at(x, y) == (inside ? 1.0f : 0.0f));
                CHECK(r.image.at(x, y, 1) == (inside ? 2.5f : 0.0f));
            }
    }
    SUBCASE("centre pixel reflects the backward direction") {
        const EnvironmentMap env = testing::sky_env(32);
        const BallSpec spec{2.5, 2.5, 2.5, 5, 5};
        const BallRender r = envmap_to_ball(env, spec);
        CHECK(rgb_near(pixel_rgb(r.image, 2, 2), env.sample_uv(0.0, 0.5), 1e-6));
        CHECK(rgb_near(env.sample_uv(0.0, 0.5), env.sample_uv(1.0, 0.5), 1e-6));
    }
    SUBCASE("top rim reflects the forward direction") {
        // n = (0, 1, 0): r = 2 n_z n - v = (0, 0, -1).
        const Vec3 n{0.0, 1.0, 0.0};
        const Vec3 r{2.0 * n.z * n.x, 2.0 * n.z * n.y, 2.0 * n.z * n.z - 1.0};
        const auto uv = direction_to_uv(r);
        CHECK(uv[0] == doctest::Approx(0.5));
        CHECK(uv[1] == doctest::Approx(0.5));
        // Pixels approaching the top of the silhouette reflect towards it.
        const BallSpec spec{256.5, 256.5, 256.0, 513, 513};
        double previous = 0.0;
        for (int y : {64, 16, 4, 0}) {
            const auto [a, b] = spec.disk_coords(256, y);
            const double nz = std::sqrt(1.0 - a * a - b * b);
            const double forward = -(2.0 * nz * nz - 1.0);
            CHECK(forward > previous);
            previous = forward;
        }
        CHECK(previous > 0.999);
    }
}

TEST_CASE("ball_to_envmap examples") {
    SUBCASE("constant disk") {
        const BallSpec spec = BallSpec::centered(24, 24.0);
        const RasterImage ball = envmap_to_ball(testing::constant_env(8, 0.7f), spec).image;
        const EnvironmentMap env = ball_to_envmap(ball, spec, 16);
        for (float v : env.image().data())
            CHECK(v == doctest::Approx(0.7f));
    }
    SUBCASE("backward direction hits the centre pixel exactly") {
        const BallSpec spec{256.5, 256.5, 256.0, 513, 513};
        RasterImage ball = testing::random_image(513, 513, 3, ColorSpace::LinearHdr, 8);
        const Rgb got = sample_ball(ball, spec, {0.0, 0.0, 1.0});
        CHECK(got == pixel_rgb(ball, 256, 256));
    }
    SUBCASE("forward blind spot is finite and taken from the rim") {
        const BallSpec spec = BallSpec::centered(64, 64.0);
        const RasterImage ball = envmap_to_ball(testing::sky_env(32), spec).image;
        const Rgb fwd = sample_ball(ball, spec, {0.0, 0.0, -1.0});
        for (float v : fwd)
            CHECK(std::isfinite(v));
        CHECK(fwd[0] > 0.0f);
    }
    SUBCASE("tiny radius is rejected") {
        const RasterImage ball(3, 3, 3, ColorSpace::LinearHdr);
        CHECK_THROWS_AS(ball_to_envmap(ball, BallSpec{1.5, 1.5, 1.5, 3, 3}, 8), DegenerateSpec);
    }
}

TEST_CASE("mirror round trip stays within 2% outside the forward cone") {
    const EnvironmentMap env = testing::sky_env(128);
    const BallSpec spec = BallSpec::centered(512, 512.0);
    const RasterImage ball = envmap_to_ball(env, spec).image;
    const EnvironmentMap back = ball_to_envmap(ball, spec, 128);
    const double cone = std::cos(10.0 * kPi / 180.0);
    double total = 0.0;
    int count = 0;
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 256; ++x) {
            const Vec3 d = env.texel_direction(x, y);
            if (-d.z > cone)
                continue;
            double num = 0.0, den = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double g = env.image().at(x, y, c), p = back.image().at(x, y, c);
                num += (p - g) * (p - g);
                den += g * g;
            }
            total += std::sqrt(num / den);
            ++count;
        }
    CHECK(total / count < 0.02);
}

TEST_CASE("crop_perspective examples") {
    const EnvironmentMap env = testing::sky_env(64);
    CameraCrop cam;
    cam.width = 3;
    cam.height = 3;
    SUBCASE("forward") {
        const RasterImage out = crop_perspective(env, cam);
        CHECK(rgb_near(pixel_rgb(out, 1, 1), env.sample_uv(0.5, 0.5), 1e-6));
    }
    SUBCASE("azimuth 180 looks at the seam") {
        cam.azimuth_deg = 180.0;
        const RasterImage out = crop_perspective(env, cam);
        CHECK(rgb_near(pixel_rgb(out, 1, 1), env.sample_uv(0.0, 0.5), 1e-5));
    }
    SUBCASE("positive elevation looks up") {
        cam.elevation_deg = 30.0;
        const RasterImage out = crop_perspective(env, cam);
        CHECK(rgb_near(pixel_rgb(out, 1, 1), env.sample_uv(0.5, 60.0 / 180.0), 1e-5));
    }
    SUBCASE("invalid cameras") {
        cam.vfov_deg = 180.0;
        CHECK_THROWS_AS(crop_perspective(env, cam), RangeError);
        cam.vfov_deg = 60.0;
        cam.elevation_deg = 90.0;
        CHECK_THROWS_AS(crop_perspective(env, cam), RangeError);
    }
}

TEST_CASE("render_sphere examples") {
    const BallSpec spec = BallSpec::centered(24, 24.0);

    SUBCASE("constant environment, all materials") {
        const EnvironmentMap env = testing::constant_env(256, 3.0f);
        const RasterImage diffuse = render_sphere(env, Material::Diffuse, spec);
        const RasterImage matte = render_sphere(env, Material::Matte, spec);
        const RasterImage mirror = render_sphere(env, Material::Mirror, spec);
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x) {
                if (!spec.contains(x, y)) {
                    CHECK(diffuse.at(x, y, 0) == 0.0f);
                    continue;
                }
                for (int c = 0; c < 3; ++c) {
                    CHECK(std::abs(diffuse.at(x, y, c) - 1.5) <= 1.5e-3);
                    CHECK(std::abs(matte.at(x, y, c) - 2.7) <= 2.7e-2);
                    CHECK(mirror.at(x, y, c) == 3.0f);
                }
            }
    }

    SUBCASE("delta light follows the cosine law") {
        const int h = 256;
        RasterImage img(2 * h, h, 3, ColorSpace::LinearHdr);
        const int lx = 300, ly = 70;
        for (int c = 0; c < 3; ++c)
            img.at(lx, ly, c) = 1000.0f;
        const EnvironmentMap env(img);
        const Vec3 light = env.texel_direction(lx, ly);
        const double peak = 0.5 / kPi * 1000.0 * env.texel_solid_angle(ly);
        const RasterImage out = render_sphere(env, Material::Diffuse, spec);
        double worst = 0.0;
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x) {
                if (!spec.contains(x, y))
                    continue;
                const auto [a, b] = spec.disk_coords(x, y);
                const Vec3 n{a, b, std::sqrt(std::max(0.0, 1.0 - a * a - b * b))};
                const double expected = peak * std::max(0.0, dot(n, light));
                worst = std::max(worst, std::abs(out.at(x, y, 0) - expected));
            }
        CHECK(worst < 0.01 * peak);
    }

    SUBCASE("linear in radiance") {
        const EnvironmentMap env = testing::sky_env(32);
        const RasterImage a = render_sphere(env, Material::Diffuse, spec);
        const RasterImage b = render_sphere(scaled(env, 4.0), Material::Diffuse, spec);
        for (std::size_t i = 0; i < a.sample_count(); ++i)
            CHECK(b.data()[i] == doctest::Approx(4.0 * a.data()[i]).epsilon(1e-5));
    }

    SUBCASE("rotating the view matches rotating the environment") {
        // Yaw by 90 degrees turns the forward view from u = 0.5 to u = 0.25,
        // a texel column shift of W/4.
        const EnvironmentMap env = testing::sky_env(32);
        RasterImage shifted(64, 32, 3, ColorSpace::LinearHdr);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 64; ++x)
                for (int c = 0; c < 3; ++c)
                    shifted.at(x, y, c) = env.image().at((x + 48) % 64, y, c);
        const RasterImage a = render_sphere(env, Material::Diffuse, spec, {}, ViewRotation{90.0, 0.0});
        const RasterImage b = render_sphere(EnvironmentMap(shifted), Material::Diffuse, spec);
        for (std::size_t i = 0; i < a.sample_count(); ++i)
            CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-4).scale(1e-6));
    }
}
