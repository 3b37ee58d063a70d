#pragma once

#include "probelight/image.hpp"

#include <array>
#include <cmath>

namespace probelight {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
    double norm() const { return std::sqrt(dot(*this, *this)); }
    Vec3 normalized() const { return (1.0 / norm()) * *this; }
};

using Rgb = std::array<float, 3>;

/// Rotation applied to camera-space vectors: pitch by `elevation` about +x,
/// then yaw by `azimuth` about +y (both degrees). Positive elevation looks up.
struct ViewRotation {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;

    Vec3 apply(Vec3 v) const;
};

// Equirectangular convention, +y up, camera looking along -z:
//   u = 0.5 + atan2(d.x, -d.z) / (2 pi),  v = acos(d.y) / pi
// so the forward direction lands at the map centre and the backward
// direction on the u = 0/1 seam.
std::array<double, 2> direction_to_uv(Vec3 d);
Vec3 uv_to_direction(double u, double v);

/// Equirectangular linear-HDR radiance map, width = 2 * height, 3 channels.
class EnvironmentMap {
public:
    EnvironmentMap() = default;
    explicit EnvironmentMap(RasterImage image);

    const RasterImage& image() const { return image_; }
    int width() const { return image_.width(); }
    int height() const { return image_.height(); }

    /// Bilinear lookup with horizontal wrap and vertical clamp.
    Rgb sample_uv(double u, double v) const;
    Rgb sample(Vec3 direction) const { auto uv = direction_to_uv(direction); return sample_uv(uv[0], uv[1]); }

    /// Direction through the centre of texel (x, y).
    Vec3 texel_direction(int x, int y) const;
    /// sin(theta) * (pi / H) * (2 pi / W) for texel row y.
    double texel_solid_angle(int y) const;

private:
    RasterImage image_;
};

/// Orthographic chrome-ball placement. Pixel (i, j) has its centre at
/// (i + 0.5, j + 0.5); a pixel belongs to the disk when its centre lies
/// within `radius` of `center`.
struct BallSpec {
    double center_x = 512.0;
    double center_y = 512.0;
    double radius = 128.0;
    int image_width = 1024;
    int image_height = 1024;

    /// Disk of the given diameter centred on a square canvas.
    static BallSpec centered(int canvas, double diameter);

    /// Throws DegenerateSpec unless radius > 0 and the disk fits the image.
    void validate() const;

    bool contains(int x, int y) const;
    /// Normalized disk coordinates (a, b) of a pixel centre, b pointing up.
    std::array<double, 2> disk_coords(int x, int y) const;

    /// Bounding square of the disk: [crop_x0, crop_x0 + crop_size) etc.
    int crop_x0() const;
    int crop_y0() const;
    int crop_size() const;
    /// The same disk expressed in the coordinates of its bounding-square crop.
    BallSpec in_crop() const;
};

struct CameraCrop {
    double vfov_deg = 60.0;
    int width = 256;
    int height = 192;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;

    void validate() const;
};

enum class Material { Mirror, Diffuse, Matte };

struct MaterialParams {
    double diffuse_albedo = 0.5;
    double matte_albedo = 0.9;
    int matte_exponent = 50;
};

struct BallRender {
    RasterImage image;
    PixelMask mask;
};

/// Renders the mirror ball an orthographic camera sees. Outside-disk pixels are 0.
BallRender envmap_to_ball(const EnvironmentMap& env, const BallSpec& spec, const ViewRotation& view = {});

/// Radiance a mirror ball image reports for `direction`: normal =
/// normalize(direction + view), bilinear lookup restricted to disk pixels.
/// The exact forward direction falls back to the top rim.
Rgb sample_ball(const RasterImage& ball, const BallSpec& spec, Vec3 direction);

/// Unwraps a mirror ball into an equirectangular map of height `out_height`.
EnvironmentMap ball_to_envmap(const RasterImage& ball, const BallSpec& spec, int out_height);

/// Pinhole crop of the panorama.
RasterImage crop_perspective(const EnvironmentMap& env, const CameraCrop& cam);

/// Renders a sphere of the given material lit by `env`, disk pixels only.
RasterImage render_sphere(const EnvironmentMap& env, Material material, const BallSpec& spec,
                          const MaterialParams& params = {}, const ViewRotation& view = {});

/// Environment scaled by a constant factor.
EnvironmentMap scaled(const EnvironmentMap& env, double factor);

} // namespace probelight
