#include "probelight/geometry.hpp"

#include "probelight/error.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace probelight {

namespace {

constexpr double kPi = std::numbers::pi;

double radians(double deg) {
    return deg * kPi / 180.0;
}

} // namespace

Vec3 ViewRotation::apply(Vec3 v) const {
    if (azimuth_deg == 0.0 && elevation_deg == 0.0)
        return v;
    const double e = radians(elevation_deg);
    const double a = radians(azimuth_deg);
    const double ce = std::cos(e), se = std::sin(e);
    const Vec3 pitched{v.x, v.y * ce - v.z * se, v.y * se + v.z * ce};
    const double ca = std::cos(a), sa = std::sin(a);
    return {pitched.x * ca + pitched.z * sa, pitched.y, -pitched.x * sa + pitched.z * ca};
}

std::array<double, 2> direction_to_uv(Vec3 d) {
    const double n = d.norm();
    const double u = 0.5 + std::atan2(d.x, -d.z) / (2.0 * kPi);
    const double v = std::acos(std::clamp(d.y / n, -1.0, 1.0)) / kPi;
    return {u, v};
}

Vec3 uv_to_direction(double u, double v) {
    const double theta = v * kPi;
    const double psi = (u - 0.5) * 2.0 * kPi;
    const double s = std::sin(theta);
    return {s * std::sin(psi), std::cos(theta), -s * std::cos(psi)};
}

EnvironmentMap::EnvironmentMap(RasterImage image) : image_(std::move(image)) {
    if (image_.channels() != 3)
        throw ChannelMismatch("environment maps are RGB");
    if (image_.height() <= 0 || image_.width() != 2 * image_.height())
        throw DimensionMismatch("environment map must be 2H x H, got " + std::to_string(image_.width()) + "x" +
                                std::to_string(image_.height()));
    if (image_.space() != ColorSpace::LinearHdr)
        image_ = image_.with_space(ColorSpace::LinearHdr);
}

Rgb EnvironmentMap::sample_uv(double u, double v) const {
    const int w = width(), h = height();
    const double fx = u * w - 0.5;
    const double fy = std::clamp(v * h - 0.5, 0.0, static_cast<double>(h - 1));
    const double x0f = std::floor(fx);
    const double y0f = std::floor(fy);
    const double tx = fx - x0f, ty = fy - y0f;
    auto wrap = [w](long long x) { return static_cast<int>(((x % w) + w) % w); };
    const int x0 = wrap(static_cast<long long>(x0f));
    const int x1 = wrap(static_cast<long long>(x0f) + 1);
    const int y0 = static_cast<int>(y0f);
    const int y1 = std::min(y0 + 1, h - 1);
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - tx) * image_.at(x0, y0, c) + tx * image_.at(x1, y0, c);
        const double bottom = (1.0 - tx) * image_.at(x0, y1, c) + tx * image_.at(x1, y1, c);
        out[c] = static_cast<float>((1.0 - ty) * top + ty * bottom);
    }
    return out;
}

Vec3 EnvironmentMap::texel_direction(int x, int y) const {
    return uv_to_direction((x + 0.5) / width(), (y + 0.5) / height());
}

double EnvironmentMap::texel_solid_angle(int y) const {
    const double theta = kPi * (y + 0.5) / height();
    return std::sin(theta) * (kPi / height()) * (2.0 * kPi / width());
}

BallSpec BallSpec::centered(int canvas, double diameter) {
    return BallSpec{canvas / 2.0, canvas / 2.0, diameter / 2.0, canvas, canvas};
}

void BallSpec::validate() const {
    if (!(radius > 0.0))
        throw DegenerateSpec("ball radius must be positive");
    if (image_width <= 0 || image_height <= 0)
        throw DegenerateSpec("ball image size must be positive");
    if (center_x - radius < 0.0 || center_y - radius < 0.0 || center_x + radius > image_width ||
        center_y + radius > image_height)
        throw DegenerateSpec("ball disk does not fit inside the image");
}

bool BallSpec::contains(int x, int y) const {
    const double dx = x + 0.5 - center_x;
    const double dy = y + 0.5 - center_y;
    return dx * dx + dy * dy <= radius * radius;
}

std::array<double, 2> BallSpec::disk_coords(int x, int y) const {
    return {(x + 0.5 - center_x) / radius, -(y + 0.5 - center_y) / radius};
}

int BallSpec::crop_x0() const {
    return static_cast<int>(std::floor(center_x - radius));
}

int BallSpec::crop_y0() const {
    return static_cast<int>(std::floor(center_y - radius));
}

int BallSpec::crop_size() const {
    const int w = static_cast<int>(std::ceil(center_x + radius)) - crop_x0();
    const int h = static_cast<int>(std::ceil(center_y + radius)) - crop_y0();
    return std::max(w, h);
}

BallSpec BallSpec::in_crop() const {
    const int size = crop_size();
    return BallSpec{center_x - crop_x0(), center_y - crop_y0(), radius, size, size};
}

void CameraCrop::validate() const {
    if (!(vfov_deg > 0.0 && vfov_deg < 180.0))
        throw RangeError("vertical FOV must lie in (0, 180) degrees");
    if (!(std::fabs(elevation_deg) < 90.0))
        throw RangeError("elevation must lie in (-90, 90) degrees");
    if (width <= 0 || height <= 0)
        throw RangeError("crop size must be positive");
    const double half_h = std::atan(std::tan(radians(vfov_deg) / 2.0) * width / height);
    if (!(half_h < kPi / 2.0))
        throw RangeError("horizontal FOV reaches 180 degrees");
}

BallRender envmap_to_ball(const EnvironmentMap& env, const BallSpec& spec, const ViewRotation& view) {
    spec.validate();
    RasterImage img(spec.image_width, spec.image_height, 3, ColorSpace::LinearHdr);
    PixelMask mask(spec.image_width, spec.image_height);
    const int x0 = spec.crop_x0(), y0 = spec.crop_y0(), size = spec.crop_size();
    for (int y = std::max(y0, 0); y < std::min(y0 + size, spec.image_height); ++y) {
        for (int x = std::max(x0, 0); x < std::min(x0 + size, spec.image_width); ++x) {
            if (!spec.contains(x, y))
                continue;
            const auto [a, b] = spec.disk_coords(x, y);
            const Vec3 n{a, b, std::sqrt(std::max(0.0, 1.0 - a * a - b * b))};
            // r = 2 (n.v) n - v with v = +z
            const Vec3 r{2.0 * n.z * n.x, 2.0 * n.z * n.y, 2.0 * n.z * n.z - 1.0};
            const Rgb value = env.sample(view.apply(r));
            std::copy(value.begin(), value.end(), img.pixel(x, y).begin());
            mask.at(x, y) = 1.0f;
        }
    }
    return {std::move(img), std::move(mask)};
}

namespace {

// Bilinear lookup that only trusts disk pixels; weights are renormalized
// over the taps that fall inside the disk. Returns false when none do.
bool disk_bilinear(const RasterImage& ball, const BallSpec& spec, double px, double py, Rgb& out) {
    const double x0f = std::floor(px), y0f = std::floor(py);
    const double tx = px - x0f, ty = py - y0f;
    const int x0 = static_cast<int>(x0f), y0 = static_cast<int>(y0f);
    double acc[3] = {0.0, 0.0, 0.0};
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            const double w = (i ? tx : 1.0 - tx) * (j ? ty : 1.0 - ty);
            if (w == 0.0)
                continue;
            const int x = x0 + i, y = y0 + j;
            if (x < 0 || y < 0 || x >= ball.width() || y >= ball.height() || !spec.contains(x, y))
                continue;
            for (int c = 0; c < 3; ++c)
                acc[c] += w * ball.at(x, y, c);
            total += w;
        }
    }
    if (total <= 1e-12)
        return false;
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<float>(acc[c] / total);
    return true;
}

} // namespace

Rgb sample_ball(const RasterImage& ball, const BallSpec& spec, Vec3 direction) {
    Vec3 s = direction.normalized() + Vec3{0.0, 0.0, 1.0};
    if (s.norm() < 1e-12)
        s = Vec3{0.0, 1.0, 0.0};
    const Vec3 n = s.normalized();
    double px = spec.center_x + n.x * spec.radius - 0.5;
    double py = spec.center_y - n.y * spec.radius - 0.5;
    Rgb out{};
    if (disk_bilinear(ball, spec, px, py, out))
        return out;
    // Blind-spot rim: pull the lookup one pixel inside the silhouette, where
    // the nearest pixel centre is guaranteed to lie inside the disk.
    const double dx = px + 0.5 - spec.center_x, dy = py + 0.5 - spec.center_y;
    const double rho = std::hypot(dx, dy);
    const double limit = spec.radius - 1.0;
    if (rho > limit && rho > 0.0) {
        px = spec.center_x + dx * (limit / rho) - 0.5;
        py = spec.center_y + dy * (limit / rho) - 0.5;
    }
    if (disk_bilinear(ball, spec, px, py, out))
        return out;
    const int nx = std::clamp(static_cast<int>(std::lround(px)), 0, ball.width() - 1);
    const int ny = std::clamp(static_cast<int>(std::lround(py)), 0, ball.height() - 1);
    for (int c = 0; c < 3; ++c)
        out[c] = ball.at(nx, ny, c);
    return out;
}

EnvironmentMap ball_to_envmap(const RasterImage& ball, const BallSpec& spec, int out_height) {
    if (spec.radius < 2.0)
        throw DegenerateSpec("ball radius below 2 pixels cannot be unwrapped");
    spec.validate();
    if (ball.channels() != 3)
        throw ChannelMismatch("ball image must be RGB");
    if (ball.width() != spec.image_width || ball.height() != spec.image_height)
        throw DimensionMismatch("ball image size does not match its BallSpec");
    if (out_height <= 0)
        throw DimensionMismatch("environment height must be positive");

    RasterImage out(2 * out_height, out_height, 3, ColorSpace::LinearHdr);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < 2 * out_height; ++x) {
            const Rgb value = sample_ball(
                ball, spec, uv_to_direction((x + 0.5) / (2.0 * out_height), (y + 0.5) / out_height));
            std::copy(value.begin(), value.end(), out.pixel(x, y).begin());
        }
    }
    return EnvironmentMap(std::move(out));
}

RasterImage crop_perspective(const EnvironmentMap& env, const CameraCrop& cam) {
    cam.validate();
    const double tan_v = std::tan(radians(cam.vfov_deg) / 2.0);
    const double tan_h = tan_v * cam.width / cam.height;
    const ViewRotation rotation{cam.azimuth_deg, cam.elevation_deg};
    RasterImage out(cam.width, cam.height, 3, ColorSpace::LinearHdr);
    for (int j = 0; j < cam.height; ++j) {
        for (int i = 0; i < cam.width; ++i) {
            const Vec3 ray{(2.0 * (i + 0.5) / cam.width - 1.0) * tan_h, (1.0 - 2.0 * (j + 0.5) / cam.height) * tan_v,
                           -1.0};
            const Rgb value = env.sample(rotation.apply(ray));
            std::copy(value.begin(), value.end(), out.pixel(i, j).begin());
        }
    }
    return out;
}

EnvironmentMap scaled(const EnvironmentMap& env, double factor) {
    RasterImage img = env.image();
    for (float& v : img.data())
        v = static_cast<float>(static_cast<double>(v) * factor);
    return EnvironmentMap(std::move(img));
}

} // namespace probelight
