#pragma once

// Wire protocol and clients for the diffusion inpainting backend.
//
//   POST /v1/inpaint   JSON InpaintRequest  -> JSON InpaintResponse
//   GET  /v1/health                         -> {"status": "ok"}
//
// Images travel as base64-encoded 8-bit PNG. Errors come back as a non-2xx
// status with {"error": "<message>"}.

#include "probelight/geometry.hpp"
#include "probelight/image.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace probelight {

struct InpaintRequest {
    RasterImage image;        ///< 3-channel LdrSrgb canvas
    PixelMask mask;           ///< 1 = inpaint
    RasterImage depth;        ///< single-channel, 1 = nearest
    std::string prompt;
    std::string negative_prompt;
    double embed_weight = 0.0;       ///< prompt-embedding interpolation weight in [0, 1]
    double denoising_strength = 1.0; ///< denoising starts at strength * T
    std::uint64_t seed = 0;
    int steps = 30;
    double guidance = 5.0;
    double lora_scale = 0.75; ///< advisory; backends may ignore it

    /// Throws ProtocolError on field-range or shape violations.
    void validate() const;
};

struct InpaintResponse {
    RasterImage image; ///< same size as the request canvas
    std::string backend_id;
    std::int64_t elapsed_ms = 0;
};

// JSON envelopes. Decoders throw ProtocolError on malformed payloads.
std::string encode_request(const InpaintRequest& req);
InpaintRequest decode_request(const std::string& body);
std::string encode_response(const InpaintResponse& resp);
InpaintResponse decode_response(const std::string& body);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// Anything that can inpaint: the in-process mock or a remote server.
class InpaintBackend {
public:
    virtual ~InpaintBackend() = default;

    virtual InpaintResponse inpaint(const InpaintRequest& req) = 0;

    /// Runs a batch; results are returned in request order regardless of
    /// completion order. The default runs sequentially.
    virtual std::vector<InpaintResponse> inpaint_all(std::span<const InpaintRequest> requests);
};

// ---------------------------------------------------------------------------
// Deterministic mock

enum class Corruption { Checkerboard, FlatGray };

struct MockConfig {
    EnvironmentMap env_map;           ///< hidden ground truth
    BallSpec ball_spec;               ///< where the mock paints its ball
    double corrupt_fraction = 0.0;    ///< in [0, 1)
    Corruption corruption = Corruption::Checkerboard;
    double ev_min = -5.0;

    void validate() const;
};

/// Stand-in for a diffusion model: paints the analytic mirror ball of the
/// hidden map, tone-mapped with the EV0 scale and exposed by
/// embed_weight * ev_min. Seeds with (seed mod 1000)/1000 < corrupt_fraction
/// paint a corruption pattern instead. The ball region is a convex blend
/// strength * fresh + (1 - strength) * request; everything else is copied.
/// All inputs and the output are snapped to 8-bit levels so the result is
/// identical whether the request arrived in process or over PNG.
class MockBackend final : public InpaintBackend {
public:
    explicit MockBackend(MockConfig cfg);

    InpaintResponse inpaint(const InpaintRequest& req) override;

    bool is_corrupt(std::uint64_t seed) const;

    /// Tone-mapped, 8-bit ball crop the mock paints for a clean seed at
    /// strength 1, exposed by `ev` stops.
    RasterImage clean_ball(double ev) const;

    /// Ball-crop pattern painted by corrupt seeds.
    RasterImage corruption_pattern() const;

    const MockConfig& config() const { return cfg_; }
    double ev0_scale() const { return scale_; }

private:
    MockConfig cfg_;
    RasterImage hdr_crop_; ///< linear mirror-ball crop at EV0
    double scale_ = 0.0;
};

InpaintResponse mock_inpaint(const InpaintRequest& req, const MockConfig& cfg);

// ---------------------------------------------------------------------------
// HTTP client

struct ClientOptions {
    std::chrono::milliseconds timeout{120000};
    int retries = 3;
    std::chrono::milliseconds backoff{100}; ///< first retry delay; doubles each attempt
    int max_in_flight = 4;
};

/// POSTs to `endpoint` ("http://host:port"). Transport failures (and 503
/// "still loading" answers) are retried with exponential backoff; other
/// backend failures raise BackendError immediately.
InpaintResponse send_inpaint(const std::string& endpoint, const InpaintRequest& req, const ClientOptions& opts = {});

/// GET /v1/health; true when the server answers {"status": "ok"}.
bool check_health(const std::string& endpoint, std::chrono::milliseconds timeout = std::chrono::milliseconds{2000});

class HttpBackend final : public InpaintBackend {
public:
    explicit HttpBackend(std::string endpoint, ClientOptions opts = {});

    InpaintResponse inpaint(const InpaintRequest& req) override;
    /// Up to opts.max_in_flight concurrent requests.
    std::vector<InpaintResponse> inpaint_all(std::span<const InpaintRequest> requests) override;

private:
    std::string endpoint_;
    ClientOptions opts_;
};

// ---------------------------------------------------------------------------
// HTTP server for the mock

class MockServer {
public:
    explicit MockServer(MockConfig cfg);
    ~MockServer();
    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    /// Returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Binds and serves on the calling thread until stop() is called.
    void serve(const std::string& host, int port);
    void stop();

    std::string endpoint() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace probelight
