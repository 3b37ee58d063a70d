#include "probelight/aggregation.hpp"
#include "probelight/backend.hpp"
#include "probelight/error.hpp"
#include "probelight/image_io.hpp"
#include "probelight/radiometry.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <thread>

using namespace probelight;

namespace {

MockConfig small_mock(double corrupt_fraction = 0.0) {
    MockConfig cfg;
    cfg.env_map = testing::sky_env(32, 20.0);
    cfg.ball_spec = BallSpec::centered(64, 32.0);
    cfg.corrupt_fraction = corrupt_fraction;
    return cfg;
}

InpaintRequest request_for(const MockConfig& cfg, std::uint64_t seed, double strength = 1.0, double weight = 0.0) {
    InpaintRequest req;
    const int w = cfg.ball_spec.image_width, h = cfg.ball_spec.image_height;
    req.image = testing::random_image(w, h, 3, ColorSpace::LdrSrgb, seed + 7);
    req.mask = ball_mask(cfg.ball_spec);
    req.depth = RasterImage(w, h, 1, ColorSpace::LdrSrgb, 0.5f);
    req.prompt = "a perfect mirrored reflective chrome ball sphere";
    req.negative_prompt = "matte, diffuse, flat, dull";
    req.seed = seed;
    req.denoising_strength = strength;
    req.embed_weight = weight;
    return req;
}

RasterImage ball_crop(const RasterImage& canvas, const BallSpec& spec) {
    return crop(canvas, spec.crop_x0(), spec.crop_y0(), spec.crop_size(), spec.crop_size());
}

// Compares only disk pixels of two ball crops.
bool disk_equal(const RasterImage& a, const RasterImage& b, const BallSpec& local) {
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (local.contains(x, y))
                for (int c = 0; c < 3; ++c)
                    if (a.at(x, y, c) != b.at(x, y, c))
                        return false;
    return true;
}

/// Throwaway HTTP server on a free port.
class StubServer {
public:
    explicit StubServer(std::function<void(httplib::Server&)> routes) {
        routes(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

ClientOptions fast_options() {
    ClientOptions o;
    o.timeout = std::chrono::milliseconds(5000);
    o.retries = 2;
    o.backoff = std::chrono::milliseconds(1);
    return o;
}

} // namespace

TEST_CASE("base64 round trip") {
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 100u, 1001u}) {
        std::vector<std::uint8_t> bytes(n);
        for (std::size_t i = 0; i < n; ++i)
            bytes[i] = static_cast<std::uint8_t>(i * 37 + 11);
        CHECK(base64_decode(base64_encode(bytes)) == bytes);
    }
    CHECK(base64_encode(std::vector<std::uint8_t>{'M', 'a', 'n'}) == "TWFu");
    CHECK_THROWS_AS(base64_decode("abc"), ProtocolError);
    CHECK_THROWS_AS(base64_decode("a$c="), ProtocolError);
}

TEST_CASE("request and response JSON round trip") {
    const MockConfig cfg = small_mock();
    InpaintRequest req = request_for(cfg, 0xFFFFFFFFFFFFFFF0ull, 0.8, 0.5);
    req.image = quantize_8bit(req.image);
    const InpaintRequest back = decode_request(encode_request(req));
    CHECK(back.image == req.image);
    CHECK(back.mask == req.mask);
    CHECK(back.depth.data().size() == req.depth.data().size());
    CHECK(back.prompt == req.prompt);
    CHECK(back.negative_prompt == req.negative_prompt);
    CHECK(back.seed == req.seed);
    CHECK(back.denoising_strength == 0.8);
    CHECK(back.embed_weight == 0.5);
    CHECK(back.steps == 30);
    CHECK(back.guidance == 5.0);
    CHECK(back.lora_scale == 0.75);

    const auto j = nlohmann::json::parse(encode_request(req));
    for (const char* key : {"image", "mask", "depth", "prompt", "negative_prompt", "embed_weight",
                            "denoising_strength", "seed", "steps", "guidance", "lora_scale"})
        CHECK(j.contains(key));

    InpaintResponse resp{req.image, "stub", 12};
    const InpaintResponse rb = decode_response(encode_response(resp));
    CHECK(rb.image == resp.image);
    CHECK(rb.backend_id == "stub");
    CHECK(rb.elapsed_ms == 12);

    CHECK_THROWS_AS(decode_request("{"), ProtocolError);
    CHECK_THROWS_AS(decode_request("[]"), ProtocolError);
    CHECK_THROWS_AS(decode_response(R"({"backend_id": "x"})"), ProtocolError);
}

TEST_CASE("request validation") {
    const MockConfig cfg = small_mock();
    InpaintRequest req = request_for(cfg, 1);
    CHECK_NOTHROW(req.validate());
    req.embed_weight = 1.5;
    CHECK_THROWS_AS(req.validate(), ProtocolError);
    req = request_for(cfg, 1);
    req.denoising_strength = 0.0;
    CHECK_THROWS_AS(req.validate(), ProtocolError);
    req = request_for(cfg, 1);
    req.steps = 0;
    CHECK_THROWS_AS(req.validate(), ProtocolError);
    req = request_for(cfg, 1);
    req.mask = PixelMask(3, 3);
    CHECK_THROWS_AS(req.validate(), ProtocolError);
}

TEST_CASE("mock backend examples") {
    const MockConfig cfg = small_mock(0.3);
    MockBackend mock(cfg);
    const BallSpec local = cfg.ball_spec.in_crop();

    SUBCASE("clean seed at strength 1 paints the analytic ball") {
        const auto resp = mock.inpaint(request_for(cfg, 500));
        CHECK(disk_equal(ball_crop(resp.image, cfg.ball_spec), mock.clean_ball(0.0), local));
        // The analytic ball is the shared-scale tone map of the mirror render.
        const RasterImage analytic = tonemap_with_scale(
            ball_crop(envmap_to_ball(cfg.env_map, cfg.ball_spec).image, cfg.ball_spec), mock.ev0_scale());
        for (std::size_t i = 0; i < analytic.sample_count(); ++i)
            CHECK(std::abs(mock.clean_ball(0.0).data()[i] - analytic.data()[i]) <= 0.5 / 255.0 + 1e-6);
    }
    SUBCASE("corrupt seed paints the pattern") {
        REQUIRE(mock.is_corrupt(1200));
        const auto resp = mock.inpaint(request_for(cfg, 1200));
        CHECK(disk_equal(ball_crop(resp.image, cfg.ball_spec), mock.corruption_pattern(), local));
    }
    SUBCASE("outside the mask the request is returned unchanged") {
        const InpaintRequest req = request_for(cfg, 501, 0.6);
        const auto resp = mock.inpaint(req);
        const RasterImage q = quantize_8bit(req.image);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (!cfg.ball_spec.contains(x, y))
                    CHECK(resp.image.at(x, y, 2) == q.at(x, y, 2));
    }
    SUBCASE("a clean composite is a fixed point at strength 0.8") {
        const auto first = mock.inpaint(request_for(cfg, 502));
        InpaintRequest again = request_for(cfg, 503, 0.8);
        again.image = first.image;
        CHECK(mock.inpaint(again).image == first.image);
    }
    SUBCASE("embed weight darkens the exposure") {
        const RasterImage dark = mock.clean_ball(-5.0);
        const RasterImage bright = mock.clean_ball(0.0);
        double sd = 0.0, sb = 0.0;
        for (std::size_t i = 0; i < dark.sample_count(); ++i) {
            sd += dark.data()[i];
            sb += bright.data()[i];
        }
        CHECK(sd < 0.5 * sb);
        const auto resp = mock.inpaint(request_for(cfg, 504, 1.0, 1.0));
        CHECK(disk_equal(ball_crop(resp.image, cfg.ball_spec), dark, local));
    }
    SUBCASE("deterministic") {
        const InpaintRequest req = request_for(cfg, 505, 0.8, 0.5);
        CHECK(mock.inpaint(req).image == mock.inpaint(req).image);
        CHECK(mock_inpaint(req, cfg).image == mock.inpaint(req).image);
    }
    SUBCASE("wrong canvas size") {
        InpaintRequest req = request_for(cfg, 1);
        req.image = RasterImage(32, 32, 3, ColorSpace::LdrSrgb);
        req.mask = PixelMask(32, 32);
        req.depth = RasterImage(32, 32, 1, ColorSpace::LdrSrgb);
        CHECK_THROWS_AS(mock.inpaint(req), ProtocolError);
    }
}

TEST_CASE("mock corruption rate over 10k seeds") {
    for (double f : {0.0, 0.2, 0.3, 0.777}) {
        MockBackend mock(small_mock(f));
        int corrupt = 0;
        for (std::uint64_t s = 0; s < 10000; ++s)
            corrupt += mock.is_corrupt(s);
        CHECK(std::abs(corrupt / 10000.0 - f) <= 1.0 / 1000.0 + 1e-12);
    }
    MockConfig bad = small_mock(1.0);
    CHECK_THROWS_AS(MockBackend{bad}, ConfigError);
}

TEST_CASE("HTTP transport is transparent") {
    const MockConfig cfg = small_mock(0.3);
    MockServer server(cfg);
    const int port = server.start("127.0.0.1", 0);
    CHECK(port > 0);
    CHECK(check_health(server.endpoint()));

    MockBackend local(cfg);
    std::vector<InpaintRequest> reqs;
    for (std::uint64_t s = 0; s < 6; ++s)
        reqs.push_back(request_for(cfg, 250 + s * 37, s % 2 ? 0.8 : 1.0, 0.25 * (s % 5)));
    for (const auto& req : reqs)
        CHECK(send_inpaint(server.endpoint(), req, fast_options()).image == local.inpaint(req).image);

    ClientOptions opts = fast_options();
    opts.max_in_flight = 3;
    HttpBackend http(server.endpoint(), opts);
    const auto batch = http.inpaint_all(reqs);
    REQUIRE(batch.size() == reqs.size());
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        CHECK(batch[i].image == local.inpaint(reqs[i]).image);
        CHECK(batch[i].backend_id == "probelight-mock");
    }

    // Malformed payloads are reported as client errors, not retried.
    httplib::Client raw(server.endpoint());
    auto res = raw.Post("/v1/inpaint", "{\"image\": 3}", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    server.stop();
}

TEST_CASE("unreachable backend raises TransportError after retries") {
    // Grab a free port, then release it so nothing listens there.
    int port = 0;
    {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        socklen_t len = sizeof addr;
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        port = ntohs(addr.sin_port);
        ::close(fd);
    }
    const MockConfig cfg = small_mock();
    CHECK_THROWS_AS(send_inpaint("http://127.0.0.1:" + std::to_string(port), request_for(cfg, 1), fast_options()),
                    TransportError);
    CHECK_FALSE(check_health("http://127.0.0.1:" + std::to_string(port)));
}

TEST_CASE("response with mismatched dimensions is a protocol error") {
    StubServer stub([](httplib::Server& s) {
        s.Post("/v1/inpaint", [](const httplib::Request&, httplib::Response& res) {
            InpaintResponse r{RasterImage(8, 8, 3, ColorSpace::LdrSrgb, 0.5f), "stub", 0};
            res.set_content(encode_response(r), "application/json");
        });
    });
    CHECK_THROWS_AS(send_inpaint(stub.endpoint(), request_for(small_mock(), 1), fast_options()), ProtocolError);
}

TEST_CASE("backend failures and 503 retries") {
    std::atomic<int> calls{0};
    const MockConfig cfg = small_mock();
    StubServer stub([&](httplib::Server& s) {
        s.Post("/v1/inpaint", [&](const httplib::Request& req, httplib::Response& res) {
            const int n = calls++;
            if (n < 2) {
                res.status = 503;
                res.set_content(R"({"error": "loading"})", "application/json");
                return;
            }
            res.set_content(encode_response(mock_inpaint(decode_request(req.body), cfg)), "application/json");
        });
    });
    const InpaintRequest req = request_for(cfg, 3);
    CHECK(send_inpaint(stub.endpoint(), req, fast_options()).image == mock_inpaint(req, cfg).image);
    CHECK(calls.load() == 3);

    calls = 0;
    ClientOptions no_retry = fast_options();
    no_retry.retries = 1;
    CHECK_THROWS_AS(send_inpaint(stub.endpoint(), req, no_retry), TransportError);

    StubServer failing([](httplib::Server& s) {
        s.Post("/v1/inpaint", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content(R"({"error": "out of memory"})", "application/json");
        });
    });
    try {
        send_inpaint(failing.endpoint(), req, fast_options());
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("out of memory") != std::string::npos);
    }
}
