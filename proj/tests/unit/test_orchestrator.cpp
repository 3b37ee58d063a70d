#include "probelight/error.hpp"
#include "probelight/orchestrator.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace probelight;

namespace {

MockConfig small_mock(double corrupt_fraction = 0.0, EnvironmentMap env = testing::sky_env(32, 20.0)) {
    MockConfig cfg;
    cfg.env_map = std::move(env);
    cfg.ball_spec = BallSpec::centered(64, 32.0);
    cfg.corrupt_fraction = corrupt_fraction;
    return cfg;
}

ProbeConfig small_config(std::uint64_t seed = 0) {
    ProbeConfig cfg;
    cfg.ball_spec = BallSpec::centered(64, 32.0);
    cfg.n_balls = 5;
    cfg.iterations = 2;
    cfg.base_seed = seed;
    cfg.env_height = 16;
    return cfg;
}

RasterImage canvas_input(std::uint64_t seed = 1) {
    return testing::random_image(64, 64, 3, ColorSpace::LdrSrgb, seed);
}

RasterImage flat_depth() { return RasterImage(64, 64, 1, ColorSpace::LdrSrgb, 0.5f); }

bool disk_equal(const RasterImage& a, const RasterImage& b, const BallSpec& local) {
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (local.contains(x, y))
                for (int c = 0; c < 3; ++c)
                    if (a.at(x, y, c) != b.at(x, y, c))
                        return false;
    return true;
}

RasterImage ball_crop(const RasterImage& canvas, const BallSpec& spec) {
    return crop(canvas, spec.crop_x0(), spec.crop_y0(), spec.crop_size(), spec.crop_size());
}

/// Runs batches in reverse order to show results do not depend on completion order.
class ReversingBackend final : public InpaintBackend {
public:
    explicit ReversingBackend(MockConfig cfg) : mock_(std::move(cfg)) {}
    InpaintResponse inpaint(const InpaintRequest& req) override { return mock_.inpaint(req); }
    std::vector<InpaintResponse> inpaint_all(std::span<const InpaintRequest> reqs) override {
        std::vector<InpaintResponse> out(reqs.size());
        for (std::size_t i = reqs.size(); i-- > 0;)
            out[i] = mock_.inpaint(reqs[i]);
        return out;
    }

private:
    MockBackend mock_;
};

} // namespace

TEST_CASE("prompt_weight examples") {
    CHECK(prompt_weight(ExposureValue{0.0}, ExposureValue{-5.0}) == 0.0);
    CHECK(prompt_weight(ExposureValue{-5.0}, ExposureValue{-5.0}) == 1.0);
    CHECK(prompt_weight(ExposureValue{-2.5}, ExposureValue{-5.0}) == 0.5);
    CHECK_THROWS_AS(prompt_weight(ExposureValue{-6.0}, ExposureValue{-5.0}), RangeError);
    CHECK_THROWS_AS(prompt_weight(ExposureValue{1.0}, ExposureValue{-5.0}), RangeError);
    CHECK_THROWS_AS(prompt_weight(ExposureValue{0.0}, ExposureValue{0.0}), RangeError);
}

TEST_CASE("config validation") {
    ProbeConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    auto broken = [&](auto mutate) {
        ProbeConfig c = small_config();
        mutate(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    broken([](ProbeConfig& c) { c.n_balls = 0; });
    broken([](ProbeConfig& c) { c.iterations = 0; });
    broken([](ProbeConfig& c) { c.strength = 0.0; });
    broken([](ProbeConfig& c) { c.strength = 1.1; });
    broken([](ProbeConfig& c) { c.ev_list = {ExposureValue{-1.0}}; });
    broken([](ProbeConfig& c) { c.ev_list = {ExposureValue{0.0}, ExposureValue{-3.0}, ExposureValue{-2.0}}; });
    broken([](ProbeConfig& c) { c.ev_min = -4.0; });
    broken([](ProbeConfig& c) { c.ball_spec = BallSpec{10, 10, 20, 64, 64}; });
}

TEST_CASE("defaults") {
    const ProbeConfig cfg;
    CHECK(cfg.n_balls == 30);
    CHECK(cfg.iterations == 2);
    CHECK(cfg.strength == 0.8);
    CHECK(cfg.ev_list.size() == 3);
    CHECK(cfg.ev_min == -5.0);
    CHECK(cfg.steps == 30);
    CHECK(cfg.guidance == 5.0);
    CHECK(cfg.lora_scale == 0.75);
    CHECK(cfg.ball_spec.radius == 128.0);
    CHECK(cfg.ball_spec.image_width == 1024);
    CHECK(cfg.env_height == 128);
    CHECK(cfg.prompt == "a perfect mirrored reflective chrome ball sphere");
    CHECK(cfg.negative_prompt == "matte, diffuse, flat, dull");
}

TEST_CASE("seed and strength discipline") {
    ProbeConfig cfg = small_config(1000);
    cfg.n_balls = 4;
    cfg.iterations = 3;
    MockBackend mock(small_mock());
    std::map<int, std::vector<std::pair<std::uint64_t, double>>> seen;
    iterative_inpaint(canvas_input(), flat_depth(), mock, cfg, ExposureValue{-2.5}, 2,
                      [&](const InpaintEvent& ev) {
                          CHECK(ev.ev_index == 2);
                          CHECK(ev.request->embed_weight == 0.5);
                          seen[ev.iteration].emplace_back(ev.request->seed, ev.request->denoising_strength);
                      });
    REQUIRE(seen.size() == 4);
    const std::uint64_t base = 1000 + 2 * kEvSeedStride;
    for (int i = 1; i <= 3; ++i) {
        REQUIRE(seen[i].size() == 4);
        for (int j = 0; j < 4; ++j) {
            CHECK(seen[i][j].first == base + static_cast<std::uint64_t>((i - 1) * 4 + j));
            CHECK(seen[i][j].second == (i == 1 ? 1.0 : 0.8));
        }
    }
    REQUIRE(seen[4].size() == 1);
    CHECK(seen[4][0].first == base + 12);
    CHECK(seen[4][0].second == 0.8);
    CHECK(iteration_seeds(cfg, 2, 4) == std::vector<std::uint64_t>{base + 12});
    CHECK_THROWS_AS(iteration_seeds(cfg, 0, 0), RangeError);
}

TEST_CASE("a backend that always paints the clean ball returns it") {
    const MockConfig mcfg = small_mock();
    MockBackend mock(mcfg);
    const BallSpec local = mcfg.ball_spec.in_crop();
    for (int k : {1, 2, 3})
        for (int n : {1, 4}) {
            ProbeConfig cfg = small_config();
            cfg.iterations = k;
            cfg.n_balls = n;
            const RasterImage out = iterative_inpaint(canvas_input(), flat_depth(), mock, cfg, ExposureValue{0.0});
            CHECK(disk_equal(out, mock.clean_ball(0.0), local));
        }
}

TEST_CASE("k = 1, N = 1 traces the algorithm directly") {
    const MockConfig mcfg = small_mock(0.5);
    MockBackend mock(mcfg);
    ProbeConfig cfg = small_config(700);
    cfg.iterations = 1;
    cfg.n_balls = 1;
    const RasterImage input = canvas_input();
    const BallSpec& spec = mcfg.ball_spec;

    InpaintRequest req;
    req.image = input;
    req.mask = ball_mask(spec);
    req.depth = paint_depth_circle(flat_depth(), spec);
    req.seed = 700;
    req.denoising_strength = 1.0;
    const RasterImage b1 = ball_crop(mock.inpaint(req).image, spec);
    RasterImage overlay = input;
    paste(overlay, b1, spec.crop_x0(), spec.crop_y0());
    req.image = composite(input, overlay, req.mask);
    req.seed = 701;
    req.denoising_strength = 0.8;
    const RasterImage expected = ball_crop(mock.inpaint(req).image, spec);

    CHECK(iterative_inpaint(input, flat_depth(), mock, cfg, ExposureValue{0.0}) == expected);
}

TEST_CASE("probe results do not depend on request completion order") {
    const MockConfig mcfg = small_mock(0.3);
    MockBackend forward(mcfg);
    ReversingBackend reversed(mcfg);
    const ProbeConfig cfg = small_config(4242);
    const ProbeResult a = probe(canvas_input(), std::nullopt, forward, cfg);
    const ProbeResult b = probe(canvas_input(), std::nullopt, reversed, cfg);
    CHECK(a.env.image() == b.env.image());

    MockServer server(mcfg);
    server.start();
    ClientOptions opts;
    opts.max_in_flight = 4;
    HttpBackend http(server.endpoint(), opts);
    const ProbeResult c = probe(canvas_input(), std::nullopt, http, cfg);
    CHECK(a.env.image() == c.env.image());
    server.stop();
}

TEST_CASE("probe with a single EV is the unwrapped linearized clean ball") {
    const MockConfig mcfg = small_mock();
    MockBackend mock(mcfg);
    ProbeConfig cfg = small_config();
    cfg.ev_list = {ExposureValue{0.0}};
    const ProbeResult r = probe(canvas_input(), std::nullopt, mock, cfg);
    const BallSpec local = mcfg.ball_spec.in_crop();
    const EnvironmentMap expected = ball_to_envmap(linearize(mock.clean_ball(0.0)), local, cfg.env_height);
    CHECK(r.env.image() == expected.image());
    CHECK(r.ldr_balls.size() == 1);
}

TEST_CASE("constant ground truth gives a constant merged map") {
    const MockConfig mcfg = small_mock(0.0, testing::constant_env(16, 3.0f));
    MockBackend mock(mcfg);
    const ProbeResult r = probe(canvas_input(), std::nullopt, mock, small_config());
    REQUIRE(r.ldr_balls.size() == 3);
    const float first = r.env.image().data()[0];
    CHECK(first > 0.0f);
    for (float v : r.env.image().data())
        CHECK(v == first);
}

TEST_CASE("probe consumes an explicit depth map") {
    const MockConfig mcfg = small_mock();
    MockBackend mock(mcfg);
    ProbeConfig cfg = small_config();
    cfg.ev_list = {ExposureValue{0.0}};
    cfg.iterations = 1;
    cfg.n_balls = 1;
    const RasterImage depth = testing::random_image(48, 32, 1, ColorSpace::LdrSrgb, 9, 0.0f, 0.6f);
    std::vector<float> disk_depth;
    probe(testing::random_image(48, 32, 3, ColorSpace::LdrSrgb, 5), depth, mock, cfg, [&](const InpaintEvent& ev) {
        disk_depth.push_back(ev.request->depth.at(32, 32, 0));
        CHECK(ev.request->image.width() == 64);
    });
    REQUIRE_FALSE(disk_depth.empty());
    CHECK(disk_depth[0] <= 0.6f);
    CHECK(disk_depth[0] > 0.3f);
    CHECK_THROWS_AS(probe(canvas_input(), RasterImage(64, 64, 3, ColorSpace::LdrSrgb), mock, cfg), ChannelMismatch);
}

TEST_CASE("letterbox keeps the aspect ratio") {
    RasterImage wide(40, 20, 3, ColorSpace::LdrSrgb, 1.0f);
    const RasterImage out = letterbox(wide, 64);
    CHECK(out.width() == 64);
    CHECK(out.height() == 64);
    // 64 x 32 content centred vertically.
    CHECK(out.at(32, 15, 0) == 0.0f);
    CHECK(out.at(32, 16, 0) == 1.0f);
    CHECK(out.at(32, 47, 0) == 1.0f);
    CHECK(out.at(32, 48, 0) == 0.0f);
    const RasterImage same = testing::random_image(64, 64, 3, ColorSpace::LdrSrgb, 3);
    CHECK(letterbox(same, 64) == same);
}
