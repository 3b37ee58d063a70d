#include "probelight/cli.hpp"

#include "probelight/backend.hpp"
#include "probelight/error.hpp"
#include "probelight/geometry.hpp"
#include "probelight/image_io.hpp"
#include "probelight/metrics.hpp"
#include "probelight/orchestrator.hpp"
#include "probelight/radiometry.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace probelight::cli {

namespace {

namespace fs = std::filesystem;

// Thrown by flag post-validation; maps to the usage exit code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<ExposureValue> parse_evs(const std::string& text) {
    std::vector<ExposureValue> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("bad EV '" + item + "' in --evs");
        }
        if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
            throw UsageError("bad EV '" + item + "' in --evs");
        out.emplace_back(v);
    }
    if (out.empty())
        throw UsageError("--evs is empty");
    return out;
}

std::pair<int, int> parse_size(const std::string& text) {
    const auto x = text.find('x');
    try {
        if (x != std::string::npos) {
            const int w = std::stoi(text.substr(0, x));
            const int h = std::stoi(text.substr(x + 1));
            if (w > 0 && h > 0)
                return {w, h};
        }
    } catch (const std::exception&) {
    }
    throw UsageError("--size expects WIDTHxHEIGHT, got '" + text + "'");
}

EnvironmentMap load_env(const std::string& path) {
    RasterImage img = load_image(path);
    if (img.space() == ColorSpace::LdrSrgb)
        img = linearize(img);
    return EnvironmentMap(std::move(img));
}

RasterImage to_single_channel(const RasterImage& img) {
    if (img.channels() == 1)
        return img;
    RasterImage out(img.width(), img.height(), 1, img.space());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const auto p = img.pixel(x, y);
            out.at(x, y, 0) = (p[0] + p[1] + p[2]) / 3.0f;
        }
    return out;
}

void save_output(const RasterImage& img, const std::string& path) {
    // A .png target for linear data gets the standard percentile tone map.
    if (fs::path(path).extension() == ".png" && img.space() != ColorSpace::LdrSrgb)
        save_image(tonemap(img), path);
    else
        save_image(img, path);
}

Material parse_material(const std::string& s) {
    if (s == "mirror")
        return Material::Mirror;
    if (s == "diffuse")
        return Material::Diffuse;
    return Material::Matte;
}

// Flat "key = value" file; '#' starts a comment. Keys are long flag names
// without the dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot read config file '" + path + "'");
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

// Appends "--key=value" for every config entry whose flag is not already on
// the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty())
        return args;
    for (const auto& [key, value] : read_config(path)) {
        const std::string flag = "--" + key;
        if (key == "config" || has_flag(args, flag))
            continue;
        args.push_back(flag + "=" + value);
    }
    return args;
}

// ---------------------------------------------------------------------------

struct ProbeArgs {
    std::string input, depth, backend, out;
    int n = 30, k = 2;
    double strength = 0.8;
    std::string evs = "0,-2.5,-5";
    double ev_min = -5.0;
    std::uint64_t seed = 0;
    double ball_diameter = 256.0;
    int canvas = 1024;
    int env_height = 128;
    int concurrency = 4;
    int timeout_ms = 120000;
    int retries = 3;
    std::string prompt = ProbeConfig{}.prompt;
    std::string negative_prompt = ProbeConfig{}.negative_prompt;
    bool verbose = false;
};

int run_probe(const ProbeArgs& a, std::ostream& out, std::ostream& err) {
    ProbeConfig cfg;
    cfg.n_balls = a.n;
    cfg.iterations = a.k;
    cfg.strength = a.strength;
    cfg.ev_list = parse_evs(a.evs);
    cfg.ev_min = a.ev_min;
    cfg.base_seed = a.seed;
    cfg.ball_spec = BallSpec::centered(a.canvas, a.ball_diameter);
    cfg.env_height = a.env_height;
    cfg.prompt = a.prompt;
    cfg.negative_prompt = a.negative_prompt;
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    if (a.backend.empty())
        throw UsageError("--backend is required (or set PROBELIGHT_BACKEND)");

    const RasterImage input = load_image(a.input);
    if (input.space() != ColorSpace::LdrSrgb || input.channels() != 3)
        throw FormatError("--input must be an RGB PNG");
    std::optional<RasterImage> depth;
    if (!a.depth.empty())
        depth = to_single_channel(load_image(a.depth));

    ClientOptions opts;
    opts.max_in_flight = a.concurrency;
    opts.retries = a.retries;
    opts.timeout = std::chrono::milliseconds(a.timeout_ms);
    HttpBackend backend(a.backend, opts);

    InpaintObserver observer;
    if (a.verbose)
        observer = [&err](const InpaintEvent& ev) {
            err << "ev#" << ev.ev_index << " iter " << ev.iteration << " seed " << ev.request->seed << " strength "
                << ev.request->denoising_strength << "\n";
        };
    const ProbeResult result = probe(input, depth, backend, cfg, observer);
    save_image(result.env.image(), a.out);
    out << "wrote " << a.out << " (" << result.env.width() << "x" << result.env.height() << ")\n";
    return kSuccess;
}

} // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"probelight: HDR light probes from chrome-ball inpainting"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    std::function<int()> action;
    std::string config_path; // consumed by expand_config before parsing

    // probe -----------------------------------------------------------------
    ProbeArgs probe_args;
    auto* probe_cmd = app.add_subcommand("probe", "Estimate an HDR environment map from one image via a backend");
    probe_cmd->add_option("--config", config_path, "Flat key=value file of flag defaults (flags win)");
    probe_cmd->add_option("--input", probe_args.input, "Input LDR image (.png)")->required()->check(CLI::ExistingFile);
    probe_cmd->add_option("--depth", probe_args.depth, "Depth map, 1 = nearest (.png/.pfm)")->check(CLI::ExistingFile);
    probe_cmd->add_option("--backend", probe_args.backend, "Backend URL, e.g. http://127.0.0.1:8080")
        ->envname("PROBELIGHT_BACKEND");
    probe_cmd->add_option("--out", probe_args.out, "Output environment map (.pfm)")->required();
    probe_cmd->add_option("--n", probe_args.n, "Balls per median iteration")->check(CLI::PositiveNumber);
    probe_cmd->add_option("--k", probe_args.k, "Median iterations")->check(CLI::PositiveNumber);
    probe_cmd->add_option("--strength", probe_args.strength, "Denoising strength after iteration 1")
        ->check(CLI::Range(0.0, 1.0));
    probe_cmd->add_option("--evs", probe_args.evs, "Comma-separated EVs, descending, starting at 0");
    probe_cmd->add_option("--ev-min", probe_args.ev_min, "EV mapped to prompt weight 1");
    probe_cmd->add_option("--seed", probe_args.seed, "Base seed");
    probe_cmd->add_option("--ball-diameter", probe_args.ball_diameter, "Ball diameter in canvas pixels")
        ->check(CLI::PositiveNumber);
    probe_cmd->add_option("--canvas", probe_args.canvas, "Square backend canvas size")->check(CLI::PositiveNumber);
    probe_cmd->add_option("--env-height", probe_args.env_height, "Output map height (width = 2x)")
        ->check(CLI::PositiveNumber);
    probe_cmd->add_option("--concurrency", probe_args.concurrency, "Max in-flight requests")->check(CLI::PositiveNumber);
    probe_cmd->add_option("--timeout-ms", probe_args.timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);
    probe_cmd->add_option("--retries", probe_args.retries, "Transport retries")->check(CLI::NonNegativeNumber);
    probe_cmd->add_option("--prompt", probe_args.prompt, "Base prompt");
    probe_cmd->add_option("--negative-prompt", probe_args.negative_prompt, "Negative prompt");
    probe_cmd->add_flag("--verbose", probe_args.verbose, "Log every backend request");
    probe_cmd->callback([&] { action = [&] { return run_probe(probe_args, out, err); }; });

    // merge-hdr -------------------------------------------------------------
    std::vector<std::string> merge_inputs;
    std::string merge_evs, merge_out;
    auto* merge_cmd = app.add_subcommand("merge-hdr", "Merge an LDR exposure bracket into a linear HDR image");
    merge_cmd->add_option("--config", config_path, "Flat key=value file of flag defaults (flags win)");
    merge_cmd->add_option("images", merge_inputs, "Bracket images, EV0 first")->required()->check(CLI::ExistingFile);
    merge_cmd->add_option("--evs", merge_evs, "Comma-separated EVs matching the images")->required();
    merge_cmd->add_option("--out", merge_out, "Output .pfm")->required();
    merge_cmd->callback([&] {
        const auto evs = parse_evs(merge_evs);
        if (evs.size() != merge_inputs.size())
            throw UsageError("--evs has " + std::to_string(evs.size()) + " values for " +
                             std::to_string(merge_inputs.size()) + " images");
        action = [&, evs] {
            std::vector<RasterImage> images;
            for (const auto& p : merge_inputs)
                images.push_back(load_image(p));
            save_image(merge_brackets(images, evs), merge_out);
            out << "wrote " << merge_out << "\n";
            return kSuccess;
        };
    });

    // tonemap ---------------------------------------------------------------
    std::string tm_input, tm_out;
    ToneMapParams tm_params;
    auto* tm_cmd = app.add_subcommand("tonemap", "Percentile gamma tone map of an HDR image");
    tm_cmd->add_option("--config", config_path, "Flat key=value file of flag defaults (flags win)");
    tm_cmd->add_option("input", tm_input, "HDR image (.pfm)")->required()->check(CLI::ExistingFile);
    tm_cmd->add_option("--out", tm_out, "Output .png")->required();
    tm_cmd->add_option("--gamma", tm_params.gamma, "Gamma")->check(CLI::PositiveNumber);
    tm_cmd->add_option("--percentile", tm_params.percentile, "Percentile mapped to --target")
        ->check(CLI::Range(0.0, 100.0));
    tm_cmd->add_option("--target", tm_params.target, "LDR value of the percentile")->check(CLI::Range(0.0, 1.0));
    tm_cmd->callback([&] {
        try {
            tm_params.validate();
        } catch (const RangeError& e) {
            throw UsageError(e.what());
        }
        action = [&] {
            save_image(tonemap(load_image(tm_input), tm_params), tm_out);
            out << "wrote " << tm_out << "\n";
            return kSuccess;
        };
    });

    // unwrap ----------------------------------------------------------------
    std::string uw_input, uw_out;
    double uw_diameter = 0.0;
    int uw_height = 128;
    bool uw_no_linearize = false;
    auto* uw_cmd = app.add_subcommand("unwrap", "Unwrap a centred chrome-ball image to an equirectangular map");
    uw_cmd->add_option("--config", config_path, "Flat key=value file of flag defaults (flags win)");
    uw_cmd->add_option("input", uw_input, "Ball image (.png or .pfm)")->required()->check(CLI::ExistingFile);
    uw_cmd->add_option("--diameter", uw_diameter, "Ball diameter in pixels (default: image width)");
    uw_cmd->add_option("--env-height", uw_height, "Output map height")->check(CLI::PositiveNumber);
    uw_cmd->add_option("--out", uw_out, "Output .pfm")->required();
    uw_cmd->add_flag("--no-linearize", uw_no_linearize, "Keep PNG values as-is instead of decoding gamma 2.4");
    uw_cmd->callback([&] {
        action = [&] {
            RasterImage ball = load_image(uw_input);
            if (ball.channels() != 3)
                throw ChannelMismatch("ball image must be RGB");
            if (ball.space() == ColorSpace::LdrSrgb && !uw_no_linearize)
                ball = linearize(ball);
            const double diameter = uw_diameter > 0.0 ? uw_diameter : std::min(ball.width(), ball.height());
            const BallSpec spec{ball.width() / 2.0, ball.height() / 2.0, diameter / 2.0, ball.width(), ball.height()};
            save_image(ball_to_envmap(ball, spec, uw_height).image(), uw_out);
            out << "wrote " << uw_out << "\n";
            return kSuccess;
        };
    });

    // render-sphere ---------------------------------------------------------
    std::string rs_input, rs_out, rs_material = "mirror";
    int rs_diameter = 128;
    auto* rs_cmd = app.add_subcommand("render-sphere", "Render a mirror, diffuse or matte sphere under a map");
    rs_cmd->add_option("--config", config_path, "Flat key=value file of flag defaults (flags win)");
    rs_cmd->add_option("input", rs_input, "Environment map (.pfm)")->required()->check(CLI::ExistingFile);
    rs_cmd->add_option("--material", rs_material, "mirror|diffuse|matte")
        ->check(CLI::IsMember({"mirror", "diffuse", "matte"}));
    rs_cmd->add_option("--diameter", rs_diameter, "Sphere diameter in pixels")->check(CLI::PositiveNumber);
    rs_cmd->add_option("--out", rs_out, "Output .pfm (or .png, tone-mapped)")->required();
    rs_cmd->callback([&] {
        action = [&] {
            const BallSpec spec = BallSpec::centered(rs_diameter, rs_diameter);
            save_output(render_sphere(load_env(rs_input), parse_material(rs_material), spec), rs_out);
            out << "wrote " << rs_out << "\n";
            return kSuccess;
        };
    });

    // crop-pano -------------------------------------------------------------
    std::string cp_input, cp_out, cp_size = "256x192";
    CameraCrop cp_cam;
    std::optional<std::uint64_t> cp_random;
    auto* cp_cmd = app.add_subcommand("crop-pano", "Pinhole crop of an equirectangular map");
    cp_cmd->add_option("--config", config_path, "Flat key=value file of flag defaults (flags win)");
    cp_cmd->add_option("input", cp_input, "Environment map (.pfm)")->required()->check(CLI::ExistingFile);
    cp_cmd->add_option("--vfov", cp_cam.vfov_deg, "Vertical field of view (degrees)");
    cp_cmd->add_option("--size", cp_size, "WIDTHxHEIGHT");
    cp_cmd->add_option("--azimuth", cp_cam.azimuth_deg, "Degrees");
    cp_cmd->add_option("--elevation", cp_cam.elevation_deg, "Degrees");
    cp_cmd->add_option("--random-camera", cp_random, "Sample FOV/elevation/azimuth from this seed");
    cp_cmd->add_option("--out", cp_out, "Output .pfm (or .png, tone-mapped)")->required();
    cp_cmd->callback([&] {
        const auto [w, h] = parse_size(cp_size);
        if (cp_random)
            cp_cam = sample_random_camera(*cp_random, w, h);
        cp_cam.width = w;
        cp_cam.height = h;
        try {
            cp_cam.validate();
        } catch (const RangeError& e) {
            throw UsageError(e.what());
        }
        action = [&] {
            save_output(crop_perspective(load_env(cp_input), cp_cam), cp_out);
            out << "wrote " << cp_out << " (vfov " << cp_cam.vfov_deg << ", azimuth " << cp_cam.azimuth_deg
                << ", elevation " << cp_cam.elevation_deg << ")\n";
            return kSuccess;
        };
    });

    // evaluate --------------------------------------------------------------
    std::string ev_pred, ev_gt, ev_out, ev_protocol = "three-sphere";
    int ev_diameter = 64;
    auto* ev_cmd = app.add_subcommand("evaluate", "Score a predicted map against ground truth");
    ev_cmd->add_option("--config", config_path, "Flat key=value file of flag defaults (flags win)");
    ev_cmd->add_option("--pred", ev_pred, "Predicted map (.pfm)")->required()->check(CLI::ExistingFile);
    ev_cmd->add_option("--gt", ev_gt, "Ground-truth map (.pfm)")->required()->check(CLI::ExistingFile);
    ev_cmd->add_option("--protocol", ev_protocol, "three-sphere|array")
        ->check(CLI::IsMember({"three-sphere", "array"}));
    ev_cmd->add_option("--sphere-diameter", ev_diameter, "Rendered sphere diameter")->check(CLI::Range(4, 4096));
    ev_cmd->add_option("--out", ev_out, "Report JSON path");
    ev_cmd->callback([&] {
        action = [&] {
            const EnvironmentMap pred = load_env(ev_pred);
            const EnvironmentMap gt = load_env(ev_gt);
            EvalReport report;
            if (ev_protocol == "array") {
                ArrayOptions opts;
                opts.sphere_diameter = ev_diameter / 2;
                report = evaluate_sphere_array(pred, gt, opts);
            } else {
                ThreeSphereOptions opts;
                opts.sphere = BallSpec::centered(ev_diameter, ev_diameter);
                report = evaluate_three_spheres(pred, gt, opts);
            }
            if (!ev_out.empty()) {
                std::ofstream f(ev_out);
                if (!f)
                    throw IoError("cannot create " + ev_out);
                f << report.to_json() << "\n";
            }
            out << report.to_table();
            return kSuccess;
        };
    });

    // mock-serve ------------------------------------------------------------
    std::string ms_env, ms_host = "127.0.0.1", ms_corruption = "checkerboard";
    int ms_port = 8080, ms_canvas = 1024;
    double ms_fraction = 0.0, ms_diameter = 256.0, ms_ev_min = -5.0;
    auto* ms_cmd = app.add_subcommand("mock-serve", "Serve the deterministic mock backend over HTTP");
    ms_cmd->add_option("--config", config_path, "Flat key=value file of flag defaults (flags win)");
    ms_cmd->add_option("--env", ms_env, "Hidden ground-truth map (.pfm)")->required()->check(CLI::ExistingFile);
    ms_cmd->add_option("--host", ms_host, "Bind address");
    ms_cmd->add_option("--port", ms_port, "Port (0 = any free port)")->check(CLI::Range(0, 65535));
    ms_cmd->add_option("--corrupt-fraction", ms_fraction, "Fraction of seeds that paint garbage")
        ->check(CLI::Range(0.0, 0.999));
    ms_cmd->add_option("--corruption", ms_corruption, "checkerboard|flat-gray")
        ->check(CLI::IsMember({"checkerboard", "flat-gray"}));
    ms_cmd->add_option("--canvas", ms_canvas, "Square canvas size")->check(CLI::PositiveNumber);
    ms_cmd->add_option("--ball-diameter", ms_diameter, "Ball diameter in canvas pixels")->check(CLI::PositiveNumber);
    ms_cmd->add_option("--ev-min", ms_ev_min, "EV at embed weight 1");
    ms_cmd->callback([&] {
        action = [&] {
            MockConfig cfg;
            cfg.env_map = load_env(ms_env);
            cfg.ball_spec = BallSpec::centered(ms_canvas, ms_diameter);
            cfg.corrupt_fraction = ms_fraction;
            cfg.corruption = ms_corruption == "flat-gray" ? Corruption::FlatGray : Corruption::Checkerboard;
            cfg.ev_min = ms_ev_min;
            MockServer server(std::move(cfg));
            const int port = server.start(ms_host, ms_port);
            out << "listening on http://" << ms_host << ":" << port << std::endl;
            // Serve until killed.
            for (;;)
                std::this_thread::sleep_for(std::chrono::hours(1));
            return kSuccess;
        };
    });

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args));
        // CLI11 takes the vector form in reverse order, without argv[0].
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return kUsageError;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kUsageError;
    }

    if (!action)
        return kUsageError;
    try {
        return action();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}

} // namespace probelight::cli
