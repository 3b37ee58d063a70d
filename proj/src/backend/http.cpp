#include "probelight/backend.hpp"
#include "probelight/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace probelight {

namespace {

std::unique_ptr<httplib::Client> make_client(const std::string& endpoint, std::chrono::milliseconds timeout) {
    auto client = std::make_unique<httplib::Client>(endpoint);
    if (!client->is_valid())
        throw TransportError("invalid backend endpoint '" + endpoint + "'");
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client->set_connection_timeout(secs.count(), usecs.count());
    client->set_read_timeout(secs.count(), usecs.count());
    client->set_write_timeout(secs.count(), usecs.count());
    client->set_keep_alive(true);
    return client;
}

std::string error_message(const httplib::Response& res) {
    try {
        const auto j = nlohmann::json::parse(res.body);
        if (j.is_object() && j.contains("error") && j["error"].is_string())
            return j["error"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
    return res.body.empty() ? "HTTP " + std::to_string(res.status) : res.body;
}

InpaintResponse post_with_retries(httplib::Client& client, const std::string& endpoint, const InpaintRequest& req,
                                  const std::string& body, const ClientOptions& opts) {
    std::string last_failure;
    auto delay = opts.backoff;
    for (int attempt = 0; attempt <= opts.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        auto res = client.Post("/v1/inpaint", body, "application/json");
        if (!res) {
            last_failure = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 503) {
            last_failure = "backend unavailable: " + error_message(*res);
            continue;
        }
        if (res->status != 200)
            throw BackendError(error_message(*res));

        InpaintResponse resp = decode_response(res->body);
        if (resp.image.width() != req.image.width() || resp.image.height() != req.image.height())
            throw ProtocolError("response image is " + std::to_string(resp.image.width()) + "x" +
                                std::to_string(resp.image.height()) + ", request was " +
                                std::to_string(req.image.width()) + "x" + std::to_string(req.image.height()));
        return resp;
    }
    throw TransportError(endpoint + ": " + last_failure + " (after " + std::to_string(opts.retries + 1) +
                         " attempts)");
}

} // namespace

InpaintResponse send_inpaint(const std::string& endpoint, const InpaintRequest& req, const ClientOptions& opts) {
    const std::string body = encode_request(req);
    auto client = make_client(endpoint, opts.timeout);
    return post_with_retries(*client, endpoint, req, body, opts);
}

bool check_health(const std::string& endpoint, std::chrono::milliseconds timeout) {
    auto client = make_client(endpoint, timeout);
    auto res = client->Get("/v1/health");
    if (!res || res->status != 200)
        return false;
    try {
        const auto j = nlohmann::json::parse(res->body);
        return j.value("status", "") == "ok";
    } catch (const nlohmann::json::exception&) {
        return false;
    }
}

HttpBackend::HttpBackend(std::string endpoint, ClientOptions opts)
    : endpoint_(std::move(endpoint)), opts_(opts) {
    if (opts_.max_in_flight < 1)
        throw ConfigError("max_in_flight must be >= 1");
}

InpaintResponse HttpBackend::inpaint(const InpaintRequest& req) {
    return send_inpaint(endpoint_, req, opts_);
}

std::vector<InpaintResponse> HttpBackend::inpaint_all(std::span<const InpaintRequest> requests) {
    std::vector<std::optional<InpaintResponse>> slots(requests.size());
    std::vector<std::exception_ptr> errors(requests.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        std::unique_ptr<httplib::Client> client;
        for (std::size_t i = next++; i < requests.size(); i = next++) {
            try {
                if (!client)
                    client = make_client(endpoint_, opts_.timeout);
                slots[i] = post_with_retries(*client, endpoint_, requests[i], encode_request(requests[i]), opts_);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(opts_.max_in_flight), requests.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();

    // Report the failure of the lowest-index request so errors are deterministic too.
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    std::vector<InpaintResponse> out;
    out.reserve(slots.size());
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------------------

struct MockServer::Impl {
    explicit Impl(MockConfig cfg) : mock(std::move(cfg)) {
        server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        });
        server.Post("/v1/inpaint", [this](const httplib::Request& req, httplib::Response& res) {
            auto reply_error = [&res](int status, const std::string& msg) {
                res.status = status;
                res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
            };
            try {
                const InpaintRequest request = decode_request(req.body);
                // MockBackend is stateless after construction, safe to share.
                const InpaintResponse response = mock.inpaint(request);
                res.set_content(encode_response(response), "application/json");
            } catch (const ProtocolError& e) {
                reply_error(400, e.what());
            } catch (const std::exception& e) {
                reply_error(500, e.what());
            }
        });
    }

    MockBackend mock;
    httplib::Server server;
    std::thread thread;
    std::string host = "127.0.0.1";
    int port = 0;
};

MockServer::MockServer(MockConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}

MockServer::~MockServer() {
    stop();
}

int MockServer::start(const std::string& host, int port) {
    impl_->host = host;
    if (port == 0)
        impl_->port = impl_->server.bind_to_any_port(host);
    else
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    if (impl_->port < 0)
        throw TransportError("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void MockServer::serve(const std::string& host, int port) {
    impl_->host = host;
    impl_->port = port;
    if (!impl_->server.listen(host, port))
        throw TransportError("cannot listen on " + host + ":" + std::to_string(port));
}

void MockServer::stop() {
    if (!impl_)
        return;
    impl_->server.stop();
    if (impl_->thread.joinable())
        impl_->thread.join();
}

std::string MockServer::endpoint() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

} // namespace probelight
