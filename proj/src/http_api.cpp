#include "meterhub/http_api.hpp"

#include <httplib.h>

#include <limits>
#include <thread>

#include "meterhub/reading_json.hpp"
#include "meterhub/service.hpp"
#include "meterhub/time.hpp"

namespace meterhub {
namespace {

// Accepts ISO-8601 or UNIX seconds.
std::optional<UnixSeconds> parse_bound(const std::string& s) {
    if (auto t = parse_iso8601(s)) return t;
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == nullptr || *end != '\0') return std::nullopt;
    return static_cast<UnixSeconds>(v);
}

}  // namespace

struct HttpApi::Impl {
    Service& service;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit Impl(Service& s) : service(s) {}

    void routes() {
        server.Post("/ingest/sigfox",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        auto out = service.ingest_http(Technology::sigfox,
                                                       req.body);
                        res.status = out.status;
                        res.set_content(out.body, "application/json");
                    });
        server.Post("/ingest/lorawan",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        auto out = service.ingest_http(Technology::lorawan,
                                                       req.body);
                        res.status = out.status;
                        res.set_content(out.body, "application/json");
                    });
        server.Get(R"(/devices/([^/]+)/readings)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       readings(req, res);
                   });
        server.Get(R"(/devices/([^/]+)/latest)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       latest(req, res);
                   });
    }

    void readings(const httplib::Request& req, httplib::Response& res) {
        store::Query q;
        q.device_id = req.matches[1];
        q.from = 0;
        q.to = std::numeric_limits<UnixSeconds>::max();
        if (req.has_param("from")) {
            auto t = parse_bound(req.get_param_value("from"));
            if (!t) {
                res.status = 400;
                res.set_content(R"({"error":"malformed from"})",
                                "application/json");
                return;
            }
            q.from = *t;
        }
        if (req.has_param("to")) {
            auto t = parse_bound(req.get_param_value("to"));
            if (!t) {
                res.status = 400;
                res.set_content(R"({"error":"malformed to"})",
                                "application/json");
                return;
            }
            q.to = *t;
        }
        if (req.has_param("bucket")) {
            auto b = parse_bound(req.get_param_value("bucket"));
            if (!b || *b <= 0) {
                res.status = 400;
                res.set_content(R"({"error":"malformed bucket"})",
                                "application/json");
                return;
            }
            q.downsample_s = *b;
        }
        auto hits = service.readings().query(q);
        if (!hits.ok()) {
            res.status = 400;
            nlohmann::json err{{"error", hits.error()}};
            res.set_content(err.dump(), "application/json");
            return;
        }
        nlohmann::json out = nlohmann::json::array();
        for (const auto& sr : hits.value())
            out.push_back(reading_to_json(sr.reading));
        res.set_content(out.dump(), "application/json");
    }

    void latest(const httplib::Request& req, httplib::Response& res) {
        const auto hit = service.readings().latest(req.matches[1]);
        if (!hit) {
            res.status = 404;
            res.set_content(R"({"error":"no readings"})", "application/json");
            return;
        }
        res.set_content(reading_to_json(hit->reading).dump(),
                        "application/json");
    }
};

HttpApi::HttpApi(Service& service) : impl_(std::make_unique<Impl>(service)) {
    // httplib's default options include SO_REUSEPORT, which would let two
    // servers share a port instead of failing the second bind.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                   reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    impl_->routes();
}

HttpApi::~HttpApi() { stop(); }

Expected<void> HttpApi::start(const std::string& host, int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
        if (impl_->port <= 0) return fail("port busy");
    } else {
        if (!impl_->server.bind_to_port(host, port)) return fail("port busy");
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return {};
}

void HttpApi::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpApi::port() const { return impl_->port; }

}  // namespace meterhub
