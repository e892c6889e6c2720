#pragma once

#include <memory>
#include <string>

#include "meterhub/expected.hpp"

namespace meterhub {

class Service;

/// HTTP transport: POST /ingest/sigfox, POST /ingest/lorawan, and the
/// store's read API (GET /devices/<id>/readings, GET /devices/<id>/latest).
class HttpApi {
public:
    explicit HttpApi(Service& service);
    ~HttpApi();

    /// Binds and serves on a background thread. A busy port is an error
    /// ("port busy"), which serve maps to exit code 3.
    Expected<void> start(const std::string& host, int port);
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace meterhub
