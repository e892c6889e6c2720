#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "meterhub/bus/bridge.hpp"
#include "meterhub/bus/bus.hpp"
#include "meterhub/connect/config.hpp"
#include "meterhub/connect/dispatch.hpp"
#include "meterhub/store/store.hpp"

namespace meterhub {

struct ServiceOptions {
    connect::ConnectorConfig config;
    std::optional<std::string> broker_override;  // beats config.broker
    bool start_bridge = true;  // simulate/export run without one
};

/// The assembled pipeline: in-process bus, store fed by a
/// meterhub/readings/# subscription, NB-IoT/Wi-SUN bus-ingest routes,
/// callback-style ingest entry points for LoRaWAN/Sigfox, and an optional
/// bridge to an external broker. HTTP transport lives in HttpApi.
class Service {
public:
    static Expected<std::unique_ptr<Service>> create(ServiceOptions options);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    bus::Bus& hub() { return bus_; }
    store::Store& readings() { return *store_; }
    const connect::ConnectorConfig& config() const { return options_.config; }

    struct HttpOutcome {
        int status = 200;
        std::string body;  // JSON
    };

    /// POST /ingest/<technology> semantics: 200 on accept (even when the
    /// uplink dead-letters), 400 on structural rejection, 422 on the
    /// Sigfox payload cap.
    HttpOutcome ingest_http(Technology technology, const std::string& body);

    /// Simulator entry: hands a wire document to the technology's ingest
    /// path exactly as the network would.
    void deliver(Technology technology, const std::string& device_id,
                 const nlohmann::json& doc);

private:
    Service() = default;

    void route_bus_ingest(Technology technology, const bus::BusMessage& msg);

    ServiceOptions options_;
    bus::Bus bus_;
    std::unique_ptr<store::Store> store_;
    std::unique_ptr<bus::MqttBridge> bridge_;
    std::vector<bus::SubscriptionId> subs_;
};

}  // namespace meterhub
