#include "meterhub/service.hpp"

#include <cstdio>

#include "meterhub/connect/ingest.hpp"
#include "meterhub/reading_json.hpp"

namespace meterhub {

Expected<std::unique_ptr<Service>> Service::create(ServiceOptions options) {
    std::unique_ptr<Service> svc(new Service());
    svc->options_ = std::move(options);

    auto store = store::Store::open(svc->options_.config.store_root);
    if (!store.ok()) return fail(store.error());
    svc->store_ = store.take();

    Service* self = svc.get();
    auto store_sub = svc->bus_.subscribe(
        "meterhub/readings/#", [self](const bus::BusMessage& msg) {
            auto reading = reading_from_string(
                std::string(msg.body.begin(), msg.body.end()));
            if (!reading.ok()) return;  // non-reading traffic is not stored
            auto seq = self->store_->append(reading.value());
            if (!seq.ok())
                std::fprintf(stderr, "meterhub: store append failed: %s\n",
                             seq.error().c_str());
        });
    if (!store_sub.ok()) return fail(store_sub.error());
    svc->subs_.push_back(store_sub.value());

    for (Technology t : {Technology::nbiot, Technology::wisun}) {
        const std::string filter =
            std::string("meterhub/ingest/") + std::string(to_string(t)) + "/+";
        auto sub = svc->bus_.subscribe(
            filter, [self, t](const bus::BusMessage& msg) {
                self->route_bus_ingest(t, msg);
            });
        if (!sub.ok()) return fail(sub.error());
        svc->subs_.push_back(sub.value());
    }

    std::optional<std::string> broker = svc->options_.broker_override;
    if (!broker) broker = svc->options_.config.broker;
    if (broker && svc->options_.start_bridge) {
        auto endpoint = bus::MqttBridge::parse_endpoint(*broker);
        if (!endpoint.ok()) return fail(endpoint.error());
        bus::MqttBridge::Options opt;
        opt.host = endpoint.value().first;
        opt.port = endpoint.value().second;
        opt.direction = bus::MqttBridge::Direction::both;
        svc->bridge_ = std::make_unique<bus::MqttBridge>(svc->bus_, opt);
        svc->bridge_->start();
    }
    return svc;
}

Service::~Service() {
    if (bridge_) bridge_->stop();
    for (auto id : subs_) bus_.unsubscribe(id);
}

void Service::route_bus_ingest(Technology technology,
                               const bus::BusMessage& msg) {
    const std::string body(msg.body.begin(), msg.body.end());
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    RawUplink up;
    up.technology = technology;
    const std::size_t slash = msg.topic.rfind('/');
    if (slash != std::string::npos) up.device_id = msg.topic.substr(slash + 1);
    if (doc.is_discarded()) {
        connect::publish_dead_letter(bus_, up, "malformed ingest document");
        return;
    }
    auto uplink = connect::ingest_nbiot(doc, technology);
    if (!uplink.ok()) {
        connect::publish_dead_letter(bus_, up, uplink.error());
        return;
    }
    connect::dispatch(uplink.value(), options_.config, bus_);
}

Service::HttpOutcome Service::ingest_http(Technology technology,
                                          const std::string& body) {
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded())
        return {400, R"({"error":"malformed JSON"})"};

    Expected<RawUplink> uplink = fail("unsupported ingest technology");
    switch (technology) {
        case Technology::lorawan: uplink = connect::ingest_lorawan(doc); break;
        case Technology::sigfox: uplink = connect::ingest_sigfox(doc); break;
        default: break;
    }
    if (!uplink.ok()) {
        const int status = uplink.error() == "payload cap" ? 422 : 400;
        nlohmann::json err{{"error", uplink.error()}};
        return {status, err.dump()};
    }

    auto result = connect::dispatch(uplink.value(), options_.config, bus_);
    nlohmann::json ok{{"published", result.published.size()}};
    if (result.dead_letter_reason) ok["dead_letter"] = *result.dead_letter_reason;
    return {200, ok.dump()};
}

void Service::deliver(Technology technology, const std::string& device_id,
                      const nlohmann::json& doc) {
    switch (technology) {
        case Technology::lorawan:
        case Technology::sigfox:
            ingest_http(technology, doc.dump());
            return;
        case Technology::nbiot:
        case Technology::wisun: {
            const std::string topic = std::string("meterhub/ingest/") +
                                      std::string(to_string(technology)) + "/" +
                                      sanitize_topic_level(device_id);
            bus_.publish(topic, doc.dump());
            return;
        }
    }
}

}  // namespace meterhub
