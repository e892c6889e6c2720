#include "meterhub/connect/dispatch.hpp"

#include <nlohmann/json.hpp>

#include "meterhub/bytes.hpp"
#include "meterhub/codec/compact.hpp"
#include "meterhub/codec/mbus.hpp"
#include "meterhub/codec/pulse.hpp"
#include "meterhub/codec/record.hpp"
#include "meterhub/codec/sml.hpp"
#include "meterhub/reading_json.hpp"

namespace meterhub::connect {
namespace {

void dead_letter(bus::Bus& bus, const RawUplink& uplink,
                 const std::string& reason, DispatchResult& result) {
    publish_dead_letter(bus, uplink, reason);
    result.dead_letter_reason = reason;
}

Expected<std::vector<codec::DecodedRecord>> run_codec(
    const RawUplink& uplink, const DeviceConfig& device, bool strict_crc) {
    std::vector<codec::DecodedRecord> records;
    switch (device.codec) {
        case CodecKind::mbus: {
            auto frame = codec::decode_mbus(uplink.payload);
            if (!frame.ok()) return fail(frame.error());
            records = frame.value().records;
            break;
        }
        case CodecKind::sml: {
            auto msg = codec::decode_sml(uplink.payload, strict_crc);
            if (!msg.ok()) return fail(msg.error());
            for (const auto& v : msg.value().values) {
                codec::DecodedRecord rec;
                if (codec::sml_value_to_record(v, rec)) records.push_back(rec);
            }
            break;
        }
        case CodecKind::pulse: {
            auto rec = codec::decode_pulse(uplink.payload, device.pulse_weight,
                                           device.pulse_weight_unit);
            if (!rec.ok()) return fail(rec.error());
            records.push_back(rec.value());
            break;
        }
        case CodecKind::compact: {
            auto rec = codec::decode_compact(uplink.payload);
            if (!rec.ok()) return fail(rec.error());
            records.push_back(rec.value());
            break;
        }
    }
    if (records.empty()) return fail("no decodable records");
    return records;
}

}  // namespace

std::string dead_letter_topic(Technology t) {
    return std::string("meterhub/deadletter/") + std::string(to_string(t));
}

void publish_dead_letter(bus::Bus& bus, const RawUplink& uplink,
                         const std::string& reason) {
    nlohmann::json doc{{"device_id", uplink.device_id},
                       {"technology", to_string(uplink.technology)},
                       {"reason", reason},
                       {"raw", to_hex(uplink.payload)},
                       {"received_at", format_iso8601(uplink.received_at)}};
    const std::string body = doc.dump();
    bus.publish(dead_letter_topic(uplink.technology),
                Bytes(body.begin(), body.end()), uplink.received_at);
}

DispatchResult dispatch(const RawUplink& uplink, const ConnectorConfig& config,
                        bus::Bus& bus) {
    DispatchResult result;

    const auto it = config.devices.find(uplink.device_id);
    if (it == config.devices.end()) {
        dead_letter(bus, uplink, "unregistered device", result);
        return result;
    }
    const DeviceConfig& device = it->second;

    if (uplink.payload.empty()) {
        // heartbeat-style empty uplink: routed, but carries no reading
        dead_letter(bus, uplink, "empty payload", result);
        return result;
    }

    auto records = run_codec(uplink, device, config.strict_crc);
    if (!records.ok()) {
        dead_letter(bus, uplink, records.error(), result);
        return result;
    }

    std::vector<std::string> rejected;
    for (auto rec : records.value()) {
        if (rec.medium == Medium::unknown && device.expected_medium)
            rec.medium = *device.expected_medium;
        MeterReading reading = codec::normalize(rec, uplink);
        const auto violations = validate_reading(reading);
        if (!violations.empty()) {
            std::string joined = "invalid reading:";
            for (const auto& v : violations) joined += " " + v + ";";
            rejected.push_back(joined);
            continue;
        }
        bus.publish(topic_for(reading), reading_to_string(reading),
                    reading.timestamp);
        result.published.push_back(std::move(reading));
    }

    if (!rejected.empty()) dead_letter(bus, uplink, rejected.front(), result);
    return result;
}

}  // namespace meterhub::connect
