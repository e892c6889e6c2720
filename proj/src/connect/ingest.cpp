#include "meterhub/connect/ingest.hpp"

#include "meterhub/bytes.hpp"
#include "meterhub/time.hpp"

namespace meterhub::connect {
namespace {

// Uplink timestamps arrive either as UNIX seconds or ISO-8601 text.
Expected<UnixSeconds> parse_when(const nlohmann::json& v,
                                 const std::string& field) {
    if (v.is_number_integer()) return v.get<UnixSeconds>();
    if (v.is_string()) {
        if (auto t = parse_iso8601(v.get<std::string>())) return *t;
        return fail("malformed " + field);
    }
    return fail("malformed " + field);
}

}  // namespace

Expected<RawUplink> ingest_lorawan(const nlohmann::json& envelope) {
    if (!envelope.is_object()) return fail("envelope must be a JSON object");
    RawUplink up;
    up.technology = Technology::lorawan;

    const auto ids = envelope.find("end_device_ids");
    if (ids == envelope.end() || !ids->is_object() ||
        !ids->contains("device_id") || !(*ids)["device_id"].is_string())
        return fail("missing device_id");
    up.device_id = (*ids)["device_id"].get<std::string>();

    const auto msg = envelope.find("uplink_message");
    if (msg == envelope.end() || !msg->is_object() ||
        !msg->contains("frm_payload") || !(*msg)["frm_payload"].is_string())
        return fail("missing payload field");
    auto payload = from_base64((*msg)["frm_payload"].get<std::string>());
    if (!payload.ok()) return fail("undecodable base-64");
    up.payload = payload.take();

    if (!envelope.contains("received_at"))
        return fail("missing received_at");
    auto when = parse_when(envelope["received_at"], "received_at");
    if (!when.ok()) return fail(when.error());
    up.received_at = when.value();

    if (msg->contains("rx_metadata") && (*msg)["rx_metadata"].is_array()) {
        const auto& meta = (*msg)["rx_metadata"];
        if (!meta.empty()) up.link.gateway_count = static_cast<int>(meta.size());
        const nlohmann::json* strongest = nullptr;
        for (const auto& entry : meta) {
            if (!entry.is_object() || !entry.contains("rssi") ||
                !entry["rssi"].is_number())
                continue;
            if (!strongest ||
                entry["rssi"].get<double>() > (*strongest)["rssi"].get<double>())
                strongest = &entry;
        }
        if (strongest) {
            up.link.rssi_dbm = (*strongest)["rssi"].get<double>();
            if (strongest->contains("snr") && (*strongest)["snr"].is_number())
                up.link.snr_db = (*strongest)["snr"].get<double>();
        }
    }
    return up;
}

Expected<RawUplink> ingest_sigfox(const nlohmann::json& doc) {
    if (!doc.is_object()) return fail("document must be a JSON object");
    RawUplink up;
    up.technology = Technology::sigfox;

    if (!doc.contains("device") || !doc["device"].is_string())
        return fail("missing device");
    up.device_id = doc["device"].get<std::string>();

    if (!doc.contains("time")) return fail("missing time");
    auto when = parse_when(doc["time"], "time");
    if (!when.ok()) return fail(when.error());
    up.received_at = when.value();

    if (!doc.contains("data") || !doc["data"].is_string())
        return fail("missing data");
    auto payload = from_hex(doc["data"].get<std::string>());
    if (!payload.ok()) return fail("malformed hex");
    if (payload.value().size() > 12) return fail("payload cap");
    up.payload = payload.take();

    if (doc.contains("rssi") && doc["rssi"].is_number())
        up.link.rssi_dbm = doc["rssi"].get<double>();
    return up;
}

Expected<RawUplink> ingest_nbiot(const nlohmann::json& doc,
                                 Technology technology) {
    if (!doc.is_object()) return fail("document must be a JSON object");
    RawUplink up;
    up.technology = technology;

    if (!doc.contains("imei") || !doc["imei"].is_string())
        return fail("missing imei");
    up.device_id = doc["imei"].get<std::string>();

    if (!doc.contains("payload") || !doc["payload"].is_string())
        return fail("missing payload field");
    auto payload = from_hex(doc["payload"].get<std::string>());
    if (!payload.ok()) return fail("malformed hex");
    up.payload = payload.take();

    if (!doc.contains("sent_at")) return fail("missing sent_at");
    auto when = parse_when(doc["sent_at"], "sent_at");
    if (!when.ok()) return fail(when.error());
    up.received_at = when.value();

    if (doc.contains("rssi_dbm") && doc["rssi_dbm"].is_number())
        up.link.rssi_dbm = doc["rssi_dbm"].get<double>();
    return up;
}

}  // namespace meterhub::connect
