#include "meterhub/reading_json.hpp"

#include <nlohmann/json.hpp>

namespace meterhub {

using nlohmann::json;

json reading_to_json(const MeterReading& r) {
    json link = json::object();
    if (r.link.rssi_dbm) link["rssi_dbm"] = *r.link.rssi_dbm;
    if (r.link.snr_db) link["snr_db"] = *r.link.snr_db;
    if (r.link.gateway_count) link["gateway_count"] = *r.link.gateway_count;

    return json{
        {"schema", r.schema},
        {"device_id", r.device_id},
        {"technology", to_string(r.technology)},
        {"timestamp", format_iso8601(r.timestamp)},
        {"medium", to_string(r.medium)},
        {"quantity", to_string(r.quantity)},
        {"value", r.value},
        {"unit", to_string(r.unit)},
        {"link", link},
        {"raw", r.raw},
    };
}

std::string reading_to_string(const MeterReading& r) {
    return reading_to_json(r).dump();
}

Expected<MeterReading> reading_from_json(const json& j) {
    if (!j.is_object()) return fail("reading is not a JSON object");
    MeterReading r;
    try {
        r.schema = j.at("schema").get<std::string>();
        r.device_id = j.at("device_id").get<std::string>();

        auto tech = technology_from_string(j.at("technology").get<std::string>());
        if (!tech) return fail("unknown technology");
        r.technology = *tech;

        auto ts = parse_iso8601(j.at("timestamp").get<std::string>());
        if (!ts) return fail("malformed timestamp");
        r.timestamp = *ts;

        auto medium = medium_from_string(j.at("medium").get<std::string>());
        if (!medium) return fail("unknown medium");
        r.medium = *medium;

        auto quantity =
            quantity_from_string(j.at("quantity").get<std::string>());
        if (!quantity) return fail("unknown quantity");
        r.quantity = *quantity;

        r.value = j.at("value").get<double>();

        auto unit = unit_from_string(j.at("unit").get<std::string>());
        if (!unit) return fail("unknown unit");
        r.unit = *unit;

        if (j.contains("link")) {
            const json& link = j.at("link");
            if (link.contains("rssi_dbm"))
                r.link.rssi_dbm = link.at("rssi_dbm").get<double>();
            if (link.contains("snr_db"))
                r.link.snr_db = link.at("snr_db").get<double>();
            if (link.contains("gateway_count"))
                r.link.gateway_count = link.at("gateway_count").get<int>();
        }
        r.raw = j.value("raw", std::string());
    } catch (const json::exception& e) {
        return fail(std::string("malformed reading: ") + e.what());
    }
    return r;
}

Expected<MeterReading> reading_from_string(std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) return fail("invalid JSON");
    return reading_from_json(j);
}

}  // namespace meterhub
