#include "meterhub/connect/config.hpp"

#include <fstream>

namespace meterhub::connect {

std::string_view to_string(CodecKind k) {
    switch (k) {
        case CodecKind::mbus: return "mbus";
        case CodecKind::sml: return "sml";
        case CodecKind::pulse: return "pulse";
        case CodecKind::compact: return "compact";
    }
    return "mbus";
}

std::optional<CodecKind> codec_from_string(std::string_view s) {
    if (s == "mbus") return CodecKind::mbus;
    if (s == "sml") return CodecKind::sml;
    if (s == "pulse") return CodecKind::pulse;
    if (s == "compact") return CodecKind::compact;
    return std::nullopt;
}

Expected<ConnectorConfig> config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) return fail("config must be a JSON object");
    ConnectorConfig cfg;
    cfg.strict_crc = j.value("strict_crc", false);
    cfg.http_port = j.value("http_port", 8080);
    cfg.store_root = j.value("store", std::string("meterhub-data"));
    if (j.contains("broker") && !j["broker"].is_null())
        cfg.broker = j["broker"].get<std::string>();

    if (!j.contains("devices") || !j["devices"].is_array())
        return fail("config needs a devices array");
    for (const auto& d : j["devices"]) {
        DeviceConfig dev;
        if (!d.contains("device_id") || !d["device_id"].is_string())
            return fail("device entry without device_id");
        dev.device_id = d["device_id"].get<std::string>();
        if (dev.device_id.empty()) return fail("empty device_id");

        const auto tech = technology_from_string(d.value("technology", ""));
        if (!tech)
            return fail("device " + dev.device_id + ": unknown technology");
        dev.technology = *tech;

        const auto codec = codec_from_string(d.value("codec", ""));
        if (!codec) return fail("device " + dev.device_id + ": unknown codec");
        dev.codec = *codec;

        if (d.contains("pulse_weight")) {
            if (!d["pulse_weight"].is_number() ||
                !(d["pulse_weight"].get<double>() > 0))
                return fail("device " + dev.device_id +
                            ": pulse_weight must be > 0");
            dev.pulse_weight = d["pulse_weight"].get<double>();
        }
        if (d.contains("pulse_weight_unit")) {
            const auto unit =
                unit_from_string(d["pulse_weight_unit"].get<std::string>());
            if (!unit)
                return fail("device " + dev.device_id +
                            ": unknown pulse_weight_unit");
            dev.pulse_weight_unit = *unit;
        }
        if (d.contains("medium")) {
            const auto medium = medium_from_string(d["medium"].get<std::string>());
            if (!medium)
                return fail("device " + dev.device_id + ": unknown medium");
            dev.expected_medium = *medium;
        }

        auto [it, inserted] = cfg.devices.emplace(dev.device_id, dev);
        if (!inserted) return fail("duplicate device_id " + dev.device_id);
    }
    return cfg;
}

Expected<ConnectorConfig> load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) return fail("cannot open config file " + file.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        return fail("config file " + file.string() + " is not valid JSON");
    return config_from_json(j);
}

}  // namespace meterhub::connect
