#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "meterhub/expected.hpp"
#include "meterhub/types.hpp"

namespace meterhub::connect {

enum class CodecKind { mbus, sml, pulse, compact };

std::string_view to_string(CodecKind k);
std::optional<CodecKind> codec_from_string(std::string_view s);

struct DeviceConfig {
    std::string device_id;
    Technology technology{};
    CodecKind codec{};
    double pulse_weight = 1.0;
    Unit pulse_weight_unit = Unit::count;
    /// Fills in the medium for codecs that do not carry one on the wire
    /// (pulse) or frames that report an unknown medium code.
    std::optional<Medium> expected_medium;
};

struct ConnectorConfig {
    std::map<std::string, DeviceConfig> devices;  // keyed by device_id
    bool strict_crc = false;
    int http_port = 8080;
    std::string store_root = "meterhub-data";
    std::optional<std::string> broker;  // host[:port] of an external MQTT broker
};

/// {"devices": [...], "strict_crc": .., "http_port": .., "store": ..,
///  "broker": ..}. Duplicate device ids are an error naming the duplicate.
Expected<ConnectorConfig> config_from_json(const nlohmann::json& j);
Expected<ConnectorConfig> load_config(const std::filesystem::path& file);

}  // namespace meterhub::connect
