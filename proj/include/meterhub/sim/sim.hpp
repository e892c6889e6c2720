#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meterhub/connect/config.hpp"
#include "meterhub/expected.hpp"
#include "meterhub/types.hpp"

namespace meterhub::sim {

struct MeterModel {
    double start = 0;
    double rate_per_hour = 0;
    double jitter_fraction = 0;  // relative spread on each increment
};

struct SimDevice {
    std::string device_id;
    Technology technology{};
    std::string variant;  // campaign tuple qualifier (e.g. NB-IoT operator)
    std::string mp;
    connect::CodecKind codec{};
    std::int64_t interval_s = 0;
    MeterModel meter;
    Medium medium = Medium::unknown;      // defaulted per codec
    Quantity quantity = Quantity::energy;
};

struct SimScenario {
    std::string campaign_path;  // resolved against the scenario file
    std::vector<SimDevice> devices;
    std::int64_t duration_s = 0;
    std::uint64_t seed = 0;
    UnixSeconds start_at = 1704067200;  // 2024-01-01T00:00:00Z
    bool outliers = false;
};

Expected<SimScenario> scenario_from_json(const nlohmann::json& j);
Expected<SimScenario> load_scenario(const std::filesystem::path& file);

/// Campaign median for the tuple plus uniform jitter in [-3, +3] dB.
/// nullopt = the tuple has no samples ("-" in the campaign): unreachable.
/// An MP absent from the whole campaign is an error. With outliers
/// enabled, 1% of draws return median - 20 dB instead.
Expected<std::optional<double>> sample_rssi(const RssiCampaign& campaign,
                                            const std::string& mp,
                                            Technology technology,
                                            const std::string& variant,
                                            Direction direction,
                                            std::mt19937_64& rng,
                                            bool outliers = false);

struct DeviceReport {
    std::string device_id;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t suppressed = 0;  // unreachable / below the Wi-SUN floor
    std::map<std::string, std::uint64_t> rejected;
    std::uint64_t readings_expected = 0;

    std::uint64_t rejected_total() const;
};

struct SimReport {
    std::vector<DeviceReport> devices;

    nlohmann::json to_json() const;
};

/// Receives each emitted wire document, synchronously.
using Deliver = std::function<void(Technology technology,
                                   const std::string& device_id,
                                   const nlohmann::json& doc)>;

/// Virtual-time event loop: every device emits at start_at + k*interval_s
/// for k*interval_s < duration_s, in timestamp order (ties by device
/// order). Deterministic for a given scenario and seed.
Expected<SimReport> run(const SimScenario& scenario,
                        const RssiCampaign& campaign, const Deliver& deliver);

}  // namespace meterhub::sim
