#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meterhub/bytes.hpp"
#include "meterhub/time.hpp"

namespace meterhub {

// ---------------------------------------------------------------------------
// Technologies

enum class Technology { lorawan, nbiot, sigfox, wisun };

constexpr std::array<Technology, 4> kAllTechnologies = {
    Technology::lorawan, Technology::nbiot, Technology::sigfox,
    Technology::wisun};

std::string_view to_string(Technology t);
std::optional<Technology> technology_from_string(std::string_view s);

enum class Direction { ul, dl };

std::string_view to_string(Direction d);
std::optional<Direction> direction_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// Radio parameters

/// Per-technology transmit powers and receive sensitivities. The gateway
/// side may have a boosted power level for the high-power downlink band.
struct RadioProfile {
    Technology technology;
    std::vector<double> band_mhz;
    double tx_power_gw_dbm = 0;
    std::optional<double> tx_power_gw_boost_dbm;
    double tx_power_dev_dbm = 0;
    double rx_sens_gw_dbm = 0;
    double rx_sens_dev_dbm = 0;
};

const RadioProfile& radio_profile(Technology t);
const std::array<RadioProfile, 4>& radio_profiles();

struct RateRange {
    double min_kbps = 0;
    double max_kbps = 0;
};

/// Operator/regulatory caps and costs per technology. A missing optional
/// means unlimited.
struct TechnologyLimits {
    Technology technology;
    RateRange data_rate_ul_kbps;
    RateRange data_rate_dl_kbps;
    int max_payload_ul_bytes = 0;  // default data-rate class; see payload_cap
    int max_payload_dl_bytes = 0;
    std::optional<int> max_ul_msgs_per_day;
    std::optional<int> max_dl_msgs_per_day;
    std::optional<double> max_airtime_s_per_day;
    double annual_cost_eur = 0;
    double module_cost_eur = 0;
};

const TechnologyLimits& technology_limits(Technology t);

/// Sub-band regulation: frequency range, power limit, duty cycle.
struct BandPlan {
    std::string name;
    double freq_lo_mhz = 0;
    double freq_hi_mhz = 0;
    double max_tx_dbm = 0;
    double duty_cycle = 0;  // fraction of time allowed to transmit
};

const BandPlan& band_g1();          // 868.0-868.6 MHz, 14 dBm, 1%
const BandPlan& band_g3();          // 869.4-869.65 MHz, 27 dBm, 10%
const BandPlan& band_default868();  // 14 dBm, 0.1%
const BandPlan* band_plan_by_name(std::string_view name);

// ---------------------------------------------------------------------------
// Measurement campaign

enum class MpCategory { outdoor, indoor_ground, basement, tunnel };

std::string_view to_string(MpCategory c);

/// Category is encoded in the id prefix: O outdoor, I indoor ground floor,
/// B basement, T tunnel. Returns nullopt for malformed ids.
std::optional<MpCategory> mp_category(std::string_view mp_id);

struct RssiSample {
    std::string mp;
    Technology technology{};
    std::string variant;  // e.g. operator label for nbiot; empty otherwise
    Direction direction{};
    double rssi_dbm = 0;
    UnixSeconds captured_at = 0;
};

/// Maps an indoor/basement/tunnel MP to its outdoor reference MP for one
/// technology tuple. outdoor == nullopt marks an explicitly unmapped MP.
struct ReferenceMapping {
    std::string indoor;
    Technology technology{};
    std::string variant;
    Direction direction{};
    std::optional<std::string> outdoor;
};

struct RssiCampaign {
    std::vector<RssiSample> samples;
    std::vector<ReferenceMapping> reference_map;
};

// ---------------------------------------------------------------------------
// Readings and uplinks

enum class Medium { heat, cooling, gas, electricity, water, unknown };
enum class Quantity { energy, volume, power, pulse_count };
enum class Unit { wh, m3, w, count };

std::string_view to_string(Medium m);
std::optional<Medium> medium_from_string(std::string_view s);
std::string_view to_string(Quantity q);
std::optional<Quantity> quantity_from_string(std::string_view s);
std::string_view to_string(Unit u);
std::optional<Unit> unit_from_string(std::string_view s);

/// The unit each quantity must carry (energy->Wh, volume->m3, power->W,
/// pulse_count->count).
Unit unit_for(Quantity q);

struct LinkInfo {
    std::optional<double> rssi_dbm;
    std::optional<double> snr_db;
    std::optional<int> gateway_count;
};

inline constexpr std::string_view kReadingSchema = "meterhub.reading.v1";

/// The normalized canonical reading published to the hub.
struct MeterReading {
    std::string schema = std::string(kReadingSchema);
    std::string device_id;
    Technology technology{};
    UnixSeconds timestamp = 0;
    Medium medium = Medium::unknown;
    Quantity quantity = Quantity::energy;
    double value = 0;
    Unit unit = Unit::wh;
    LinkInfo link;
    std::string raw;  // lowercase hex of the original payload
};

/// Technology-tagged binary payload plus link metadata, as received by a
/// connector before decoding.
struct RawUplink {
    Technology technology{};
    std::string device_id;
    Bytes payload;
    LinkInfo link;
    UnixSeconds received_at = 0;
};

// ---------------------------------------------------------------------------
// Operations

/// meterhub/readings/<technology>/<device_id>, device id sanitized so it
/// cannot inject topic levels or wildcards ('/', '+', '#' -> '_').
std::string topic_for(const MeterReading& reading);

std::string sanitize_topic_level(std::string_view level);

/// Returns all invariant violations; an empty list means the reading is
/// well formed. Violations are data, not failures.
std::vector<std::string> validate_reading(const MeterReading& reading);

}  // namespace meterhub
