#include "meterhub/types.hpp"

#include <cmath>

namespace meterhub {

std::string_view to_string(Technology t) {
    switch (t) {
        case Technology::lorawan: return "lorawan";
        case Technology::nbiot: return "nbiot";
        case Technology::sigfox: return "sigfox";
        case Technology::wisun: return "wisun";
    }
    return "?";
}

std::optional<Technology> technology_from_string(std::string_view s) {
    for (Technology t : kAllTechnologies)
        if (s == to_string(t)) return t;
    return std::nullopt;
}

std::string_view to_string(Direction d) {
    return d == Direction::ul ? "UL" : "DL";
}

std::optional<Direction> direction_from_string(std::string_view s) {
    if (s == "UL") return Direction::ul;
    if (s == "DL") return Direction::dl;
    return std::nullopt;
}

const std::array<RadioProfile, 4>& radio_profiles() {
    static const std::array<RadioProfile, 4> profiles = {{
        {Technology::lorawan, {868.0}, 14.0, 27.0, 14.0, -140.0, -136.0},
        {Technology::nbiot, {800.0, 900.0}, 23.0, std::nullopt, 23.0, -131.0,
         -131.0},
        {Technology::sigfox, {868.0}, 27.0, std::nullopt, 14.0, -144.0,
         -132.0},
        {Technology::wisun, {868.0}, 14.0, std::nullopt, 14.0, -120.0,
         -120.0},
    }};
    return profiles;
}

const RadioProfile& radio_profile(Technology t) {
    for (const RadioProfile& p : radio_profiles())
        if (p.technology == t) return p;
    return radio_profiles()[0];  // unreachable for valid enum values
}

const TechnologyLimits& technology_limits(Technology t) {
    // Message caps are operator policy: Sigfox 140 UL / 4 DL per day with
    // 12 B / 8 B payloads, community LoRaWAN 30 s airtime per day, NB-IoT
    // and Wi-SUN unlimited counts. LoRaWAN payload defaults to the lowest
    // data-rate class; payload_cap() resolves other classes.
    static const std::array<TechnologyLimits, 4> limits = {{
        {Technology::lorawan, {0.25, 11.0}, {0.25, 11.0}, 51, 51, std::nullopt,
         std::nullopt, 30.0, 0.0, 9.0},
        {Technology::nbiot, {62.0, 159.0}, {26.0, 127.0}, 512, 512,
         std::nullopt, std::nullopt, std::nullopt, 1.1, 12.0},
        {Technology::sigfox, {0.1, 0.1}, {0.1, 0.1}, 12, 8, 140, 4,
         std::nullopt, 10.0, 9.0},
        {Technology::wisun, {300.0, 300.0}, {300.0, 300.0}, 512, 512,
         std::nullopt, std::nullopt, std::nullopt, 0.0, 20.0},
    }};
    for (const TechnologyLimits& l : limits)
        if (l.technology == t) return l;
    return limits[0];
}

const BandPlan& band_g1() {
    static const BandPlan b{"G1", 868.0, 868.6, 14.0, 0.01};
    return b;
}

const BandPlan& band_g3() {
    static const BandPlan b{"G3", 869.4, 869.65, 27.0, 0.10};
    return b;
}

const BandPlan& band_default868() {
    static const BandPlan b{"default-868", 863.0, 870.0, 14.0, 0.001};
    return b;
}

const BandPlan* band_plan_by_name(std::string_view name) {
    if (name == band_g1().name) return &band_g1();
    if (name == band_g3().name) return &band_g3();
    if (name == band_default868().name) return &band_default868();
    return nullptr;
}

std::string_view to_string(MpCategory c) {
    switch (c) {
        case MpCategory::outdoor: return "outdoor";
        case MpCategory::indoor_ground: return "indoor-ground";
        case MpCategory::basement: return "basement";
        case MpCategory::tunnel: return "tunnel";
    }
    return "?";
}

std::optional<MpCategory> mp_category(std::string_view mp_id) {
    if (mp_id.size() < 2) return std::nullopt;
    for (size_t i = 1; i < mp_id.size(); ++i)
        if (mp_id[i] < '0' || mp_id[i] > '9') return std::nullopt;
    switch (mp_id[0]) {
        case 'O': return MpCategory::outdoor;
        case 'I': return MpCategory::indoor_ground;
        case 'B': return MpCategory::basement;
        case 'T': return MpCategory::tunnel;
        default: return std::nullopt;
    }
}

std::string_view to_string(Medium m) {
    switch (m) {
        case Medium::heat: return "heat";
        case Medium::cooling: return "cooling";
        case Medium::gas: return "gas";
        case Medium::electricity: return "electricity";
        case Medium::water: return "water";
        case Medium::unknown: return "unknown";
    }
    return "?";
}

std::optional<Medium> medium_from_string(std::string_view s) {
    for (Medium m : {Medium::heat, Medium::cooling, Medium::gas,
                     Medium::electricity, Medium::water, Medium::unknown})
        if (s == to_string(m)) return m;
    return std::nullopt;
}

std::string_view to_string(Quantity q) {
    switch (q) {
        case Quantity::energy: return "energy";
        case Quantity::volume: return "volume";
        case Quantity::power: return "power";
        case Quantity::pulse_count: return "pulse_count";
    }
    return "?";
}

std::optional<Quantity> quantity_from_string(std::string_view s) {
    for (Quantity q : {Quantity::energy, Quantity::volume, Quantity::power,
                       Quantity::pulse_count})
        if (s == to_string(q)) return q;
    return std::nullopt;
}

std::string_view to_string(Unit u) {
    switch (u) {
        case Unit::wh: return "Wh";
        case Unit::m3: return "m3";
        case Unit::w: return "W";
        case Unit::count: return "count";
    }
    return "?";
}

std::optional<Unit> unit_from_string(std::string_view s) {
    for (Unit u : {Unit::wh, Unit::m3, Unit::w, Unit::count})
        if (s == to_string(u)) return u;
    return std::nullopt;
}

Unit unit_for(Quantity q) {
    switch (q) {
        case Quantity::energy: return Unit::wh;
        case Quantity::volume: return Unit::m3;
        case Quantity::power: return Unit::w;
        case Quantity::pulse_count: return Unit::count;
    }
    return Unit::wh;
}

std::string sanitize_topic_level(std::string_view level) {
    std::string out(level);
    for (char& c : out)
        if (c == '/' || c == '+' || c == '#') c = '_';
    return out;
}

std::string topic_for(const MeterReading& reading) {
    std::string topic = "meterhub/readings/";
    topic += to_string(reading.technology);
    topic += '/';
    topic += sanitize_topic_level(reading.device_id);
    return topic;
}

std::vector<std::string> validate_reading(const MeterReading& r) {
    std::vector<std::string> violations;
    if (r.schema != kReadingSchema)
        violations.push_back("unknown schema \"" + r.schema + "\"");
    if (r.unit != unit_for(r.quantity))
        violations.push_back("unit mismatch: quantity " +
                             std::string(to_string(r.quantity)) +
                             " requires " +
                             std::string(to_string(unit_for(r.quantity))) +
                             ", got " + std::string(to_string(r.unit)));
    if (!std::isfinite(r.value)) violations.push_back("non-finite value");
    if (r.timestamp < 0) violations.push_back("malformed timestamp");
    return violations;
}

}  // namespace meterhub
