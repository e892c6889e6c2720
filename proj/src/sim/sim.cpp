#include "meterhub/sim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include "meterhub/bytes.hpp"
#include "meterhub/codec/compact.hpp"
#include "meterhub/codec/mbus.hpp"
#include "meterhub/codec/pulse.hpp"
#include "meterhub/codec/sml.hpp"
#include "meterhub/radio/analysis.hpp"
#include "meterhub/radio/tx_budget.hpp"
#include "meterhub/time.hpp"

namespace meterhub::sim {
namespace {

double u01(std::mt19937_64& rng) {
    return (rng() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// The campaign measured RSSI network-side for LoRaWAN/Sigfox (uplink) and
// device-side for NB-IoT (hence downlink); Wi-SUN samples are synthetic
// and kept uplink.
Direction rssi_direction(Technology t) {
    return t == Technology::nbiot ? Direction::dl : Direction::ul;
}

const BandPlan* band_for(Technology t) {
    switch (t) {
        case Technology::lorawan:
        case Technology::sigfox: return &band_g1();
        case Technology::wisun: return &band_default868();
        case Technology::nbiot: return nullptr;  // licensed spectrum
    }
    return nullptr;
}

Expected<Bytes> encode_frame(const SimDevice& dev, double value) {
    switch (dev.codec) {
        case connect::CodecKind::mbus: {
            std::uint8_t vif = 0;
            long long raw = 0;
            switch (dev.quantity) {
                case Quantity::energy:  // 10^0 Wh
                    vif = 0x03;
                    raw = std::llround(value);
                    break;
                case Quantity::volume:  // 10^-3 m3
                    vif = 0x13;
                    raw = std::llround(value * 1000.0);
                    break;
                case Quantity::power:  // 10^0 W
                    vif = 0x2B;
                    raw = std::llround(value);
                    break;
                case Quantity::pulse_count:
                    return fail("mbus cannot carry pulse counts");
            }
            if (raw < 0 || raw > 99999999) return fail("codec over-range");
            return codec::encode_mbus(
                static_cast<std::uint32_t>(fnv1a(dev.device_id) % 100000000),
                codec::mbus_code_for_medium(dev.medium),
                {{0x0C, vif, static_cast<std::uint64_t>(raw)}});
        }
        case connect::CodecKind::sml: {
            codec::SmlValue v;
            std::uint8_t obis_medium = 0;
            switch (dev.medium) {
                case Medium::electricity: obis_medium = 1; break;
                case Medium::cooling: obis_medium = 5; break;
                case Medium::heat: obis_medium = 6; break;
                case Medium::gas: obis_medium = 7; break;
                default: obis_medium = 0; break;
            }
            v.obis = {obis_medium, 0x00, 0x01, 0x08, 0x00, 0xFF};
            if (dev.quantity == Quantity::energy)
                v.unit_code = 0x1E;
            else if (dev.quantity == Quantity::power)
                v.unit_code = 0x1B;
            else
                return fail("sml carries only energy or power");
            v.scaler = -1;
            v.value = std::llround(value * 10.0);
            return codec::encode_sml({v});
        }
        case connect::CodecKind::pulse: {
            const double counted = std::floor(value);
            if (counted < 0 || counted > 4294967295.0)
                return fail("codec over-range");
            return codec::encode_pulse(static_cast<std::uint32_t>(counted));
        }
        case connect::CodecKind::compact: {
            codec::DecodedRecord rec;
            rec.medium = dev.medium;
            rec.quantity = dev.quantity;
            rec.value = std::round(value * 1000.0) / 1000.0;
            return codec::encode_compact(rec);
        }
    }
    return fail("unknown codec");
}

nlohmann::json wire_doc(const SimDevice& dev, const Bytes& payload,
                        double rssi, UnixSeconds at, std::uint64_t seq) {
    switch (dev.technology) {
        case Technology::lorawan:
            return nlohmann::json{
                {"end_device_ids", {{"device_id", dev.device_id}}},
                {"received_at", format_iso8601(at)},
                {"uplink_message",
                 {{"frm_payload", to_base64(payload)},
                  {"rx_metadata", nlohmann::json::array({{{"rssi", rssi}}})}}}};
        case Technology::sigfox:
            return nlohmann::json{{"device", dev.device_id},
                                  {"time", at},
                                  {"data", to_hex(payload)},
                                  {"rssi", rssi},
                                  {"seqNumber", seq}};
        case Technology::nbiot:
        case Technology::wisun:
            return nlohmann::json{{"imei", dev.device_id},
                                  {"rssi_dbm", rssi},
                                  {"payload", to_hex(payload)},
                                  {"sent_at", at}};
    }
    return {};
}

Medium default_medium(connect::CodecKind codec) {
    switch (codec) {
        case connect::CodecKind::mbus: return Medium::heat;
        case connect::CodecKind::sml: return Medium::electricity;
        case connect::CodecKind::pulse: return Medium::unknown;
        case connect::CodecKind::compact: return Medium::heat;
    }
    return Medium::unknown;
}

}  // namespace

Expected<SimScenario> scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) return fail("scenario must be a JSON object");
    SimScenario sc;
    if (j.contains("campaign") && j["campaign"].is_string())
        sc.campaign_path = j["campaign"].get<std::string>();
    if (!j.contains("duration_s") || !j["duration_s"].is_number_integer())
        return fail("scenario needs integer duration_s");
    sc.duration_s = j["duration_s"].get<std::int64_t>();
    if (sc.duration_s < 0) return fail("duration_s must be >= 0");
    sc.seed = j.value("seed", std::uint64_t{0});
    sc.outliers = j.value("outliers", false);
    if (j.contains("start_at")) {
        if (j["start_at"].is_number_integer()) {
            sc.start_at = j["start_at"].get<UnixSeconds>();
        } else if (j["start_at"].is_string()) {
            auto t = parse_iso8601(j["start_at"].get<std::string>());
            if (!t) return fail("malformed start_at");
            sc.start_at = *t;
        } else {
            return fail("malformed start_at");
        }
    }

    if (!j.contains("devices") || !j["devices"].is_array())
        return fail("scenario needs a devices array");
    for (const auto& d : j["devices"]) {
        SimDevice dev;
        if (!d.contains("device_id") || !d["device_id"].is_string())
            return fail("device entry without device_id");
        dev.device_id = d["device_id"].get<std::string>();
        for (const auto& other : sc.devices)
            if (other.device_id == dev.device_id)
                return fail("duplicate device_id " + dev.device_id);

        const auto tech = technology_from_string(d.value("technology", ""));
        if (!tech)
            return fail("device " + dev.device_id + ": unknown technology");
        dev.technology = *tech;
        dev.variant = d.value("variant", std::string());
        if (!d.contains("mp") || !d["mp"].is_string())
            return fail("device " + dev.device_id + ": missing mp");
        dev.mp = d["mp"].get<std::string>();

        const auto codec = connect::codec_from_string(d.value("codec", ""));
        if (!codec) return fail("device " + dev.device_id + ": unknown codec");
        dev.codec = *codec;

        if (!d.contains("interval_s") || !d["interval_s"].is_number_integer())
            return fail("device " + dev.device_id + ": missing interval_s");
        dev.interval_s = d["interval_s"].get<std::int64_t>();
        if (dev.interval_s <= 0)
            return fail("device " + dev.device_id + ": interval_s must be > 0");

        dev.medium = default_medium(dev.codec);
        if (d.contains("medium")) {
            const auto m = medium_from_string(d["medium"].get<std::string>());
            if (!m) return fail("device " + dev.device_id + ": unknown medium");
            dev.medium = *m;
        }
        dev.quantity = dev.codec == connect::CodecKind::pulse
                           ? Quantity::pulse_count
                           : Quantity::energy;
        if (d.contains("quantity")) {
            const auto q =
                quantity_from_string(d["quantity"].get<std::string>());
            if (!q)
                return fail("device " + dev.device_id + ": unknown quantity");
            dev.quantity = *q;
        }

        if (d.contains("meter")) {
            const auto& m = d["meter"];
            if (!m.is_object())
                return fail("device " + dev.device_id + ": malformed meter");
            dev.meter.start = m.value("start", 0.0);
            dev.meter.rate_per_hour = m.value("rate_per_hour", 0.0);
            dev.meter.jitter_fraction = m.value("jitter_fraction", 0.0);
            if (dev.meter.jitter_fraction < 0 || dev.meter.jitter_fraction > 1)
                return fail("device " + dev.device_id +
                            ": jitter_fraction must be in [0, 1]");
        }
        sc.devices.push_back(std::move(dev));
    }
    return sc;
}

Expected<SimScenario> load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) return fail("cannot open scenario file " + file.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        return fail("scenario file " + file.string() + " is not valid JSON");
    auto sc = scenario_from_json(j);
    if (!sc.ok()) return sc;
    if (!sc.value().campaign_path.empty()) {
        const std::filesystem::path p = sc.value().campaign_path;
        if (p.is_relative())
            sc.value().campaign_path = (file.parent_path() / p).string();
    }
    return sc;
}

Expected<std::optional<double>> sample_rssi(const RssiCampaign& campaign,
                                            const std::string& mp,
                                            Technology technology,
                                            const std::string& variant,
                                            Direction direction,
                                            std::mt19937_64& rng,
                                            bool outliers) {
    bool mp_known = false;
    std::vector<double> tuple_samples;
    for (const auto& s : campaign.samples) {
        if (s.mp != mp) continue;
        mp_known = true;
        if (s.technology == technology && s.variant == variant &&
            s.direction == direction)
            tuple_samples.push_back(s.rssi_dbm);
    }
    if (!mp_known) return fail("unknown measurement point " + mp);
    if (tuple_samples.empty()) return std::optional<double>{};  // unreachable

    auto median = radio::median_rssi(std::move(tuple_samples));
    if (!median.ok()) return fail(median.error());
    if (outliers && u01(rng) < 0.01)
        return std::optional<double>{median.value() - 20.0};
    const double jitter = u01(rng) * 6.0 - 3.0;
    return std::optional<double>{median.value() + jitter};
}

std::uint64_t DeviceReport::rejected_total() const {
    std::uint64_t n = 0;
    for (const auto& [reason, count] : rejected) n += count;
    return n;
}

nlohmann::json SimReport::to_json() const {
    nlohmann::json devs = nlohmann::json::array();
    std::uint64_t generated = 0, delivered = 0, suppressed = 0, rejected = 0;
    for (const auto& d : devices) {
        nlohmann::json rej = nlohmann::json::object();
        for (const auto& [reason, count] : d.rejected) rej[reason] = count;
        devs.push_back({{"device_id", d.device_id},
                        {"generated", d.generated},
                        {"delivered", d.delivered},
                        {"suppressed", d.suppressed},
                        {"rejected", rej},
                        {"readings_expected", d.readings_expected}});
        generated += d.generated;
        delivered += d.delivered;
        suppressed += d.suppressed;
        rejected += d.rejected_total();
    }
    return {{"devices", devs},
            {"totals",
             {{"generated", generated},
              {"delivered", delivered},
              {"suppressed", suppressed},
              {"rejected", rejected}}}};
}

Expected<SimReport> run(const SimScenario& scenario,
                        const RssiCampaign& campaign, const Deliver& deliver) {
    // validate before any emission
    for (const auto& dev : scenario.devices) {
        if (dev.interval_s <= 0)
            return fail("device " + dev.device_id + ": interval_s must be > 0");
        bool known = false;
        for (const auto& s : campaign.samples)
            if (s.mp == dev.mp) {
                known = true;
                break;
            }
        if (!known)
            return fail("device " + dev.device_id +
                        ": unknown measurement point " + dev.mp);
        if (dev.codec == connect::CodecKind::mbus &&
            dev.quantity == Quantity::pulse_count)
            return fail("device " + dev.device_id +
                        ": mbus cannot carry pulse counts");
        if (dev.codec == connect::CodecKind::sml &&
            dev.quantity != Quantity::energy &&
            dev.quantity != Quantity::power)
            return fail("device " + dev.device_id +
                        ": sml carries only energy or power");
    }

    struct DeviceState {
        double register_value = 0;
        std::mt19937_64 rng;
        radio::TxBudgetLedger ledger;
        std::uint64_t emitted = 0;
    };

    SimReport report;
    std::vector<DeviceState> states;
    for (std::size_t i = 0; i < scenario.devices.size(); ++i) {
        const SimDevice& dev = scenario.devices[i];
        DeviceState st;
        st.register_value = dev.meter.start;
        std::seed_seq seq{scenario.seed, static_cast<std::uint64_t>(i)};
        st.rng.seed(seq);
        st.ledger.device_id = dev.device_id;
        st.ledger.technology = dev.technology;
        states.push_back(std::move(st));
        DeviceReport dev_report;
        dev_report.device_id = dev.device_id;
        report.devices.push_back(std::move(dev_report));
    }

    // (time offset, device index) min-heap; ties resolve by device order
    using Event = std::pair<std::int64_t, std::size_t>;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    for (std::size_t i = 0; i < scenario.devices.size(); ++i)
        if (scenario.duration_s > 0) events.emplace(0, i);

    while (!events.empty()) {
        const auto [offset, i] = events.top();
        events.pop();
        const SimDevice& dev = scenario.devices[i];
        DeviceState& st = states[i];
        DeviceReport& rep = report.devices[i];
        const UnixSeconds at = scenario.start_at + offset;

        if (offset + dev.interval_s < scenario.duration_s)
            events.emplace(offset + dev.interval_s, i);

        rep.generated += 1;
        if (offset > 0) {
            const double u = u01(st.rng) * 2.0 - 1.0;
            const double hours = static_cast<double>(dev.interval_s) / 3600.0;
            st.register_value += dev.meter.rate_per_hour * hours *
                                 (1.0 + dev.meter.jitter_fraction * u);
        }

        auto rssi = sample_rssi(campaign, dev.mp, dev.technology, dev.variant,
                                rssi_direction(dev.technology), st.rng,
                                scenario.outliers);
        if (!rssi.ok()) return fail(rssi.error());
        if (!rssi.value().has_value()) {
            rep.suppressed += 1;  // no coverage at this MP
            continue;
        }
        const double rssi_dbm = *rssi.value();
        if (dev.technology == Technology::wisun &&
            !radio::wisun_reachable(rssi_dbm)) {
            rep.suppressed += 1;
            continue;
        }

        auto payload = encode_frame(dev, st.register_value);
        if (!payload.ok()) {
            rep.rejected[payload.error()] += 1;
            continue;
        }

        const TechnologyLimits& limits = technology_limits(dev.technology);
        auto tx = radio::record_tx(st.ledger, limits, band_for(dev.technology),
                                   static_cast<int>(payload.value().size()),
                                   limits.data_rate_ul_kbps.min_kbps, at,
                                   Direction::ul);
        if (!tx.ok()) {
            rep.rejected[tx.error()] += 1;
            continue;
        }

        deliver(dev.technology, dev.device_id,
                wire_doc(dev, payload.value(), rssi_dbm, at, st.emitted));
        st.emitted += 1;
        rep.delivered += 1;
        rep.readings_expected += 1;
    }
    return report;
}

}  // namespace meterhub::sim
