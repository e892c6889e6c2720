#include "meterhub/campaign.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace meterhub {

using nlohmann::json;

namespace {

Expected<RssiSample> sample_from_json(const json& j) {
    RssiSample s;
    try {
        s.mp = j.at("mp").get<std::string>();
        auto tech = technology_from_string(j.at("technology").get<std::string>());
        if (!tech) return fail("sample with unknown technology");
        s.technology = *tech;
        s.variant = j.value("variant", std::string());
        auto dir = direction_from_string(j.at("direction").get<std::string>());
        if (!dir) return fail("sample with unknown direction");
        s.direction = *dir;
        s.rssi_dbm = j.at("rssi_dbm").get<double>();
        if (j.contains("captured_at")) {
            auto t = parse_iso8601(j.at("captured_at").get<std::string>());
            if (!t) return fail("sample with malformed captured_at");
            s.captured_at = *t;
        }
    } catch (const json::exception& e) {
        return fail(std::string("malformed sample: ") + e.what());
    }
    return s;
}

Expected<ReferenceMapping> mapping_from_json(const json& j) {
    ReferenceMapping m;
    try {
        m.indoor = j.at("indoor").get<std::string>();
        auto tech = technology_from_string(j.at("technology").get<std::string>());
        if (!tech) return fail("mapping with unknown technology");
        m.technology = *tech;
        m.variant = j.value("variant", std::string());
        auto dir = direction_from_string(j.at("direction").get<std::string>());
        if (!dir) return fail("mapping with unknown direction");
        m.direction = *dir;
        if (j.contains("outdoor") && !j.at("outdoor").is_null())
            m.outdoor = j.at("outdoor").get<std::string>();
    } catch (const json::exception& e) {
        return fail(std::string("malformed mapping: ") + e.what());
    }
    return m;
}

}  // namespace

Expected<RssiCampaign> campaign_from_json(const json& j) {
    if (!j.is_object()) return fail("campaign is not a JSON object");
    RssiCampaign c;
    if (j.contains("samples")) {
        if (!j.at("samples").is_array()) return fail("samples is not an array");
        for (const json& js : j.at("samples")) {
            auto s = sample_from_json(js);
            if (!s) return fail(s.error());
            c.samples.push_back(std::move(s).take());
        }
    }
    if (j.contains("reference_map")) {
        if (!j.at("reference_map").is_array())
            return fail("reference_map is not an array");
        for (const json& jm : j.at("reference_map")) {
            auto m = mapping_from_json(jm);
            if (!m) return fail(m.error());
            c.reference_map.push_back(std::move(m).take());
        }
    }
    return c;
}

Expected<RssiCampaign> load_campaign(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) return fail("cannot open campaign file " + file.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        return fail("invalid JSON in campaign file " + file.string());
    return campaign_from_json(j);
}

json campaign_to_json(const RssiCampaign& c) {
    json samples = json::array();
    for (const RssiSample& s : c.samples) {
        json js{{"mp", s.mp},
                {"technology", to_string(s.technology)},
                {"variant", s.variant},
                {"direction", to_string(s.direction)},
                {"rssi_dbm", s.rssi_dbm}};
        if (s.captured_at != 0) js["captured_at"] = format_iso8601(s.captured_at);
        samples.push_back(std::move(js));
    }
    json mappings = json::array();
    for (const ReferenceMapping& m : c.reference_map) {
        json jm{{"indoor", m.indoor},
                {"technology", to_string(m.technology)},
                {"variant", m.variant},
                {"direction", to_string(m.direction)}};
        if (m.outdoor)
            jm["outdoor"] = *m.outdoor;
        else
            jm["outdoor"] = nullptr;
        mappings.push_back(std::move(jm));
    }
    return json{{"samples", samples}, {"reference_map", mappings}};
}

std::vector<std::string> validate_campaign(const RssiCampaign& c) {
    std::vector<std::string> violations;

    using TupleKey = std::tuple<std::string, Technology, std::string, Direction>;
    std::set<TupleKey> indoor_tuples;

    for (const RssiSample& s : c.samples) {
        auto cat = mp_category(s.mp);
        if (!cat) {
            violations.push_back("sample with malformed MP id \"" + s.mp + "\"");
            continue;
        }
        if (s.rssi_dbm < -150.0 || s.rssi_dbm > 0.0) {
            std::ostringstream os;
            os << "sample at " << s.mp << " with RSSI " << s.rssi_dbm
               << " dBm outside [-150, 0]";
            violations.push_back(os.str());
        }
        if (*cat != MpCategory::outdoor)
            indoor_tuples.insert({s.mp, s.technology, s.variant, s.direction});
    }

    std::set<TupleKey> mapped;
    for (const ReferenceMapping& m : c.reference_map) {
        mapped.insert({m.indoor, m.technology, m.variant, m.direction});
        auto cat = mp_category(m.indoor);
        if (!cat || *cat == MpCategory::outdoor)
            violations.push_back("mapping for non-indoor MP \"" + m.indoor +
                                 "\"");
        if (m.outdoor) {
            auto ocat = mp_category(*m.outdoor);
            if (!ocat || *ocat != MpCategory::outdoor)
                violations.push_back("mapping " + m.indoor +
                                     " -> non-outdoor MP \"" + *m.outdoor +
                                     "\"");
        }
    }

    for (const TupleKey& key : indoor_tuples) {
        if (!mapped.count(key)) {
            violations.push_back(
                "indoor MP " + std::get<0>(key) + " has samples for " +
                std::string(to_string(std::get<1>(key))) +
                (std::get<2>(key).empty() ? "" : "/" + std::get<2>(key)) + " " +
                std::string(to_string(std::get<3>(key))) +
                " but no reference mapping");
        }
    }
    return violations;
}

}  // namespace meterhub
