#include "meterhub/radio/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace meterhub::radio {

Expected<LinkBudget> link_budget(const RadioProfile& profile,
                                 Direction direction, bool boosted) {
    LinkBudget out;
    out.technology = profile.technology;
    out.direction = direction;
    if (boosted && direction == Direction::ul)
        return fail("boosted power applies to the downlink only");
    if (boosted && !profile.tx_power_gw_boost_dbm)
        return fail(std::string(to_string(profile.technology)) +
                    " has no boosted gateway power");

    if (direction == Direction::ul) {
        out.budget_db = profile.tx_power_dev_dbm - profile.rx_sens_gw_dbm;
    } else {
        double tx = boosted ? *profile.tx_power_gw_boost_dbm
                            : profile.tx_power_gw_dbm;
        out.budget_db = tx - profile.rx_sens_dev_dbm;
        if (profile.tx_power_gw_boost_dbm)
            out.boosted_budget_db =
                *profile.tx_power_gw_boost_dbm - profile.rx_sens_dev_dbm;
    }
    return out;
}

Expected<double> median_rssi(std::vector<double> samples) {
    if (samples.empty()) return fail("median of empty sample list");
    std::sort(samples.begin(), samples.end());
    size_t n = samples.size();
    if (n % 2 == 1) return samples[n / 2];
    return (samples[n / 2 - 1] + samples[n / 2]) / 2.0;
}

double bpl(double outdoor_rssi_dbm, double indoor_rssi_dbm) {
    return outdoor_rssi_dbm - indoor_rssi_dbm;
}

double attenuation_factor(double bpl_db) {
    return std::pow(10.0, bpl_db / 10.0);
}

Expected<double> indoor_floor_rssi(double ref_rssi_dbm, int ceilings_up,
                                   bool to_basement) {
    if (ceilings_up < 0) return fail("negative ceiling count");
    if (ceilings_up > 0 && to_basement)
        return fail("ceilings_up and to_basement are mutually exclusive");
    if (to_basement) return ref_rssi_dbm - 55.0;
    return ref_rssi_dbm - 10.0 * ceilings_up;
}

bool wisun_reachable(double rssi_dbm) {
    return rssi_dbm >= kWisunRssiFloorDbm;
}

Expected<double> airtime_s(int payload_bytes, double data_rate_kbps) {
    if (payload_bytes < 0) return fail("negative payload size");
    if (data_rate_kbps <= 0) return fail("non-positive data rate");
    return payload_bytes * 8.0 / (data_rate_kbps * 1000.0);
}

double duty_cycle_allowance(const BandPlan& band, double window_s) {
    return window_s * band.duty_cycle;
}

Expected<int> payload_cap(Technology technology,
                          std::string_view data_rate_class,
                          Direction direction, int configured_cap) {
    switch (technology) {
        case Technology::lorawan: {
            if (data_rate_class.size() != 3 ||
                data_rate_class.substr(0, 2) != "DR")
                return fail("unknown data-rate class \"" +
                            std::string(data_rate_class) + "\"");
            char c = data_rate_class[2];
            if (c < '0' || c > '5')
                return fail("unknown data-rate class \"" +
                            std::string(data_rate_class) + "\"");
            if (c <= '2') return 51;
            if (c == '3') return 115;
            return 222;
        }
        case Technology::sigfox:
            return direction == Direction::ul ? 12 : 8;
        case Technology::nbiot:
        case Technology::wisun:
            return configured_cap;
    }
    return fail("unknown technology");
}

double fleet_cost_eur(const std::map<Technology, int>& fleet, int years) {
    double total = 0;
    for (const auto& [tech, count] : fleet) {
        if (count <= 0) continue;
        const TechnologyLimits& limits = technology_limits(tech);
        double per_device = limits.module_cost_eur;
        switch (tech) {
            case Technology::sigfox:
                per_device += 10.0 * years;
                break;
            case Technology::nbiot:
                // SIM blocks of 10 years; a started block counts in full
                per_device += 11.0 * ((years + 9) / 10);
                break;
            default:
                break;
        }
        total += per_device * count;
    }
    return total;
}

// ---------------------------------------------------------------------------

namespace {

struct TechTuple {
    Technology technology{};
    std::string variant;
    Direction direction{};

    friend bool operator<(const TechTuple& a, const TechTuple& b) {
        return std::tie(a.technology, a.variant, a.direction) <
               std::tie(b.technology, b.variant, b.direction);
    }
};

double round_half_db(double v) { return std::round(v * 2.0) / 2.0; }

std::string tuple_label(const TechTuple& t) {
    std::string s(to_string(t.technology));
    if (!t.variant.empty()) s += "/" + t.variant;
    s += " ";
    s += to_string(t.direction);
    return s;
}

}  // namespace

Expected<BplTable> bpl_table(const RssiCampaign& campaign) {
    std::set<TechTuple> tuples;
    std::set<std::string> indoor_mps;
    std::map<std::pair<std::string, TechTuple>, std::vector<double>> by_cell;

    for (const RssiSample& s : campaign.samples) {
        auto cat = mp_category(s.mp);
        if (!cat) return fail("malformed MP id \"" + s.mp + "\"");
        TechTuple t{s.technology, s.variant, s.direction};
        tuples.insert(t);
        if (*cat != MpCategory::outdoor) indoor_mps.insert(s.mp);
        by_cell[{s.mp, t}].push_back(s.rssi_dbm);
    }

    auto find_mapping = [&](const std::string& mp, const TechTuple& t)
        -> const ReferenceMapping* {
        for (const ReferenceMapping& m : campaign.reference_map) {
            if (m.indoor == mp && m.technology == t.technology &&
                m.variant == t.variant && m.direction == t.direction)
                return &m;
        }
        return nullptr;
    };

    BplTable table;
    for (const std::string& mp : indoor_mps) {
        for (const TechTuple& t : tuples) {
            BplKey key{mp, t.technology, t.variant, t.direction};
            auto it = by_cell.find({mp, t});
            if (it == by_cell.end()) {
                table.cells[key] = std::nullopt;  // unreachable
                continue;
            }
            const ReferenceMapping* m = find_mapping(mp, t);
            if (!m)
                return fail("indoor MP " + mp + " has samples for " +
                            tuple_label(t) + " but no reference mapping");
            if (!m->outdoor) continue;  // explicitly unmapped, no cell
            auto out_it = by_cell.find({*m->outdoor, t});
            if (out_it == by_cell.end())
                return fail("outdoor reference " + *m->outdoor + " for " + mp +
                            " (" + tuple_label(t) + ") has no samples");
            auto outdoor_median = median_rssi(out_it->second);
            auto indoor_median = median_rssi(it->second);
            // both sample lists are non-empty by construction
            table.cells[key] = round_half_db(
                bpl(outdoor_median.value(), indoor_median.value()));
        }
    }
    return table;
}

std::string format_db(double v) {
    std::ostringstream os;
    if (v == std::floor(v)) {
        os << static_cast<long long>(v);
    } else {
        os.setf(std::ios::fixed);
        os.precision(1);
        os << v;
    }
    return os.str();
}

std::string bpl_table_csv(const BplTable& table) {
    std::string out = "mp,technology,variant,direction,bpl_db\n";
    for (const auto& [key, cell] : table.cells) {
        out += key.mp;
        out += ',';
        out += to_string(key.technology);
        out += ',';
        out += key.variant;
        out += ',';
        out += to_string(key.direction);
        out += ',';
        out += cell ? format_db(*cell) : "unreachable";
        out += '\n';
    }
    return out;
}

}  // namespace meterhub::radio
