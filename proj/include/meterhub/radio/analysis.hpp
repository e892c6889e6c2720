#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meterhub/expected.hpp"
#include "meterhub/types.hpp"

namespace meterhub::radio {

/// Maximum tolerable path loss: transmitter power minus receiver
/// sensitivity, per direction. boosted_budget_db is present for downlinks
/// of technologies whose gateway has a high-power mode.
struct LinkBudget {
    Technology technology{};
    Direction direction{};
    double budget_db = 0;
    std::optional<double> boosted_budget_db;
};

/// UL: device power - gateway sensitivity. DL: gateway power (boosted
/// selects the high-power level where available) - device sensitivity.
/// Requesting boosted for an uplink or for a technology without a boosted
/// gateway power is an error.
Expected<LinkBudget> link_budget(const RadioProfile& profile,
                                 Direction direction, bool boosted = false);

/// Median by the standard definition: middle order statistic for odd
/// counts, mean of the two middle ones for even counts. Empty input is an
/// error.
Expected<double> median_rssi(std::vector<double> samples);

/// Building penetration loss: outdoor RSSI minus indoor RSSI for the same
/// link, in dB.
double bpl(double outdoor_rssi_dbm, double indoor_rssi_dbm);

/// Linear power attenuation corresponding to a dB loss: 10^(db/10).
double attenuation_factor(double bpl_db);

/// In-building coverage estimate: 10 dB per ceiling upstairs, 55 dB down
/// to the basement. ceilings_up > 0 together with to_basement is
/// contradictory and an error.
Expected<double> indoor_floor_rssi(double ref_rssi_dbm, int ceilings_up,
                                   bool to_basement);

inline constexpr double kWisunRssiFloorDbm = -95.0;

/// A stable mesh link needs RSSI of at least -95 dBm (boundary inclusive).
bool wisun_reachable(double rssi_dbm);

/// Idealized transmission time: payload bits over the raw data rate. No
/// preamble or coding overhead is modeled.
Expected<double> airtime_s(int payload_bytes, double data_rate_kbps);

/// Transmit seconds permitted inside a window under the band's duty cycle.
double duty_cycle_allowance(const BandPlan& band, double window_s);

/// Uplink payload limit in bytes for a technology and data-rate class.
/// LoRaWAN follows the EU868 class table (DR0-2: 51, DR3: 115, DR4-5:
/// 222); Sigfox is fixed 12 UL / 8 DL; NB-IoT and Wi-SUN use the
/// configured cap.
Expected<int> payload_cap(Technology technology, std::string_view data_rate_class,
                          Direction direction, int configured_cap = 512);

/// Module plus subscription cost for a fleet over a number of years.
/// Sigfox bills annually; NB-IoT SIMs are sold in 10-year blocks (started
/// blocks count in full); LoRaWAN and Wi-SUN have no subscription.
double fleet_cost_eur(const std::map<Technology, int>& fleet, int years);

// ---------------------------------------------------------------------------
// BPL table

struct BplKey {
    std::string mp;
    Technology technology{};
    std::string variant;
    Direction direction{};

    friend bool operator<(const BplKey& a, const BplKey& b) {
        return std::tie(a.mp, a.technology, a.variant, a.direction) <
               std::tie(b.mp, b.technology, b.variant, b.direction);
    }
    friend bool operator==(const BplKey& a, const BplKey& b) {
        return std::tie(a.mp, a.technology, a.variant, a.direction) ==
               std::tie(b.mp, b.technology, b.variant, b.direction);
    }
};

/// One cell per (indoor MP, technology tuple). A cell without a value
/// marks the MP unreachable for that tuple (no samples in the campaign).
struct BplTable {
    std::map<BplKey, std::optional<double>> cells;
};

/// Computes penetration losses for every indoor/basement/tunnel MP and
/// every technology tuple present in the campaign: median of the mapped
/// outdoor reference samples minus median of the indoor samples, reported
/// at 0.5 dB resolution. Tuples without indoor samples become unreachable
/// cells; explicitly unmapped tuples are omitted. A mapping whose outdoor
/// reference has no samples is an error naming the pair.
Expected<BplTable> bpl_table(const RssiCampaign& campaign);

/// CSV export: header mp,technology,variant,direction,bpl_db with
/// "unreachable" in the value column where applicable.
std::string bpl_table_csv(const BplTable& table);

/// "23", "9.5": integral values print without a decimal point.
std::string format_db(double v);

}  // namespace meterhub::radio
