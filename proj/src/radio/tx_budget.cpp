#include "meterhub/radio/tx_budget.hpp"

#include "meterhub/radio/analysis.hpp"

namespace meterhub::radio {

Expected<double> record_tx(TxBudgetLedger& ledger,
                           const TechnologyLimits& limits,
                           const BandPlan* band, int payload_bytes,
                           double data_rate_kbps, UnixSeconds at,
                           Direction direction) {
    int cap = direction == Direction::ul ? limits.max_payload_ul_bytes
                                         : limits.max_payload_dl_bytes;
    if (payload_bytes > cap) return fail(kRejectPayload);

    auto airtime = airtime_s(payload_bytes, data_rate_kbps);
    if (!airtime) return fail(airtime.error());

    // roll the day window
    UnixSeconds day = utc_day_start(at);
    if (day != ledger.window_start) {
        ledger.window_start = day;
        ledger.airtime_used_s = 0;
        ledger.ul_count = 0;
        ledger.dl_count = 0;
    }
    // trim the rolling hour
    while (!ledger.recent_tx.empty() &&
           ledger.recent_tx.front().first <=
               at - static_cast<UnixSeconds>(kDutyCycleWindowS))
        ledger.recent_tx.pop_front();

    if (direction == Direction::ul) {
        if (limits.max_ul_msgs_per_day &&
            ledger.ul_count >= *limits.max_ul_msgs_per_day)
            return fail(kRejectUlCap);
    } else {
        if (limits.max_dl_msgs_per_day &&
            ledger.dl_count >= *limits.max_dl_msgs_per_day)
            return fail(kRejectDlCap);
    }

    if (limits.max_airtime_s_per_day &&
        ledger.airtime_used_s + airtime.value() > *limits.max_airtime_s_per_day)
        return fail(kRejectAirtime);

    if (band) {
        double used_in_window = 0;
        for (const auto& [t, dur] : ledger.recent_tx) used_in_window += dur;
        if (used_in_window + airtime.value() >
            duty_cycle_allowance(*band, kDutyCycleWindowS))
            return fail(kRejectDutyCycle);
    }

    if (direction == Direction::ul)
        ++ledger.ul_count;
    else
        ++ledger.dl_count;
    ledger.airtime_used_s += airtime.value();
    ledger.recent_tx.emplace_back(at, airtime.value());
    return airtime.value();
}

}  // namespace meterhub::radio
