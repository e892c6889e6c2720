#pragma once

#include <deque>
#include <string>
#include <utility>

#include "meterhub/expected.hpp"
#include "meterhub/types.hpp"

namespace meterhub::radio {

/// Per-device transmission accounting. Message counts and fair-use airtime
/// reset at UTC day boundaries; the duty-cycle check runs over a rolling
/// 3600 s window. Owned by exactly one pipeline at a time.
struct TxBudgetLedger {
    std::string device_id;
    Technology technology{};
    UnixSeconds window_start = 0;  // start of the current UTC day
    double airtime_used_s = 0;
    int ul_count = 0;
    int dl_count = 0;
    std::deque<std::pair<UnixSeconds, double>> recent_tx;  // rolling hour
};

inline constexpr double kDutyCycleWindowS = 3600.0;

// Stable rejection reasons; they surface in simulator reports and
// dead-letter records.
inline constexpr const char* kRejectPayload = "payload too large";
inline constexpr const char* kRejectUlCap = "daily UL cap";
inline constexpr const char* kRejectDlCap = "daily DL cap";
inline constexpr const char* kRejectAirtime = "fair-use airtime";
inline constexpr const char* kRejectDutyCycle = "duty cycle";

/// Accounts one transmission at time `at`. Rolls the day window forward,
/// then rejects if the frame would exceed the payload cap, the daily
/// message count, the daily fair-use airtime, or the rolling-hour
/// duty-cycle allowance (band == nullptr skips the duty-cycle check, for
/// licensed spectrum). On acceptance the ledger is updated and the frame's
/// airtime in seconds is returned.
Expected<double> record_tx(TxBudgetLedger& ledger,
                           const TechnologyLimits& limits,
                           const BandPlan* band, int payload_bytes,
                           double data_rate_kbps, UnixSeconds at,
                           Direction direction = Direction::ul);

}  // namespace meterhub::radio
