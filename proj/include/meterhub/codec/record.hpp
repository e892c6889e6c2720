#pragma once

#include "meterhub/types.hpp"

namespace meterhub::codec {

/// The common shape every decoder reduces its payload to before
/// normalization.
struct DecodedRecord {
    Medium medium = Medium::unknown;
    Quantity quantity = Quantity::energy;
    double value = 0;
    Unit unit = Unit::wh;
};

/// Builds the canonical reading: record fields plus the uplink's identity,
/// link metadata, timestamp and raw payload hex. Unknown media pass
/// through as "unknown"; they are data, not errors.
MeterReading normalize(const DecodedRecord& record, const RawUplink& uplink);

}  // namespace meterhub::codec
