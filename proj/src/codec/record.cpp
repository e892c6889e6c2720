#include "meterhub/codec/record.hpp"

#include "meterhub/bytes.hpp"

namespace meterhub::codec {

MeterReading normalize(const DecodedRecord& record, const RawUplink& uplink) {
    MeterReading reading;
    reading.schema = kReadingSchema;
    reading.device_id = uplink.device_id;
    reading.technology = uplink.technology;
    reading.medium = record.medium;
    reading.quantity = record.quantity;
    reading.value = record.value;
    reading.unit = record.unit;
    reading.timestamp = uplink.received_at;
    reading.link = uplink.link;
    reading.raw = to_hex(uplink.payload);
    return reading;
}

}  // namespace meterhub::codec
