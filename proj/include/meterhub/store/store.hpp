#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "meterhub/expected.hpp"
#include "meterhub/types.hpp"

namespace meterhub::store {

struct StoredReading {
    MeterReading reading;
    std::uint64_t seq = 0;
};

struct Query {
    std::string device_id;
    UnixSeconds from = 0;
    UnixSeconds to = 0;  // half-open [from, to)
    std::optional<std::int64_t> downsample_s;
};

/// Append-only reading store over one NDJSON file per UTC day. Appends
/// are fsynced before they are acknowledged; an in-memory index is
/// rebuilt from the day files on open. Duplicate (device_id, timestamp,
/// value) appends return the original sequence number.
class Store {
public:
    static Expected<std::unique_ptr<Store>> open(const std::string& root);
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    Expected<std::uint64_t> append(const MeterReading& reading);
    Expected<std::vector<StoredReading>> query(const Query& q) const;
    std::optional<StoredReading> latest(const std::string& device_id) const;
    Expected<std::string> export_csv(const Query& q) const;

    std::uint64_t count() const;
    std::vector<std::string> device_ids() const;

private:
    Store() = default;

    Expected<void> load();
    void index_reading(const MeterReading& reading, std::uint64_t seq);

    using DedupKey = std::tuple<std::string, UnixSeconds, std::uint64_t>;

    std::string root_;
    mutable std::shared_mutex mtx_;
    std::map<std::string, std::vector<StoredReading>> by_device_;
    std::map<DedupKey, std::uint64_t> dedup_;
    std::map<std::string, int> day_fds_;
    std::uint64_t last_seq_ = 0;
};

}  // namespace meterhub::store
