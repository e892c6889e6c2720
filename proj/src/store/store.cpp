#include "meterhub/store/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>
#include "meterhub/reading_json.hpp"

namespace meterhub::store {
namespace fs = std::filesystem;

namespace {

std::uint64_t value_bits(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    return bits;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_value(double v) { return nlohmann::json(v).dump(); }

bool reading_less(const StoredReading& a, const StoredReading& b) {
    if (a.reading.timestamp != b.reading.timestamp)
        return a.reading.timestamp < b.reading.timestamp;
    return a.seq < b.seq;
}

}  // namespace

Expected<std::unique_ptr<Store>> Store::open(const std::string& root) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) return fail("cannot create store root: " + ec.message());
    std::unique_ptr<Store> store(new Store());
    store->root_ = root;
    auto loaded = store->load();
    if (!loaded.ok()) return fail(loaded.error());
    return store;
}

Store::~Store() {
    for (auto& [day, fd] : day_fds_)
        if (fd >= 0) ::close(fd);
}

// Replays day files in name (= chronological) order. A torn final line
// from an interrupted write is truncated away so later appends stay
// well-formed.
Expected<void> Store::load() {
    std::vector<std::string> days;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() == std::strlen("YYYY-MM-DD.ndjson") &&
            name.ends_with(".ndjson"))
            days.push_back(name);
    }
    if (ec) return fail("cannot list store root: " + ec.message());
    std::sort(days.begin(), days.end());

    for (const std::string& day : days) {
        const fs::path path = fs::path(root_) / day;
        std::ifstream in(path, std::ios::binary);
        if (!in) return fail("cannot open day file " + day);
        std::string line;
        std::uintmax_t good_end = 0;
        bool torn = false;
        while (std::getline(in, line)) {
            if (in.eof() && !line.empty()) {
                // no trailing newline: incomplete write
                torn = true;
                break;
            }
            if (line.empty()) {
                good_end += 1;
                continue;
            }
            auto reading = reading_from_string(line);
            if (!reading.ok()) {
                torn = true;
                break;
            }
            good_end += line.size() + 1;
            index_reading(reading.value(), ++last_seq_);
        }
        if (torn) {
            std::error_code trunc_ec;
            fs::resize_file(path, good_end, trunc_ec);
            if (trunc_ec)
                return fail("cannot truncate torn day file " + day);
        }
    }
    return {};
}

void Store::index_reading(const MeterReading& reading, std::uint64_t seq) {
    const DedupKey key{reading.device_id, reading.timestamp,
                       value_bits(reading.value)};
    auto [it, inserted] = dedup_.emplace(key, seq);
    if (!inserted) return;  // replayed duplicate keeps its first seq
    by_device_[reading.device_id].push_back({reading, seq});
}

Expected<std::uint64_t> Store::append(const MeterReading& reading) {
    std::unique_lock<std::shared_mutex> lock(mtx_);
    const DedupKey key{reading.device_id, reading.timestamp,
                       value_bits(reading.value)};
    if (auto it = dedup_.find(key); it != dedup_.end()) return it->second;

    const std::string day = utc_day(reading.timestamp);
    int fd = -1;
    if (auto it = day_fds_.find(day); it != day_fds_.end()) {
        fd = it->second;
    } else {
        const fs::path path = fs::path(root_) / (day + ".ndjson");
        fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
        if (fd < 0) return fail("cannot open day file " + day);
        day_fds_[day] = fd;
    }

    const std::string line = reading_to_string(reading) + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
        const ssize_t n = ::write(fd, line.data() + off, line.size() - off);
        if (n <= 0) return fail("write failure on day file " + day);
        off += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) return fail("fsync failure on day file " + day);

    const std::uint64_t seq = ++last_seq_;
    dedup_.emplace(key, seq);
    by_device_[reading.device_id].push_back({reading, seq});
    return seq;
}

Expected<std::vector<StoredReading>> Store::query(const Query& q) const {
    if (q.from >= q.to) return fail("query range must satisfy from < to");
    if (q.downsample_s && *q.downsample_s <= 0)
        return fail("downsample bucket must be positive");

    std::shared_lock<std::shared_mutex> lock(mtx_);
    std::vector<StoredReading> hits;
    if (auto it = by_device_.find(q.device_id); it != by_device_.end()) {
        for (const auto& sr : it->second)
            if (sr.reading.timestamp >= q.from && sr.reading.timestamp < q.to)
                hits.push_back(sr);
    }
    std::sort(hits.begin(), hits.end(), reading_less);
    if (!q.downsample_s) return hits;

    // last reading per bucket, buckets aligned to `from`
    std::map<std::int64_t, StoredReading> buckets;
    for (const auto& sr : hits) {
        const std::int64_t b = (sr.reading.timestamp - q.from) / *q.downsample_s;
        buckets[b] = sr;  // hits are sorted, so the last one wins
    }
    std::vector<StoredReading> out;
    out.reserve(buckets.size());
    for (auto& [b, sr] : buckets) out.push_back(std::move(sr));
    return out;
}

std::optional<StoredReading> Store::latest(const std::string& device_id) const {
    std::shared_lock<std::shared_mutex> lock(mtx_);
    auto it = by_device_.find(device_id);
    if (it == by_device_.end() || it->second.empty()) return std::nullopt;
    const StoredReading* best = &it->second.front();
    for (const auto& sr : it->second)
        if (reading_less(*best, sr)) best = &sr;
    return *best;
}

Expected<std::string> Store::export_csv(const Query& q) const {
    auto hits = query(q);
    if (!hits.ok()) return fail(hits.error());
    std::string out =
        "timestamp,device_id,technology,medium,quantity,value,unit,rssi_dbm\n";
    for (const auto& sr : hits.value()) {
        const MeterReading& r = sr.reading;
        out += format_iso8601(r.timestamp);
        out += ',';
        out += csv_escape(r.device_id);
        out += ',';
        out += to_string(r.technology);
        out += ',';
        out += to_string(r.medium);
        out += ',';
        out += to_string(r.quantity);
        out += ',';
        out += format_value(r.value);
        out += ',';
        out += to_string(r.unit);
        out += ',';
        if (r.link.rssi_dbm) out += format_value(*r.link.rssi_dbm);
        out += '\n';
    }
    return out;
}

std::uint64_t Store::count() const {
    std::shared_lock<std::shared_mutex> lock(mtx_);
    std::uint64_t n = 0;
    for (const auto& [id, v] : by_device_) n += v.size();
    return n;
}

std::vector<std::string> Store::device_ids() const {
    std::shared_lock<std::shared_mutex> lock(mtx_);
    std::vector<std::string> out;
    out.reserve(by_device_.size());
    for (const auto& [id, v] : by_device_) out.push_back(id);
    return out;
}

}  // namespace meterhub::store
