#include "meterhub/bus/bus.hpp"

#include <algorithm>

namespace meterhub::bus {
namespace {

std::vector<std::string> split_levels(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t slash = s.find('/', start);
        if (slash == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, slash - start));
        start = slash + 1;
    }
}

}  // namespace

Expected<TopicFilter> TopicFilter::parse(const std::string& filter) {
    if (filter.empty()) return fail("empty filter");
    TopicFilter out;
    out.levels = split_levels(filter);
    for (std::size_t i = 0; i < out.levels.size(); ++i) {
        const std::string& level = out.levels[i];
        if (level.empty()) return fail("empty filter level");
        if (level == "#") {
            if (i + 1 != out.levels.size())
                return fail("'#' must be the final level");
            continue;
        }
        if (level == "+") continue;
        if (level.find('+') != std::string::npos ||
            level.find('#') != std::string::npos)
            return fail("wildcard must occupy a whole level");
    }
    return out;
}

std::string TopicFilter::str() const {
    std::string out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) out += '/';
        out += levels[i];
    }
    return out;
}

bool topic_matches(const TopicFilter& filter, const std::string& topic) {
    const std::vector<std::string> parts = split_levels(topic);
    std::size_t i = 0;
    for (; i < filter.levels.size(); ++i) {
        const std::string& level = filter.levels[i];
        if (level == "#") return true;  // matches zero or more remaining
        if (i >= parts.size()) return false;
        if (level != "+" && level != parts[i]) return false;
    }
    return i == parts.size();
}

bool topic_matches(const std::string& filter, const std::string& topic) {
    auto parsed = TopicFilter::parse(filter);
    return parsed.ok() && topic_matches(parsed.value(), topic);
}

std::size_t Bus::publish(const BusMessage& msg) {
    std::vector<std::shared_ptr<Subscription>> matching;
    {
        std::lock_guard<std::mutex> lock(registry_mtx_);
        for (const auto& sub : subs_)
            if (topic_matches(sub->filter, msg.topic)) matching.push_back(sub);
    }
    for (const auto& sub : matching) deliver(sub, msg);
    return matching.size();
}

std::size_t Bus::publish(const std::string& topic, const Bytes& body,
                         UnixSeconds at, MessageOrigin origin) {
    return publish(BusMessage{topic, body, at, origin});
}

std::size_t Bus::publish(const std::string& topic, const std::string& body,
                         UnixSeconds at) {
    return publish(BusMessage{topic, Bytes(body.begin(), body.end()), at,
                              MessageOrigin::local});
}

// Enqueue, then drain unless another thread already is. The single
// drainer guarantees serial callbacks per subscription while keeping
// queue order (per-publisher FIFO follows from ordered enqueues).
void Bus::deliver(const std::shared_ptr<Subscription>& sub,
                  const BusMessage& msg) {
    {
        std::lock_guard<std::mutex> lock(sub->mtx);
        if (!sub->active) return;
        sub->queue.push_back(msg);
        if (sub->draining) return;
        sub->draining = true;
    }
    for (;;) {
        BusMessage next;
        {
            std::lock_guard<std::mutex> lock(sub->mtx);
            if (sub->queue.empty() || !sub->active) {
                sub->draining = false;
                return;
            }
            next = std::move(sub->queue.front());
            sub->queue.pop_front();
        }
        sub->consumer(next);
    }
}

Expected<SubscriptionId> Bus::subscribe(const std::string& filter,
                                        Consumer consumer) {
    auto parsed = TopicFilter::parse(filter);
    if (!parsed.ok()) return fail(parsed.error());
    auto sub = std::make_shared<Subscription>();
    sub->filter = parsed.take();
    sub->consumer = std::move(consumer);
    std::lock_guard<std::mutex> lock(registry_mtx_);
    sub->id = next_id_++;
    subs_.push_back(sub);
    return sub->id;
}

void Bus::unsubscribe(SubscriptionId id) {
    std::shared_ptr<Subscription> victim;
    {
        std::lock_guard<std::mutex> lock(registry_mtx_);
        auto it = std::find_if(subs_.begin(), subs_.end(),
                               [&](const auto& s) { return s->id == id; });
        if (it == subs_.end()) return;
        victim = *it;
        subs_.erase(it);
    }
    std::lock_guard<std::mutex> lock(victim->mtx);
    victim->active = false;
    victim->queue.clear();
}

}  // namespace meterhub::bus
