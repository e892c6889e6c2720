#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "meterhub/bytes.hpp"
#include "meterhub/expected.hpp"
#include "meterhub/time.hpp"

namespace meterhub::bus {

/// Parsed MQTT-style subscription filter. `+` matches one level, a
/// trailing `#` matches any suffix (including none).
struct TopicFilter {
    std::vector<std::string> levels;

    static Expected<TopicFilter> parse(const std::string& filter);
    std::string str() const;
};

bool topic_matches(const TopicFilter& filter, const std::string& topic);
/// Convenience for tests/config paths; invalid filters match nothing.
bool topic_matches(const std::string& filter, const std::string& topic);

enum class MessageOrigin { local, bridged };

struct BusMessage {
    std::string topic;
    Bytes body;
    UnixSeconds published_at = 0;
    MessageOrigin origin = MessageOrigin::local;  // loop guard for the bridge
};

using SubscriptionId = std::uint64_t;

/// In-process broker. publish() is safe from any thread; callbacks for
/// one subscription run serially (on a publisher's thread), distinct
/// subscriptions may run concurrently.
class Bus {
public:
    using Consumer = std::function<void(const BusMessage&)>;

    /// Returns the number of matching subscriptions at publish time.
    std::size_t publish(const BusMessage& msg);
    std::size_t publish(const std::string& topic, const Bytes& body,
                        UnixSeconds at = 0,
                        MessageOrigin origin = MessageOrigin::local);
    std::size_t publish(const std::string& topic, const std::string& body,
                        UnixSeconds at = 0);

    Expected<SubscriptionId> subscribe(const std::string& filter,
                                       Consumer consumer);
    void unsubscribe(SubscriptionId id);  // unknown id is a no-op

private:
    struct Subscription {
        SubscriptionId id = 0;
        TopicFilter filter;
        Consumer consumer;
        std::mutex mtx;
        std::deque<BusMessage> queue;
        bool draining = false;
        bool active = true;
    };

    static void deliver(const std::shared_ptr<Subscription>& sub,
                        const BusMessage& msg);

    std::mutex registry_mtx_;
    std::vector<std::shared_ptr<Subscription>> subs_;
    SubscriptionId next_id_ = 1;
};

}  // namespace meterhub::bus
