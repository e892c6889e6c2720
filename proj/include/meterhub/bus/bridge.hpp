#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <thread>

#include "meterhub/bus/bus.hpp"

namespace meterhub::bus {

/// Mirrors local `meterhub/#` traffic to/from an external MQTT 3.1.1
/// broker over QoS 1. Reconnects with exponential backoff; while
/// disconnected outbound messages are buffered up to a cap, dropping the
/// oldest beyond it.
class MqttBridge {
public:
    enum class Direction { in, out, both };

    struct Options {
        std::string host = "127.0.0.1";
        std::uint16_t port = 1883;
        Direction direction = Direction::both;
        std::string client_id = "meterhub-bridge";
        std::string filter = "meterhub/#";
        int initial_backoff_ms = 1000;
        int max_backoff_ms = 60000;
        std::size_t buffer_cap = 10000;
        int keepalive_s = 30;
    };

    struct Stats {
        bool connected = false;
        std::uint64_t forwarded_out = 0;
        std::uint64_t forwarded_in = 0;
        std::uint64_t dropped = 0;
        std::uint64_t connects = 0;
    };

    MqttBridge(Bus& bus, Options options);
    ~MqttBridge();

    void start();
    void stop();
    Stats stats() const;

    /// Parses "host:port" (port optional, default 1883).
    static Expected<std::pair<std::string, std::uint16_t>> parse_endpoint(
        const std::string& endpoint);

private:
    void run();
    void session(int fd);
    bool wait_backoff();
    void enqueue_out(const BusMessage& msg);

    Bus& bus_;
    Options opt_;
    SubscriptionId local_sub_ = 0;
    bool subscribed_ = false;

    std::thread thread_;
    mutable std::mutex mtx_;
    std::condition_variable cv_;
    bool stop_ = false;
    bool started_ = false;
    int backoff_ms_ = 0;
    std::deque<BusMessage> out_queue_;
    Stats stats_;
    int wake_pipe_[2] = {-1, -1};
};

}  // namespace meterhub::bus
