#include "meterhub/bus/bridge.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "meterhub/bus/mqtt.hpp"

namespace meterhub::bus {
namespace {

int connect_tcp(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0)
        return -1;
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(res);
    return fd;
}

bool send_all(int fd, const Bytes& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off,
                                 MSG_NOSIGNAL);
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace

Expected<std::pair<std::string, std::uint16_t>> MqttBridge::parse_endpoint(
    const std::string& endpoint) {
    if (endpoint.empty()) return fail("empty broker endpoint");
    const std::size_t colon = endpoint.rfind(':');
    if (colon == std::string::npos)
        return std::make_pair(endpoint, std::uint16_t{1883});
    const std::string host = endpoint.substr(0, colon);
    const std::string port_s = endpoint.substr(colon + 1);
    if (host.empty() || port_s.empty()) return fail("malformed broker endpoint");
    int port = 0;
    for (char c : port_s) {
        if (c < '0' || c > '9') return fail("malformed broker endpoint");
        port = port * 10 + (c - '0');
        if (port > 65535) return fail("malformed broker endpoint");
    }
    return std::make_pair(host, static_cast<std::uint16_t>(port));
}

MqttBridge::MqttBridge(Bus& bus, Options options)
    : bus_(bus), opt_(std::move(options)) {
    backoff_ms_ = opt_.initial_backoff_ms;
}

MqttBridge::~MqttBridge() { stop(); }

void MqttBridge::start() {
    {
        std::lock_guard<std::mutex> lock(mtx_);
        if (started_) return;
        started_ = true;
        stop_ = false;
    }
    if (::pipe(wake_pipe_) == 0) {
        ::fcntl(wake_pipe_[0], F_SETFL, O_NONBLOCK);
        ::fcntl(wake_pipe_[1], F_SETFL, O_NONBLOCK);
    }
    if (opt_.direction != Direction::in) {
        auto sub = bus_.subscribe(
            opt_.filter, [this](const BusMessage& msg) { enqueue_out(msg); });
        if (sub.ok()) {
            local_sub_ = sub.value();
            subscribed_ = true;
        }
    }
    thread_ = std::thread([this] { run(); });
}

void MqttBridge::stop() {
    {
        std::lock_guard<std::mutex> lock(mtx_);
        if (!started_) return;
        stop_ = true;
    }
    cv_.notify_all();
    if (wake_pipe_[1] >= 0) {
        const char b = 1;
        [[maybe_unused]] ssize_t n = ::write(wake_pipe_[1], &b, 1);
    }
    if (thread_.joinable()) thread_.join();
    if (subscribed_) {
        bus_.unsubscribe(local_sub_);
        subscribed_ = false;
    }
    for (int& fd : wake_pipe_) {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
    std::lock_guard<std::mutex> lock(mtx_);
    started_ = false;
}

MqttBridge::Stats MqttBridge::stats() const {
    std::lock_guard<std::mutex> lock(mtx_);
    return stats_;
}

void MqttBridge::enqueue_out(const BusMessage& msg) {
    if (msg.origin == MessageOrigin::bridged) return;  // no loops
    {
        std::lock_guard<std::mutex> lock(mtx_);
        if (out_queue_.size() >= opt_.buffer_cap) {
            out_queue_.pop_front();
            ++stats_.dropped;
        }
        out_queue_.push_back(msg);
    }
    if (wake_pipe_[1] >= 0) {
        const char b = 1;
        [[maybe_unused]] ssize_t n = ::write(wake_pipe_[1], &b, 1);
    }
}

bool MqttBridge::wait_backoff() {
    std::unique_lock<std::mutex> lock(mtx_);
    cv_.wait_for(lock, std::chrono::milliseconds(backoff_ms_),
                 [this] { return stop_; });
    backoff_ms_ = std::min(backoff_ms_ * 2, opt_.max_backoff_ms);
    return !stop_;
}

void MqttBridge::run() {
    for (;;) {
        {
            std::lock_guard<std::mutex> lock(mtx_);
            if (stop_) return;
        }
        const int fd = connect_tcp(opt_.host, opt_.port);
        if (fd < 0) {
            if (!wait_backoff()) return;
            continue;
        }
        session(fd);
        ::close(fd);
        {
            std::lock_guard<std::mutex> lock(mtx_);
            stats_.connected = false;
            if (stop_) return;
        }
        if (!wait_backoff()) return;
    }
}

// One connected session: handshake, then a poll loop multiplexing
// broker input with the outbound queue. QoS 1 with a window of one
// in-flight message keeps redelivery ordered.
void MqttBridge::session(int fd) {
    if (!send_all(fd, mqtt::make_connect(opt_.client_id,
                                         static_cast<std::uint16_t>(
                                             opt_.keepalive_s))))
        return;

    Bytes rx;
    std::uint8_t chunk[4096];
    bool connacked = false;
    bool in_flight = false;
    bool resend = false;
    std::uint16_t next_id = 1;
    std::uint16_t in_flight_id = 0;

    for (;;) {
        {
            std::lock_guard<std::mutex> lock(mtx_);
            if (stop_) {
                send_all(fd, mqtt::make_disconnect());
                return;
            }
        }

        if (connacked && !in_flight && opt_.direction != Direction::in) {
            BusMessage head;
            bool have = false;
            {
                std::lock_guard<std::mutex> lock(mtx_);
                if (!out_queue_.empty()) {
                    head = out_queue_.front();  // popped on PUBACK
                    have = true;
                }
            }
            if (have) {
                in_flight_id = next_id++;
                if (next_id == 0) next_id = 1;
                if (!send_all(fd, mqtt::make_publish(head.topic, head.body, 1,
                                                     in_flight_id, resend)))
                    return;
                in_flight = true;
                resend = false;
            }
        }

        pollfd fds[2];
        fds[0] = {fd, POLLIN, 0};
        fds[1] = {wake_pipe_[0], POLLIN, 0};
        const int timeout_ms = std::max(1000, opt_.keepalive_s * 500);
        const int rc = ::poll(fds, wake_pipe_[0] >= 0 ? 2 : 1, timeout_ms);
        if (rc < 0) return;
        if (rc == 0) {
            if (connacked && !send_all(fd, mqtt::make_pingreq())) return;
            continue;
        }
        if (fds[1].revents & POLLIN) {
            char drain[64];
            while (::read(wake_pipe_[0], drain, sizeof drain) > 0) {
            }
        }
        if (!(fds[0].revents & (POLLIN | POLLHUP | POLLERR))) continue;

        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) return;
        rx.insert(rx.end(), chunk, chunk + n);

        for (;;) {
            mqtt::Packet pkt;
            auto consumed = mqtt::decode(rx.data(), rx.size(), pkt);
            if (!consumed.ok()) return;  // protocol error: drop connection
            if (consumed.value() == 0) break;
            rx.erase(rx.begin(), rx.begin() + consumed.value());

            switch (pkt.type()) {
                case mqtt::kConnack: {
                    auto code = mqtt::parse_connack(pkt);
                    if (!code.ok() || code.value() != 0) return;
                    connacked = true;
                    if (opt_.direction != Direction::out &&
                        !send_all(fd, mqtt::make_subscribe(0x7FFF, opt_.filter,
                                                           1)))
                        return;
                    std::lock_guard<std::mutex> lock(mtx_);
                    stats_.connected = true;
                    ++stats_.connects;
                    backoff_ms_ = opt_.initial_backoff_ms;
                    break;
                }
                case mqtt::kPublish: {
                    auto pub = mqtt::parse_publish(pkt);
                    if (!pub.ok()) return;
                    if (pub.value().qos == 1 &&
                        !send_all(fd, mqtt::make_puback(pub.value().packet_id)))
                        return;
                    if (opt_.direction != Direction::out) {
                        bus_.publish(pub.value().topic, pub.value().payload, 0,
                                     MessageOrigin::bridged);
                        std::lock_guard<std::mutex> lock(mtx_);
                        ++stats_.forwarded_in;
                    }
                    break;
                }
                case mqtt::kPuback: {
                    auto id = mqtt::parse_packet_id(pkt);
                    if (id.ok() && in_flight && id.value() == in_flight_id) {
                        in_flight = false;
                        std::lock_guard<std::mutex> lock(mtx_);
                        if (!out_queue_.empty()) out_queue_.pop_front();
                        ++stats_.forwarded_out;
                    }
                    break;
                }
                default:
                    break;  // SUBACK / PINGRESP need no action
            }
        }
    }
}

}  // namespace meterhub::bus
