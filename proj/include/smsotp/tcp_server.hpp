#pragma once

#include "smsotp/auth_server.hpp"
#include "smsotp/wire.hpp"

#include <atomic>
#include <cstdint>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace smsotp {

/// TCP front end for AuthServer: one length-prefixed JSON frame per request,
/// the reply frame on the same connection. Messages bound for the SMS
/// channel are never written back to the requester; they go to the outbox
/// file, which stands in for the registered phone. Every frame in or out is
/// logged to the transcript.
class TcpServer {
public:
    struct Options {
        std::string host = "127.0.0.1";
        std::uint16_t port = 0;            // 0 = pick an ephemeral port
        std::string sms_outbox_path;       // empty = SMS only in the transcript
    };

    TcpServer(AuthServer& server, Transcript& transcript, Options options);
    ~TcpServer();

    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    /// Binds, listens, and spawns the accept loop. Throws on bind failure.
    void start();
    void stop();

    std::uint16_t port() const { return port_; }

private:
    void accept_loop();
    void handle_connection(int fd);
    void deliver_sms(const WireMessage& sms, std::uint64_t seq);

    AuthServer& server_;
    Transcript& transcript_;
    Options options_;

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::set<int> conn_fds_;
    std::vector<std::thread> conn_threads_;
    std::mutex outbox_mu_;
};

/// "host:port" -> Options fields. Throws std::invalid_argument on junk.
void parse_listen_address(const std::string& addr, std::string& host, std::uint16_t& port);

} // namespace smsotp
