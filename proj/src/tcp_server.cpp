#include "smsotp/tcp_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace smsotp {

void parse_listen_address(const std::string& addr, std::string& host, std::uint16_t& port) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
        throw std::invalid_argument("listen address must be host:port, got '" + addr + "'");
    }
    host = addr.substr(0, colon);
    const std::string port_str = addr.substr(colon + 1);
    unsigned long value = 0;
    std::size_t used = 0;
    try {
        value = std::stoul(port_str, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad port in listen address '" + addr + "'");
    }
    if (used != port_str.size() || value > 65535) {
        throw std::invalid_argument("bad port in listen address '" + addr + "'");
    }
    port = static_cast<std::uint16_t>(value);
}

TcpServer::TcpServer(AuthServer& server, Transcript& transcript, Options options)
    : server_(server), transcript_(transcript), options_(std::move(options)) {}

TcpServer::~TcpServer() {
    stop();
}

void TcpServer::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    }
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(options_.port);
    if (::inet_pton(AF_INET, options_.host.c_str(), &sa.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw std::invalid_argument("bad listen host '" + options_.host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
        const int err = errno;
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw std::runtime_error(std::string("bind: ") + std::strerror(err));
    }
    if (::listen(listen_fd_, 16) != 0) {
        const int err = errno;
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw std::runtime_error(std::string("listen: ") + std::strerror(err));
    }

    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    if (::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len) != 0) {
        const int err = errno;
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw std::runtime_error(std::string("getsockname: ") + std::strerror(err));
    }
    port_ = ntohs(bound.sin_port);

    accept_thread_ = std::thread([this] { accept_loop(); });
}

void TcpServer::stop() {
    if (stopping_.exchange(true)) {
        if (accept_thread_.joinable()) accept_thread_.join();
        return;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    {
        std::lock_guard<std::mutex> lock(conn_mu_);
        for (int fd : conn_fds_) {
            ::shutdown(fd, SHUT_RDWR);
        }
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    for (auto& t : conn_threads_) {
        if (t.joinable()) t.join();
    }
    conn_threads_.clear();
}

void TcpServer::accept_loop() {
    while (!stopping_.load()) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break; // listener closed by stop()
        }
        std::lock_guard<std::mutex> lock(conn_mu_);
        conn_fds_.insert(fd);
        conn_threads_.emplace_back([this, fd] { handle_connection(fd); });
    }
}

void TcpServer::handle_connection(int fd) {
    for (;;) {
        std::optional<nlohmann::json> frame;
        try {
            frame = read_frame(fd);
        } catch (const std::exception&) {
            break; // malformed frame: drop the connection
        }
        if (!frame.has_value()) break; // clean EOF

        WireMessage request;
        WireMessage reply;
        std::vector<WireMessage> sms_out;
        try {
            request = WireMessage::from_json(*frame);
            transcript_.log(request);
            HandleResult result = server_.handle(request);
            reply = std::move(result.reply);
            sms_out = std::move(result.sms);
        } catch (const std::exception& e) {
            reply = WireMessage(MsgKind::Result, Channel::Http, AuthServer::kName, "client");
            reply.set("ok", "false").set("error", std::string("BadRequest: ") + e.what());
        }

        transcript_.log(reply);
        for (const WireMessage& sms : sms_out) {
            const std::uint64_t seq = transcript_.log(sms);
            deliver_sms(sms, seq);
        }
        try {
            write_frame(fd, reply.to_json());
        } catch (const std::exception&) {
            break;
        }
    }
    ::close(fd);
    std::lock_guard<std::mutex> lock(conn_mu_);
    conn_fds_.erase(fd);
}

void TcpServer::deliver_sms(const WireMessage& sms, std::uint64_t seq) {
    if (options_.sms_outbox_path.empty()) return;
    std::lock_guard<std::mutex> lock(outbox_mu_);
    std::ofstream out(options_.sms_outbox_path, std::ios::app);
    if (!out) {
        throw std::runtime_error("cannot open SMS outbox '" + options_.sms_outbox_path + "'");
    }
    nlohmann::json line = sms.to_json();
    line["seq"] = seq;
    out << line.dump() << '\n';
}

} // namespace smsotp
