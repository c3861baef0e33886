#include "smsotp/tcp_server.hpp"

#include "smsotp/txn_password.hpp"

#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

using namespace smsotp;

namespace {

struct Client {
    int fd = -1;

    explicit Client(std::uint16_t port) {
        fd = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd >= 0);
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(port);
        REQUIRE(::inet_pton(AF_INET, "127.0.0.1", &sa.sin_addr) == 1);
        REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0);
    }
    ~Client() {
        if (fd >= 0) ::close(fd);
    }

    nlohmann::json rpc(MsgKind kind,
                       std::initializer_list<std::pair<const char*, std::string>> fields) {
        WireMessage msg(kind, Channel::Http, "client", AuthServer::kName);
        for (const auto& [k, v] : fields) msg.set(k, v);
        write_frame(fd, msg.to_json());
        const auto reply = read_frame(fd);
        REQUIRE(reply.has_value());
        return *reply;
    }
};

struct ServerFixture {
    ScriptedClock clock;
    SeededRng rng{31337};
    AuthServer server{AuthMode::TxnPassword, demo_key_pair(), clock, rng};
    Transcript transcript;
    std::filesystem::path outbox = std::filesystem::temp_directory_path() /
                                   ("smsotp_outbox_" + std::to_string(::getpid()) + ".jsonl");
    TcpServer tcp;

    ServerFixture()
        : tcp(server, transcript, TcpServer::Options{"127.0.0.1", 0, outbox.string()}) {
        std::filesystem::remove(outbox);
        server.enroll("John", "1234", "4321", "+15550101");
        tcp.start();
        REQUIRE(tcp.port() != 0);
    }
    ~ServerFixture() {
        tcp.stop();
        std::filesystem::remove(outbox);
    }

    std::string last_sms_otp() const {
        std::ifstream f(outbox);
        REQUIRE(f.good());
        std::string line, last;
        while (std::getline(f, line)) {
            if (!line.empty()) last = line;
        }
        REQUIRE_FALSE(last.empty());
        return nlohmann::json::parse(last).at("fields").at("otp").get<std::string>();
    }
};

} // namespace

TEST_CASE("full transaction over a real socket") {
    ServerFixture f;
    Client client(f.tcp.port());

    const auto login = client.rpc(
        MsgKind::Login, {{"username", "John"}, {"pin", "1234"}, {"machine_id", "m1"}});
    CHECK(login.at("kind") == "LoginOk");
    const std::string sid = login.at("fields").at("session_id");

    const auto init = client.rpc(MsgKind::Initiate, {{"session_id", sid}});
    CHECK(init.at("fields").at("ok") == "true");
    const std::string token = init.at("fields").at("token");
    // The OTP is not in the HTTP reply; it is on the "phone".
    CHECK_FALSE(init.at("fields").contains("otp"));
    const std::string otp = f.last_sms_otp();

    const std::string password =
        generate_password(Otp(otp), SecretKey("4321"), demo_key_pair()).canonical;
    const auto confirm = client.rpc(
        MsgKind::Confirm, {{"session_id", sid}, {"password", password}, {"token", token}});
    CHECK(confirm.at("fields").at("status") == "accepted");

    // Everything that crossed the wire is in the transcript: three requests,
    // three replies, one SMS handed to the gateway.
    CHECK(f.transcript.size() == 7);
}

TEST_CASE("two sequential clients share the server state") {
    ServerFixture f;
    std::string sid, token, otp;
    {
        Client first(f.tcp.port());
        const auto login = first.rpc(
            MsgKind::Login, {{"username", "John"}, {"pin", "1234"}, {"machine_id", "m1"}});
        sid = login.at("fields").at("session_id");
        const auto init = first.rpc(MsgKind::Initiate, {{"session_id", sid}});
        token = init.at("fields").at("token");
        otp = f.last_sms_otp();
    }
    Client second(f.tcp.port());
    const std::string password =
        generate_password(Otp(otp), SecretKey("4321"), demo_key_pair()).canonical;
    // Same machine_id claim, but the session was bound at login time, so the
    // confirm from the new connection still lands on machine m1's record.
    const auto confirm = second.rpc(
        MsgKind::Confirm, {{"session_id", sid}, {"password", password}, {"token", token}});
    CHECK(confirm.at("fields").at("status") == "accepted");
}

TEST_CASE("a malformed frame drops the connection without hurting the server") {
    ServerFixture f;
    {
        Client bad(f.tcp.port());
        const unsigned char junk[8] = {0, 0, 0, 4, '{', '{', '{', '{'};
        REQUIRE(::write(bad.fd, junk, sizeof(junk)) == 8);
        // The server closes; the read sees EOF.
        CHECK_FALSE(read_frame(bad.fd).has_value());
    }
    Client good(f.tcp.port());
    const auto login = good.rpc(
        MsgKind::Login, {{"username", "John"}, {"pin", "1234"}, {"machine_id", "m1"}});
    CHECK(login.at("fields").at("ok") == "true");
}

TEST_CASE("listen address parsing") {
    std::string host;
    std::uint16_t port = 1;
    parse_listen_address("127.0.0.1:9034", host, port);
    CHECK(host == "127.0.0.1");
    CHECK(port == 9034);
    parse_listen_address("0.0.0.0:0", host, port);
    CHECK(port == 0);
    CHECK_THROWS_AS(parse_listen_address("127.0.0.1", host, port), std::invalid_argument);
    CHECK_THROWS_AS(parse_listen_address("127.0.0.1:", host, port), std::invalid_argument);
    CHECK_THROWS_AS(parse_listen_address(":123", host, port), std::invalid_argument);
    CHECK_THROWS_AS(parse_listen_address("127.0.0.1:banana", host, port), std::invalid_argument);
    CHECK_THROWS_AS(parse_listen_address("127.0.0.1:70000", host, port), std::invalid_argument);
}
