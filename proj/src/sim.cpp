#include "smsotp/sim.hpp"

#include "smsotp/txn_password.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace smsotp {

namespace {

constexpr const char* kUserActor = "user";
constexpr const char* kAttackerActor = "attacker";
constexpr const char* kUserMachine = "machine-user";
constexpr const char* kAttackerMachine = "machine-attacker";
constexpr std::size_t kVictimIndex = 0;  // John owns the targeted account
constexpr int kMaxRounds = 10'000;

/// Shared run state: the clock, the server, the message bus, and the
/// position in the clock script. Declaration order matters; the server
/// keeps references to the clock and rng.
struct World {
    ScriptedClock clock;
    SeededRng rng;
    AuthServer server;
    Transcript transcript;
    std::map<std::string, std::deque<WireMessage>> inboxes;
    const std::vector<std::int64_t>& script;
    std::size_t phase = 0;

    World(AuthMode mode, std::uint64_t seed, const std::vector<std::int64_t>& clock_script)
        : rng(seed), server(mode, demo_key_pair(), clock, rng), script(clock_script) {}

    void send(WireMessage msg) {
        transcript.log(msg);
        inboxes[msg.to()].push_back(std::move(msg));
    }

    /// Called by whichever actor drives the protocol, once per scripted
    /// send. Jumps the clock by the next script entry; past the end of the
    /// script time stands still.
    void driver_tick() {
        if (phase < script.size() && script[phase] > 0) {
            clock.advance(script[phase]);
        }
        ++phase;
    }

    std::optional<WireMessage> take(const std::string& actor) {
        auto it = inboxes.find(actor);
        if (it == inboxes.end() || it->second.empty()) return std::nullopt;
        WireMessage msg = std::move(it->second.front());
        it->second.pop_front();
        return msg;
    }
};

/// Actors run under a deterministic round-robin scheduler. One step handles
/// at most one inbox message or performs one scripted action; returning
/// false means the actor had nothing to do this slot.
class Actor {
public:
    explicit Actor(std::string name) : name_(std::move(name)) {}
    virtual ~Actor() = default;
    const std::string& name() const { return name_; }
    virtual bool step(World& world) = 0;

private:
    std::string name_;
};

class ServerActor final : public Actor {
public:
    ServerActor() : Actor(AuthServer::kName) {}

    bool step(World& world) override {
        auto msg = world.take(name());
        if (!msg) return false;
        HandleResult result = world.server.handle(*msg);
        world.send(std::move(result.reply));
        for (WireMessage& sms : result.sms) {
            world.send(std::move(sms));
        }
        return true;
    }
};

/// Delivers each SmsOtp to the actor owning the target mobile number. With
/// forwarding on it also duplicates the message to the attacker: the
/// malware-on-the-phone model, folded into the gateway so the phone itself
/// needs no actor.
class GatewayActor final : public Actor {
public:
    GatewayActor(std::map<std::string, std::string> subscribers, bool forward_to_attacker)
        : Actor(AuthServer::kSmsGateway),
          subscribers_(std::move(subscribers)),
          forward_(forward_to_attacker) {}

    bool step(World& world) override {
        auto msg = world.take(name());
        if (!msg) return false;
        if (msg->kind() != MsgKind::SmsOtp) return true;  // not deliverable, drop
        const std::string* mobile = msg->get("to");
        const std::string* otp = msg->get("otp");
        if (!mobile || !otp) return true;
        auto sub = subscribers_.find(*mobile);
        if (sub == subscribers_.end()) return true;

        WireMessage delivery(MsgKind::SmsOtp, Channel::Sms, name(), sub->second);
        delivery.set("to", *mobile).set("otp", *otp);
        world.send(std::move(delivery));

        if (forward_) {
            WireMessage copy(MsgKind::SmsOtp, Channel::Sms, name(), kAttackerActor);
            copy.set("to", *mobile).set("otp", *otp).set("forwarded", "true");
            world.send(std::move(copy));
        }
        return true;
    }

private:
    std::map<std::string, std::string> subscribers_;
    bool forward_;
};

/// The account holder. In the legitimate scenarios it banks: login,
/// initiate, read the OTP off its phone, compute the password (in txn mode
/// exactly as the offline authenticator would), confirm. In the MITM
/// scenarios it only owns the phone and never banks; the scheme under attack
/// is precisely "the user did nothing and the money moved".
class UserActor final : public Actor {
public:
    struct Config {
        std::string username;
        std::string pin;
        std::string secret_key;
        AuthMode mode = AuthMode::TxnPassword;
        RsaKeyPair rsa;
        bool banks = true;
        bool replay_once = false;
    };

    UserActor(Config config, bool& succeeded)
        : Actor(kUserActor), config_(std::move(config)), succeeded_(succeeded) {}

    bool step(World& world) override {
        if (state_ == State::Start) {
            if (!config_.banks) {
                state_ = State::Done;
                return false;
            }
            world.driver_tick();
            WireMessage login(MsgKind::Login, Channel::Http, name(), AuthServer::kName);
            login.set("username", config_.username)
                .set("pin", config_.pin)
                .set("machine_id", kUserMachine);
            world.send(std::move(login));
            state_ = State::AwaitLogin;
            return true;
        }

        auto msg = world.take(name());
        if (!msg) return false;

        switch (state_) {
            case State::AwaitLogin: {
                if (msg->kind() != MsgKind::LoginOk) break;
                const std::string* sid = msg->get("session_id");
                if (!sid) {
                    state_ = State::Done;
                    break;
                }
                session_id_ = *sid;
                world.driver_tick();
                WireMessage initiate(MsgKind::Initiate, Channel::Http, name(), AuthServer::kName);
                initiate.set("session_id", session_id_);
                world.send(std::move(initiate));
                state_ = State::AwaitTokenAndOtp;
                break;
            }
            case State::AwaitTokenAndOtp: {
                if (msg->kind() == MsgKind::Result) {
                    if (const std::string* token = msg->get("token")) token_ = *token;
                } else if (msg->kind() == MsgKind::SmsOtp) {
                    if (const std::string* otp = msg->get("otp")) otp_ = *otp;
                }
                if (!token_.empty() && !otp_.empty()) {
                    send_confirm(world);
                    state_ = State::AwaitResult;
                }
                break;
            }
            case State::AwaitResult: {
                if (msg->kind() != MsgKind::Result || !msg->get("status")) break;
                if (*msg->get("status") == "accepted") succeeded_ = true;
                if (config_.replay_once && !replayed_) {
                    replayed_ = true;
                    send_confirm(world);  // identical resend
                } else {
                    state_ = State::Done;
                }
                break;
            }
            case State::Start:
            case State::Done:
                break;  // absorb; the phone keeps receiving SMS regardless
        }
        return true;
    }

private:
    enum class State { Start, AwaitLogin, AwaitTokenAndOtp, AwaitResult, Done };

    void send_confirm(World& world) {
        std::string password;
        if (config_.mode == AuthMode::PlainOtp) {
            password = otp_;
        } else {
            password =
                generate_password(Otp(otp_), SecretKey(config_.secret_key), config_.rsa).canonical;
        }
        world.driver_tick();
        WireMessage confirm(MsgKind::Confirm, Channel::Http, name(), AuthServer::kName);
        confirm.set("session_id", session_id_).set("password", password).set("token", token_);
        world.send(std::move(confirm));
    }

    Config config_;
    bool& succeeded_;
    State state_ = State::Start;
    std::string session_id_;
    std::string token_;
    std::string otp_;
    bool replayed_ = false;
};

/// Everything the attacker knows is in its config and its inbox: phished
/// credentials, the public scheme parameters, and whatever the gateway
/// forwards. There is no channel to the victim's secret key.
class AttackerActor final : public Actor {
public:
    struct Config {
        AttackerModel model;
        std::string victim_username;
        std::string victim_pin;
        AuthMode mode = AuthMode::PlainOtp;
        RsaKeyPair rsa;
    };

    AttackerActor(Config config, bool& succeeded)
        : Actor(kAttackerActor), config_(std::move(config)), succeeded_(succeeded) {}

    bool step(World& world) override {
        if (state_ == State::Start) {
            if (!config_.model.knows_credentials) {
                state_ = State::Done;
                return false;
            }
            world.driver_tick();
            WireMessage login(MsgKind::Login, Channel::Http, name(), AuthServer::kName);
            login.set("username", config_.victim_username)
                .set("pin", config_.victim_pin)
                .set("machine_id", kAttackerMachine);
            world.send(std::move(login));
            state_ = State::AwaitLogin;
            return true;
        }

        auto msg = world.take(name());
        if (!msg) return false;

        switch (state_) {
            case State::AwaitLogin: {
                if (msg->kind() != MsgKind::LoginOk) break;
                const std::string* sid = msg->get("session_id");
                if (!sid) {
                    state_ = State::Done;
                    break;
                }
                session_id_ = *sid;
                world.driver_tick();
                WireMessage initiate(MsgKind::Initiate, Channel::Http, name(), AuthServer::kName);
                initiate.set("session_id", session_id_);
                world.send(std::move(initiate));
                state_ = State::AwaitTokenAndOtp;
                break;
            }
            case State::AwaitTokenAndOtp: {
                if (msg->kind() == MsgKind::Result) {
                    if (const std::string* token = msg->get("token")) token_ = *token;
                } else if (msg->kind() == MsgKind::SmsOtp) {
                    if (const std::string* otp = msg->get("otp")) otp_ = *otp;
                }
                if (!token_.empty() && !otp_.empty()) {
                    build_candidates();
                    send_next_candidate(world);
                    state_ = State::AwaitResult;
                }
                break;
            }
            case State::AwaitResult: {
                if (msg->kind() != MsgKind::Result || !msg->get("status")) break;
                if (*msg->get("status") == "accepted") {
                    succeeded_ = true;
                    state_ = State::Done;
                } else if (next_candidate_ < candidates_.size()) {
                    send_next_candidate(world);
                } else {
                    state_ = State::Done;
                }
                break;
            }
            case State::Start:
            case State::Done:
                break;
        }
        return true;
    }

private:
    enum class State { Start, AwaitLogin, AwaitTokenAndOtp, AwaitResult, Done };

    static std::string encrypt_string(const std::string& digits, const RsaKeyPair& rsa) {
        std::string out;
        for (char c : digits) {
            out += std::to_string(encrypt_digit(c - '0', rsa).value);
        }
        return out;
    }

    /// The published insertion rule applied with a guessed summation at a
    /// guessed position: splice inside the OTP for positions up to its
    /// length, zero-pad beyond it.
    static std::string splice_guess(const std::string& otp, const std::string& guess, int pos) {
        if (pos <= static_cast<int>(otp.size())) {
            return otp.substr(0, pos - 1) + guess + otp.substr(pos - 1);
        }
        std::string padded = otp;
        padded.append(static_cast<std::size_t>(pos) - otp.size() - 1, '0');
        return padded + guess;
    }

    void build_candidates() {
        candidates_.clear();
        if (config_.mode == AuthMode::PlainOtp) {
            candidates_.push_back(otp_);  // the forwarded OTP is the password
            return;
        }
        // Transaction-password mode. Best keyless moves, in order: replay
        // the OTP verbatim, encipher it with the public parameters, then
        // (if modeled) brute-force the insertion rule with summation guesses
        // that assume nothing about the key digits.
        candidates_.push_back(otp_);
        candidates_.push_back(encrypt_string(otp_, config_.rsa));
        if (config_.model.brute_force_positions) {
            for (const char* guess : {"0", "00"}) {
                for (int pos = 1; pos <= 10; ++pos) {
                    candidates_.push_back(
                        encrypt_string(splice_guess(otp_, guess, pos), config_.rsa));
                }
            }
        }
    }

    void send_next_candidate(World& world) {
        world.driver_tick();
        WireMessage confirm(MsgKind::Confirm, Channel::Http, name(), AuthServer::kName);
        confirm.set("session_id", session_id_)
            .set("password", candidates_[next_candidate_++])
            .set("token", token_);
        world.send(std::move(confirm));
    }

    Config config_;
    bool& succeeded_;
    State state_ = State::Start;
    std::string session_id_;
    std::string token_;
    std::string otp_;
    std::vector<std::string> candidates_;
    std::size_t next_candidate_ = 0;
};

bool name_pins_mode(ScenarioName name, AuthMode& mode) {
    switch (name) {
        case ScenarioName::LegitPlain:
        case ScenarioName::MitmPlain:
            mode = AuthMode::PlainOtp;
            return true;
        case ScenarioName::LegitTxn:
        case ScenarioName::MitmTxn:
            mode = AuthMode::TxnPassword;
            return true;
        default:
            return false;
    }
}

} // namespace

std::string_view to_string(ScenarioName name) {
    switch (name) {
        case ScenarioName::LegitPlain: return "LegitPlain";
        case ScenarioName::LegitTxn: return "LegitTxn";
        case ScenarioName::MitmPlain: return "MitmPlain";
        case ScenarioName::MitmTxn: return "MitmTxn";
        case ScenarioName::Replay: return "Replay";
        case ScenarioName::Expiry: return "Expiry";
    }
    return "?";
}

std::optional<ScenarioName> parse_scenario_name(std::string_view s) {
    for (ScenarioName name : {ScenarioName::LegitPlain, ScenarioName::LegitTxn,
                              ScenarioName::MitmPlain, ScenarioName::MitmTxn, ScenarioName::Replay,
                              ScenarioName::Expiry}) {
        if (s == to_string(name)) return name;
    }
    return std::nullopt;
}

AttackerModel attacker_model_for(ScenarioName name) {
    AttackerModel model;
    if (name == ScenarioName::MitmPlain || name == ScenarioName::MitmTxn) {
        model.knows_credentials = true;
        model.sms_forwarding = true;
        model.brute_force_positions = name == ScenarioName::MitmTxn;
    }
    return model;
}

Scenario Scenario::standard(ScenarioName name, AuthMode mode, std::uint64_t seed) {
    Scenario s;
    s.name = name;
    s.seed = seed;
    if (!name_pins_mode(name, mode)) {
        // Replay and Expiry keep the caller's mode.
    }
    s.mode = mode;
    if (name == ScenarioName::Expiry) {
        s.clock_script = {0, 0, kOtpTtlSeconds + 1};  // jump right before the confirm
    }
    return s;
}

nlohmann::json Outcome::summary_json() const {
    return nlohmann::json{
        {"attacker_succeeded", attacker_succeeded},
        {"user_succeeded", user_succeeded},
        {"rejection_reasons", rejection_reasons},
        {"messages", transcript.size()},
    };
}

const std::vector<DemoUser>& demo_users() {
    static const std::vector<DemoUser> users = {
        {"John", "1234", "4321", "+15550101"},
        {"Jim", "2345", "4567", "+15550102"},
        {"Rusty", "3456", "2234", "+15550103"},
        {"David", "4567", "3458", "+15550104"},
    };
    return users;
}

Outcome run_scenario(const Scenario& scenario) {
    AuthMode pinned = scenario.mode;
    if (name_pins_mode(scenario.name, pinned) && pinned != scenario.mode) {
        std::ostringstream oss;
        oss << "scenario " << to_string(scenario.name) << " runs only in "
            << to_string(pinned) << " mode";
        throw std::invalid_argument(oss.str());
    }

    World world(scenario.mode, scenario.seed, scenario.clock_script);
    for (const DemoUser& u : demo_users()) {
        world.server.enroll(u.username, u.pin, u.secret_key, u.mobile);
    }

    const DemoUser& victim = demo_users()[kVictimIndex];
    const AttackerModel model = attacker_model_for(scenario.name);
    const bool mitm = model.knows_credentials;

    bool user_succeeded = false;
    bool attacker_succeeded = false;

    ServerActor server_actor;
    GatewayActor gateway({{victim.mobile, kUserActor}}, model.sms_forwarding);
    UserActor user(
        UserActor::Config{
            .username = victim.username,
            .pin = victim.pin,
            .secret_key = victim.secret_key,
            .mode = scenario.mode,
            .rsa = demo_key_pair(),
            .banks = !mitm,
            .replay_once = scenario.name == ScenarioName::Replay,
        },
        user_succeeded);
    AttackerActor attacker(
        AttackerActor::Config{
            .model = model,
            .victim_username = victim.username,
            .victim_pin = victim.pin,
            .mode = scenario.mode,
            .rsa = demo_key_pair(),
        },
        attacker_succeeded);

    Actor* const actors[] = {&server_actor, &gateway, &user, &attacker};
    int round = 0;
    for (; round < kMaxRounds; ++round) {
        bool any = false;
        for (Actor* actor : actors) {
            any = actor->step(world) || any;
        }
        if (!any) break;
    }
    if (round == kMaxRounds) {
        throw std::runtime_error("scenario did not quiesce");
    }

    Outcome outcome;
    outcome.transcript = world.transcript;

    // Success flags and rejection reasons re-derived from the transcript, so
    // anything the Outcome claims is checkable against the log alone. They
    // must agree with what the actors saw.
    bool user_from_log = false;
    bool attacker_from_log = false;
    for (const TranscriptEntry& entry : outcome.transcript.entries()) {
        if (entry.msg.kind() != MsgKind::Result) continue;
        const std::string* status = entry.msg.get("status");
        if (!status) continue;
        if (*status == "accepted") {
            if (entry.msg.to() == kUserActor) user_from_log = true;
            if (entry.msg.to() == kAttackerActor) attacker_from_log = true;
        } else if (const std::string* reason = entry.msg.get("reason")) {
            outcome.rejection_reasons.push_back(*reason);
        }
    }
    if (user_from_log != user_succeeded || attacker_from_log != attacker_succeeded) {
        throw std::runtime_error("transcript disagrees with actor outcomes");
    }
    outcome.user_succeeded = user_from_log;
    outcome.attacker_succeeded = attacker_from_log;
    return outcome;
}

std::string_view to_string(TranscriptCheck check) {
    switch (check) {
        case TranscriptCheck::ChannelSeparation: return "channel-separation";
        case TranscriptCheck::SecretKeyAbsence: return "secret-key-absence";
        case TranscriptCheck::MessageOrdering: return "message-ordering";
    }
    return "?";
}

std::vector<TranscriptCheck> all_transcript_checks() {
    return {TranscriptCheck::ChannelSeparation, TranscriptCheck::SecretKeyAbsence,
            TranscriptCheck::MessageOrdering};
}

namespace {

CheckResult check_channel_separation(const std::vector<TranscriptEntry>& entries) {
    CheckResult r{TranscriptCheck::ChannelSeparation, true, ""};
    for (const TranscriptEntry& e : entries) {
        if (e.msg.get("otp") && e.msg.via() != Channel::Sms) {
            r.passed = false;
            r.detail = "message " + std::to_string(e.seq) + " carries an otp field off the Sms channel";
            return r;
        }
        if (e.msg.get("token") && e.msg.via() != Channel::Http) {
            r.passed = false;
            r.detail =
                "message " + std::to_string(e.seq) + " carries a token field off the Http channel";
            return r;
        }
    }
    return r;
}

CheckResult check_secret_key_absence(const std::vector<TranscriptEntry>& entries) {
    CheckResult r{TranscriptCheck::SecretKeyAbsence, true, ""};
    for (const TranscriptEntry& e : entries) {
        if (e.msg.get(WireMessage::kReservedSecretKeyField)) {
            r.passed = false;
            r.detail = "message " + std::to_string(e.seq) + " carries a secret_key field";
            return r;
        }
    }
    return r;
}

CheckResult check_message_ordering(const std::vector<TranscriptEntry>& entries) {
    CheckResult r{TranscriptCheck::MessageOrdering, true, ""};
    std::uint64_t expected_seq = 0;
    std::size_t logins = 0, login_oks = 0, initiates = 0, confirms = 0, confirm_results = 0;
    for (const TranscriptEntry& e : entries) {
        if (e.seq != expected_seq) {
            r.passed = false;
            r.detail = "sequence gap at " + std::to_string(e.seq);
            return r;
        }
        ++expected_seq;
        const auto fail = [&](const char* what) {
            r.passed = false;
            r.detail = "message " + std::to_string(e.seq) + ": " + what;
        };
        switch (e.msg.kind()) {
            case MsgKind::Login:
                ++logins;
                break;
            case MsgKind::LoginOk:
                if (++login_oks > logins) fail("LoginOk without a pending Login");
                break;
            case MsgKind::Initiate:
                ++initiates;
                break;
            case MsgKind::SmsOtp:
                if (initiates == 0) fail("SmsOtp before any Initiate");
                break;
            case MsgKind::Confirm:
                ++confirms;
                break;
            case MsgKind::Result:
                if (e.msg.get("status") && ++confirm_results > confirms) {
                    fail("confirmation Result without a pending Confirm");
                }
                break;
        }
        if (!r.passed) return r;
    }
    return r;
}

} // namespace

std::vector<CheckResult> assert_transcript(const Outcome& outcome,
                                           const std::vector<TranscriptCheck>& checks) {
    const std::vector<TranscriptEntry> entries = outcome.transcript.entries();
    std::vector<CheckResult> results;
    results.reserve(checks.size());
    for (TranscriptCheck check : checks) {
        switch (check) {
            case TranscriptCheck::ChannelSeparation:
                results.push_back(check_channel_separation(entries));
                break;
            case TranscriptCheck::SecretKeyAbsence:
                results.push_back(check_secret_key_absence(entries));
                break;
            case TranscriptCheck::MessageOrdering:
                results.push_back(check_message_ordering(entries));
                break;
        }
    }
    return results;
}

std::vector<MatrixRow> scenario_matrix(std::uint64_t seed) {
    const std::pair<ScenarioName, AuthMode> rows[] = {
        {ScenarioName::LegitPlain, AuthMode::PlainOtp},
        {ScenarioName::LegitTxn, AuthMode::TxnPassword},
        {ScenarioName::MitmPlain, AuthMode::PlainOtp},
        {ScenarioName::MitmTxn, AuthMode::TxnPassword},
        {ScenarioName::Replay, AuthMode::PlainOtp},
        {ScenarioName::Replay, AuthMode::TxnPassword},
        {ScenarioName::Expiry, AuthMode::PlainOtp},
        {ScenarioName::Expiry, AuthMode::TxnPassword},
    };
    std::vector<MatrixRow> matrix;
    matrix.reserve(std::size(rows));
    for (const auto& [name, mode] : rows) {
        matrix.push_back(MatrixRow{name, mode, run_scenario(Scenario::standard(name, mode, seed))});
    }
    return matrix;
}

bool row_matches_expected(const MatrixRow& row, std::string* why) {
    const auto mismatch = [&](const std::string& what) {
        if (why) {
            *why = std::string(to_string(row.name)) + "/" + std::string(to_string(row.mode)) +
                   ": " + what;
        }
        return false;
    };
    const Outcome& o = row.outcome;
    const bool attacker_expected = row.name == ScenarioName::MitmPlain;
    const bool user_expected = row.name == ScenarioName::LegitPlain ||
                               row.name == ScenarioName::LegitTxn ||
                               row.name == ScenarioName::Replay;
    if (o.attacker_succeeded != attacker_expected) {
        return mismatch(o.attacker_succeeded ? "attacker got through"
                                             : "attacker expected to get through");
    }
    if (o.user_succeeded != user_expected) {
        return mismatch(o.user_succeeded ? "unexpected user success" : "user expected to succeed");
    }
    switch (row.name) {
        case ScenarioName::LegitPlain:
        case ScenarioName::LegitTxn:
        case ScenarioName::MitmPlain:
            if (!o.rejection_reasons.empty()) {
                return mismatch("unexpected rejection " + o.rejection_reasons.front());
            }
            break;
        case ScenarioName::MitmTxn:
            if (o.rejection_reasons.empty() ||
                !std::all_of(o.rejection_reasons.begin(), o.rejection_reasons.end(),
                             [](const std::string& reason) { return reason == "BadPassword"; })) {
                return mismatch("every attacker guess must reject as BadPassword");
            }
            break;
        case ScenarioName::Replay:
            if (o.rejection_reasons != std::vector<std::string>{"AlreadyUsed"}) {
                return mismatch("replayed confirm must reject as AlreadyUsed");
            }
            break;
        case ScenarioName::Expiry:
            if (o.rejection_reasons != std::vector<std::string>{"Expired"}) {
                return mismatch("late confirm must reject as Expired");
            }
            break;
    }
    for (const CheckResult& check : assert_transcript(o)) {
        if (!check.passed) {
            return mismatch(std::string(to_string(check.check)) + ": " + check.detail);
        }
    }
    return true;
}

bool matrix_matches_expected(const std::vector<MatrixRow>& rows, std::string* why) {
    if (rows.size() != 8) {
        if (why) *why = "expected 8 rows, got " + std::to_string(rows.size());
        return false;
    }
    for (const MatrixRow& row : rows) {
        if (!row_matches_expected(row, why)) return false;
    }
    return true;
}

} // namespace smsotp
