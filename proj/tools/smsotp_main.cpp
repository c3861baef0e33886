#include "smsotp/authenticator_config.hpp"
#include "smsotp/sim.hpp"
#include "smsotp/tcp_server.hpp"
#include "smsotp/txn_password.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace smsotp;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

// ---------------------------------------------------------------------------
// generate: the offline authenticator. Reads the key (and RSA parameters)
// from the config file, prints the transaction password for one OTP.

int cmd_generate(const std::string& otp_digits, const std::string& config_path) {
    const AuthenticatorConfig config = AuthenticatorConfig::load_file(config_path);
    const TransactionPassword tp =
        generate_password(Otp(otp_digits), config.secret_key, config.key_pair());
    std::cout << tp.canonical << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// tables: recompute the demo tables from first principles and compare each
// cell against its pinned value. --tamper corrupts one pin to prove the
// failure path stays alive.

struct DemoTableRow {
    const char* otp;
    const char* key;
    const char* passcode;
    const char* password;
};

int cmd_tables(bool tamper) {
    const RsaKeyPair rsa = demo_key_pair();
    int failures = 0;

    const auto report = [&](const std::string& label, const std::string& got, std::string want) {
        if (tamper && failures == 0) {
            want.back() = want.back() == '0' ? '1' : '0';  // corrupt the first pin checked
        }
        const bool ok = got == want;
        if (!ok) ++failures;
        std::cout << "  [" << (ok ? "PASS" : "FAIL") << "] " << label << ": " << got;
        if (!ok) std::cout << " (want " << want << ")";
        std::cout << '\n';
    };

    std::cout << "Key setup: p=3 q=11 -> n=" << rsa.n << " phi=" << rsa.phi << " e=" << rsa.e
              << " d=" << rsa.d << '\n';

    std::cout << "Pass codes and transaction passwords:\n";
    const DemoTableRow rows[] = {
        {"891632", "4321", "81091632", "17103118278"},
        {"621589", "4567", "6215890022", "1881261730088"},
        {"123151", "2234", "11123151", "1118271261"},
        {"356123", "3458", "35206123", "272680181827"},
    };
    for (const DemoTableRow& row : rows) {
        const Otp otp(row.otp);
        const SecretKey key(row.key);
        const PassCode pc = build_passcode(otp, key);
        report(std::string("pass code  otp=") + row.otp + " key=" + row.key, pc.digits,
               row.passcode);
        report(std::string("password   otp=") + row.otp + " key=" + row.key,
               generate_password(otp, key, rsa).canonical, row.password);
    }

    std::cout << "Digit ledger for pass code 81091632:\n";
    const int plain[] = {8, 1, 0, 9, 1, 6, 3, 2};
    const u64 cipher[] = {17, 1, 0, 3, 1, 18, 27, 8};
    for (std::size_t i = 0; i < std::size(plain); ++i) {
        const DigitCiphertext c = encrypt_digit(plain[i], rsa);
        report("encrypt " + std::to_string(plain[i]), std::to_string(c.value),
               std::to_string(cipher[i]));
        report("decrypt " + std::to_string(cipher[i]),
               std::to_string(decrypt_digit(DigitCiphertext{cipher[i]}, rsa)),
               std::to_string(plain[i]));
    }

    if (failures > 0) {
        std::cout << failures << " cell(s) FAILED\n";
        return kExitCheckFailed;
    }
    std::cout << "all cells PASS\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// scenarios: run the attack/defense matrix (or one named scenario) and write
// transcripts.

void write_row_artifacts(const MatrixRow& row, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string base =
        std::string(to_string(row.name)) + "_" + std::string(to_string(row.mode));
    row.outcome.transcript.write_file((out_dir / (base + ".jsonl")).string());
}

void print_rows(const std::vector<MatrixRow>& rows) {
    std::printf("%-12s %-6s %-8s %-10s %s\n", "scenario", "mode", "user", "attacker", "rejections");
    for (const MatrixRow& row : rows) {
        std::string reasons;
        for (const std::string& reason : row.outcome.rejection_reasons) {
            if (!reasons.empty()) reasons += ",";
            reasons += reason;
        }
        if (reasons.empty()) reasons = "-";
        if (reasons.size() > 40) reasons = reasons.substr(0, 37) + "...";
        std::printf("%-12s %-6s %-8s %-10s %s\n", std::string(to_string(row.name)).c_str(),
                    std::string(to_string(row.mode)).c_str(),
                    row.outcome.user_succeeded ? "ok" : "-",
                    row.outcome.attacker_succeeded ? "BREACH" : "-", reasons.c_str());
    }
}

int cmd_scenarios(const std::string& name_arg, std::uint64_t seed, const std::string& out_dir) {
    std::vector<MatrixRow> rows;
    if (name_arg == "all") {
        rows = scenario_matrix(seed);
    } else {
        const auto name = parse_scenario_name(name_arg);
        if (!name) {
            std::cerr << "unknown scenario '" << name_arg << "'\n";
            return kExitUsage;
        }
        AuthMode probe = AuthMode::PlainOtp;
        const Scenario pinned = Scenario::standard(*name, probe, seed);
        if (*name == ScenarioName::Replay || *name == ScenarioName::Expiry) {
            for (AuthMode mode : {AuthMode::PlainOtp, AuthMode::TxnPassword}) {
                rows.push_back(
                    MatrixRow{*name, mode, run_scenario(Scenario::standard(*name, mode, seed))});
            }
        } else {
            rows.push_back(MatrixRow{*name, pinned.mode, run_scenario(pinned)});
        }
    }

    nlohmann::json summary = nlohmann::json::array();
    for (const MatrixRow& row : rows) {
        write_row_artifacts(row, out_dir);
        nlohmann::json entry = row.outcome.summary_json();
        entry["scenario"] = std::string(to_string(row.name));
        entry["mode"] = std::string(to_string(row.mode));
        summary.push_back(std::move(entry));
    }
    {
        std::ofstream f(std::filesystem::path(out_dir) / "summary.json");
        f << summary.dump(2) << '\n';
    }

    print_rows(rows);

    std::string why;
    bool ok = true;
    for (const MatrixRow& row : rows) {
        if (!row_matches_expected(row, &why)) {
            ok = false;
            break;
        }
    }
    if (name_arg == "all" && ok) {
        ok = matrix_matches_expected(rows, &why);
    }
    if (!ok) {
        std::cout << "expectation mismatch: " << why << '\n';
        return kExitCheckFailed;
    }
    std::cout << "all expectations hold\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// serve: the bank server on a TCP socket.

volatile std::sig_atomic_t g_stop = 0;

void handle_stop_signal(int) {
    g_stop = 1;
}

int cmd_serve(const std::string& listen, const std::string& mode_name, std::uint64_t seed,
              const std::string& state_path, const std::string& sms_out,
              const std::string& transcript_path, bool demo_users_flag) {
    const auto mode = parse_auth_mode(mode_name);
    if (!mode) {
        std::cerr << "unknown mode '" << mode_name << "' (use plain or txn)\n";
        return kExitUsage;
    }

    TcpServer::Options options;
    parse_listen_address(listen, options.host, options.port);
    options.sms_outbox_path = sms_out;

    SystemClock clock;
    SeededRng rng(seed);
    AuthServer server(*mode, demo_key_pair(), clock, rng);
    if (!state_path.empty()) {
        server.set_state_path(state_path);
        server.load_state_file();
    }
    if (demo_users_flag) {
        for (const DemoUser& u : demo_users()) {
            if (!server.is_enrolled(u.username)) {
                server.enroll(u.username, u.pin, u.secret_key, u.mobile);
            }
        }
    }

    Transcript transcript;
    TcpServer tcp(server, transcript, options);
    tcp.start();
    std::cout << "listening on " << options.host << ":" << tcp.port() << " mode="
              << to_string(*mode) << '\n'
              << std::flush;

    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    while (!g_stop) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    tcp.stop();
    if (!transcript_path.empty()) {
        transcript.write_file(transcript_path);
    }
    std::cout << "stopped after " << transcript.size() << " messages\n";
    return kExitOk;
}

std::uint64_t random_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SMS OTP hardening demo: offline authenticator, bank server, attack scenarios"};
    app.require_subcommand(1);

    std::function<int()> action;

    // generate
    auto* generate = app.add_subcommand(
        "generate", "Compute the transaction password for one OTP (offline)");
    std::string otp_arg;
    std::string config_path = "authenticator.json";
    generate->add_option("--otp", otp_arg, "The 6-digit OTP from the SMS")->required();
    generate->add_option("--config", config_path, "Authenticator config JSON")
        ->capture_default_str();
    generate->callback([&] { action = [&] { return cmd_generate(otp_arg, config_path); }; });

    // tables
    auto* tables = app.add_subcommand(
        "tables", "Recompute the demo tables and check every cell");
    bool tamper = false;
    tables->add_flag("--tamper", tamper)->group("");  // test hook, hidden from help
    tables->callback([&] { action = [&] { return cmd_tables(tamper); }; });

    // scenarios
    auto* scenarios = app.add_subcommand(
        "scenarios", "Run attack/defense scenarios and write transcripts");
    std::string scenario_name;
    std::uint64_t scenario_seed = 7;
    std::string out_dir = "scenario_transcripts";
    scenarios
        ->add_option("name", scenario_name,
                     "LegitPlain, LegitTxn, MitmPlain, MitmTxn, Replay, Expiry, or all")
        ->required();
    scenarios->add_option("--seed", scenario_seed, "Run seed")->capture_default_str();
    scenarios->add_option("--out", out_dir, "Transcript output directory")->capture_default_str();
    scenarios->callback(
        [&] { action = [&] { return cmd_scenarios(scenario_name, scenario_seed, out_dir); }; });

    // serve
    auto* serve = app.add_subcommand("serve", "Run the bank server on a TCP socket");
    std::string listen = "127.0.0.1:9034";
    std::string mode_name = "txn";
    std::uint64_t serve_seed = 0;
    std::string state_path;
    std::string sms_out;
    std::string transcript_path;
    bool demo_users_flag = false;
    serve->add_option("--listen", listen, "host:port (port 0 picks one)")->capture_default_str();
    serve->add_option("--mode", mode_name, "plain or txn")->capture_default_str();
    auto* seed_opt = serve->add_option("--seed", serve_seed, "RNG seed (default: random)");
    serve->add_option("--state", state_path, "State snapshot file")->envname("TXNPASS_STATE");
    serve->add_option("--sms-out", sms_out, "File that stands in for the phone (JSONL)");
    serve->add_option("--transcript", transcript_path, "Write the wire transcript here on exit");
    serve->add_flag("--demo-users", demo_users_flag, "Enroll the four demo accounts at startup");
    serve->callback([&] {
        action = [&, seed_opt] {
            const std::uint64_t seed = seed_opt->count() > 0 ? serve_seed : random_seed();
            return cmd_serve(listen, mode_name, seed, state_path, sms_out, transcript_path,
                             demo_users_flag);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        return action();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}
