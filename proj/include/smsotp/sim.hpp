#pragma once

#include "smsotp/auth_server.hpp"
#include "smsotp/wire.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smsotp {

/// The shipped scenarios. The first four pin their auth mode by name; Replay
/// and Expiry run in either mode.
enum class ScenarioName { LegitPlain, LegitTxn, MitmPlain, MitmTxn, Replay, Expiry };

std::string_view to_string(ScenarioName name);
std::optional<ScenarioName> parse_scenario_name(std::string_view s);

/// What the attacker starts with. Credentials come from phishing, SMS
/// forwarding from malware on the victim's phone. knows_secret_key stays
/// false in every shipped scenario: the key never leaves the user and the
/// bank. brute_force_positions adds a key-less guessing pass over all ten
/// insertion positions, a stronger control than the forwarded-OTP replay.
struct AttackerModel {
    bool knows_credentials = false;
    bool sms_forwarding = false;
    bool knows_secret_key = false;
    bool brute_force_positions = false;
};

AttackerModel attacker_model_for(ScenarioName name);

/// One reproducible run: same (name, mode, seed, clock_script) in, byte-same
/// transcript out. clock_script[k] is the number of seconds the simulated
/// clock jumps right before the k-th scripted send (login, initiate, then
/// each confirm); missing entries mean no jump.
struct Scenario {
    ScenarioName name = ScenarioName::LegitTxn;
    AuthMode mode = AuthMode::TxnPassword;
    std::uint64_t seed = 7;
    std::vector<std::int64_t> clock_script;

    /// The stock configuration: mode forced where the name pins it, and the
    /// Expiry script jumping 301 s before the confirm.
    static Scenario standard(ScenarioName name, AuthMode mode, std::uint64_t seed);
};

/// Everything a run produced. The success flags and rejection reasons are
/// recomputed from the transcript alone, so the transcript is the one source
/// of truth a checker needs.
struct Outcome {
    bool attacker_succeeded = false;
    bool user_succeeded = false;
    Transcript transcript;
    std::vector<std::string> rejection_reasons;

    nlohmann::json summary_json() const;
};

Outcome run_scenario(const Scenario& scenario);

enum class TranscriptCheck { ChannelSeparation, SecretKeyAbsence, MessageOrdering };

std::string_view to_string(TranscriptCheck check);
std::vector<TranscriptCheck> all_transcript_checks();

struct CheckResult {
    TranscriptCheck check;
    bool passed = false;
    std::string detail;  // names the first offending seq on failure
};

std::vector<CheckResult> assert_transcript(const Outcome& outcome,
                                           const std::vector<TranscriptCheck>& checks =
                                               all_transcript_checks());

/// One row of the scenario-by-mode table the CLI prints.
struct MatrixRow {
    ScenarioName name;
    AuthMode mode;
    Outcome outcome;
};

/// All eight rows: the four mode-pinned scenarios plus Replay and Expiry in
/// both modes. Every row's transcript is also run through the structural
/// checks; a check failure is treated as a row mismatch by
/// matrix_matches_expected.
std::vector<MatrixRow> scenario_matrix(std::uint64_t seed);

/// True iff the attacker breaks through exactly in MitmPlain, the legitimate
/// user succeeds where expected, Replay and Expiry surface their named
/// rejection reasons, and every transcript passes the structural checks.
bool matrix_matches_expected(const std::vector<MatrixRow>& rows, std::string* why = nullptr);

/// The same expectations for one row, so a single named scenario can be
/// validated on its own.
bool row_matches_expected(const MatrixRow& row, std::string* why = nullptr);

/// The four demo accounts every scenario server is provisioned with.
struct DemoUser {
    const char* username;
    const char* pin;
    const char* secret_key;
    const char* mobile;
};

const std::vector<DemoUser>& demo_users();

} // namespace smsotp
