#pragma once

#include "dnas/sim/simulator.hpp"

#include <filesystem>
#include <optional>

namespace dnas::sim
{
    struct Step
    {
        SimTime at = 0;
        std::string actor;
        std::string action;
        nlohmann::json params = nlohmann::json::object();
    };

    /// A scripted run: who is in the consortium, what they do and when, and
    /// what must hold afterwards.
    struct Scenario
    {
        std::string name;
        std::uint64_t seed = 1;
        nlohmann::json genesis = nlohmann::json::object();
        std::uint32_t bootstrap_count = 5;
        std::uint64_t kdf_work_factor = 1u << 10;
        std::string keystore_password = "dnas-sim";
        SimTime session_timeout = 0;
        SimTime settle = 10;
        std::vector<MemberSpec> members;
        std::vector<std::string> consumers;
        std::vector<std::string> attackers;
        // Step times are offsets from the end of the bootstrap stage.
        std::vector<Step> steps;
        std::vector<nlohmann::json> expectations;

        // Throws Error(Errc::Parse) with the offending location.
        static Scenario from_json(const nlohmann::json &j);
        static Scenario load(const std::filesystem::path &path);
        SimConfig config(std::optional<std::uint64_t> seed_override = std::nullopt) const;
    };

    struct StepResult
    {
        std::size_t index = 0;
        SimTime at = 0;
        std::string actor;
        std::string action;
        bool ok = true;
        std::string error; // error code name when !ok
        std::string message;
        nlohmann::json result;
        nlohmann::json to_json() const;
    };

    struct ExpectationResult
    {
        std::size_t index = 0;
        nlohmann::json expectation;
        bool passed = false;
        std::string detail;
        nlohmann::json to_json() const;
    };

    struct RunOutput
    {
        nlohmann::json report;   // deterministic for a given (seed, scenario)
        nlohmann::json snapshot; // chain and record state for queries
        bool passed = false;
        Hash32 state_root{};
    };

    RunOutput run_scenario(const Scenario &scenario, std::optional<std::uint64_t> seed_override = std::nullopt);

    // Views over a run snapshot: "block" <n>, "tx" <hash>, "record" <wine_id>,
    // "peers", "validators". Throws Error(Errc::NotFound) for unknown ids and
    // Error(Errc::InvalidArgument) for an unknown kind.
    nlohmann::json query_snapshot(const nlohmann::json &snapshot, std::string_view kind, std::string_view arg = {});

    // Human-readable tables for a report.
    std::string render_report(const nlohmann::json &report);

    struct ReplayResult
    {
        bool identical = false;
        std::vector<std::string> state_roots;
        std::vector<std::string> report_digests;
    };

    // Throws Error(Errc::InvalidArgument) if runs < 2.
    ReplayResult replay_check(const Scenario &scenario, int runs,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
} // namespace dnas::sim
