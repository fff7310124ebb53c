// dnas: run consortium scenarios, query their final state, check replay determinism.

#include "dnas/sim/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace
{
    using nlohmann::json;

    // Exit codes: 0 pass, 1 expectation failure, 2 usage or parse error, 3 not found.
    constexpr int kPass = 0;
    constexpr int kFail = 1;
    constexpr int kUsage = 2;
    constexpr int kNotFound = 3;

    void write_json(const std::string &path, const json &j)
    {
        std::ofstream out(path);
        if (!out)
            throw dnas::Error(dnas::Errc::InvalidArgument, "cannot write " + path);
        out << j.dump(2) << '\n';
    }

    json read_json(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw dnas::Error(dnas::Errc::Parse, "cannot open " + path);
        try
        {
            return json::parse(in);
        }
        catch (const json::parse_error &e)
        {
            throw dnas::Error(dnas::Errc::Parse, path + ": " + e.what());
        }
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"dnas consortium simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string state_path;
    bool as_json = false;

    auto *run = app.add_subcommand("run", "Execute a scenario and evaluate its expectations");
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out_path, "Write the JSON report here");
    run->add_option("--state", state_path, "Write a state snapshot for later queries");
    run->add_flag("--json", as_json, "Print the JSON report instead of tables");

    std::string query_state;
    std::string query_kind;
    std::string query_arg;
    auto *query = app.add_subcommand("query", "Inspect a state snapshot");
    query->add_option("--state", query_state, "Snapshot written by 'run --state'")->required();
    query->add_option("kind", query_kind, "block | tx | record | peers | validators")
        ->required()
        ->check(CLI::IsMember({"block", "tx", "record", "peers", "validators"}));
    query->add_option("id", query_arg, "Block number, transaction hash or wine id");

    int runs = 3;
    auto *replay = app.add_subcommand("replay-check", "Run a scenario repeatedly and compare outcomes");
    replay->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    replay->add_option("--runs", runs, "Number of runs (at least 2)")->required();
    replay->add_option("--seed", seed, "Override the scenario seed");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try
    {
        if (*run)
        {
            const auto scenario = dnas::sim::Scenario::load(scenario_path);
            const auto output = dnas::sim::run_scenario(scenario, seed);
            if (!out_path.empty())
                write_json(out_path, output.report);
            if (!state_path.empty())
                write_json(state_path, output.snapshot);
            if (as_json)
                std::cout << output.report.dump(2) << '\n';
            else
                std::cout << dnas::sim::render_report(output.report);
            if (!output.passed)
            {
                const auto &first = output.report.at("first_failure");
                std::cerr << "first failure: expectation " << first.at("index") << " ("
                          << first.at("expectation").at("type").get<std::string>()
                          << "): " << first.at("detail").get<std::string>() << '\n';
                return kFail;
            }
            return kPass;
        }
        if (*query)
        {
            const auto snapshot = read_json(query_state);
            std::cout << dnas::sim::query_snapshot(snapshot, query_kind, query_arg).dump(2) << '\n';
            return kPass;
        }
        if (*replay)
        {
            const auto scenario = dnas::sim::Scenario::load(scenario_path);
            const auto result = dnas::sim::replay_check(scenario, runs, seed);
            for (std::size_t i = 0; i < result.state_roots.size(); ++i)
                std::cout << "run " << i + 1 << "  state_root " << result.state_roots[i] << "  report "
                          << result.report_digests[i] << '\n';
            std::cout << (result.identical ? "identical" : "DIVERGED") << '\n';
            return result.identical ? kPass : kFail;
        }
    }
    catch (const dnas::Error &e)
    {
        std::cerr << "error (" << dnas::to_string(e.code()) << "): " << e.what() << '\n';
        switch (e.code())
        {
        case dnas::Errc::NotFound:
            return kNotFound;
        case dnas::Errc::Parse:
        case dnas::Errc::InvalidArgument:
            return kUsage;
        default:
            return kFail;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
    return kUsage;
}
