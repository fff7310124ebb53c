#pragma once

#include "dnas/protocol/gateway.hpp"
#include "dnas/protocol/types.hpp"
#include "dnas/records/record_db.hpp"
#include "dnas/store/content_network.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <set>

namespace dnas::protocol
{
    inline constexpr std::string_view kRegistry = "registry";
    inline constexpr std::string_view kProxy = "proxy";

    struct ServiceDeps
    {
        LedgerGateway &ledger;
        Transport &transport;
        store::ContentNetwork &store;
        records::RecordDb &db;
        TagRegistry &tags;
    };

    /// What the winemaker supplies when registering a bottle.
    struct RecordDraft
    {
        std::string wine_id;
        nlohmann::json pedigree = nlohmann::json::object();
    };

    // Decides whether this member approves a registry change for `candidate`.
    using VotePolicy = std::function<bool(const crypto::Address &candidate, bool add)>;
    // Maps a custodian name from a request to its signing key.
    using KeyResolver = std::function<std::optional<crypto::KeyPair>(const std::string &name)>;

    /// One member's blockchain service: the endpoint surface, the record
    /// flows, onboarding and the registry event listener. Requests are
    /// handled one at a time.
    class Service
    {
    public:
        Service(ServiceIdentity identity, crypto::KeyPair node_key, ServiceDeps deps, std::uint64_t seed);

        const ServiceIdentity &identity() const noexcept { return m_identity; }
        const std::string &member_id() const noexcept { return m_identity.member_id; }
        crypto::Address address() const { return m_key.address(); }

        bool peer_validate(const crypto::Address &requester) const;
        std::vector<PeerEntry> peers() const;

        // Administrator side of membership changes.
        OnboardResult onboard_node(const PeerEntry &candidate, SimTime vote_timeout = 20);
        OnboardResult remove_node(const crypto::Address &candidate, SimTime vote_timeout = 20);
        // Member side: cast (or decline) a registry vote. Returns whether a vote was submitted.
        bool handle_propose(const PeerEntry &candidate, bool add);
        void set_vote_policy(VotePolicy policy) { m_vote_policy = std::move(policy); }

        // Subscribes to this node's blocks; PeerAdded/PeerRemoved trigger a
        // validator proposal round. Only meaningful on the administrator.
        void enable_event_listener();
        std::size_t validator_requests_sent() const noexcept { return m_validator_requests; }
        // Event delivery entry point; safe to call again with the same block.
        void handle_block(const ledger::Block &block, const std::vector<ledger::Receipt> &receipts);

        CreateReceipt create_record_flow(const RecordDraft &draft, records::NfcTag &tag, const std::string &device_id);
        ValidationResult validate_record_flow(records::NfcTag &tag);
        // The custodian defaults to this member's node key.
        AppendReceipt accept_record_flow(records::NfcTag &tag, const std::optional<crypto::KeyPair> &custodian = {},
                                         const std::string &custodian_name = {});

        ledger::Receipt upgrade(std::string_view version);
        ledger::Receipt set_consensus_level(std::optional<std::uint64_t> level);

        Response dispatch(std::string_view endpoint, const nlohmann::json &payload);

        void set_session_timeout(SimTime timeout) noexcept { m_session_timeout = timeout; }
        void set_key_resolver(KeyResolver resolver) { m_key_resolver = std::move(resolver); }
        bool has_session(const std::string &wine_id) const;

    private:
        struct Session
        {
            std::string token;
            SimTime expires_at = 0; // 0: no expiry
        };

        ledger::Receipt transact_or_throw(const std::string &stage, std::string_view target, std::string_view method,
                                          const nlohmann::json &payload);
        void require_admin() const;
        void fan_out(const std::string &endpoint, const nlohmann::json &payload,
                     const std::function<bool(const PeerEntry &)> &recipient);
        LayerOutcome check_database(const records::WineRecord &db, const records::TagReading &reading) const;
        LayerOutcome check_chain(const records::TagReading &reading, nlohmann::json &onchain) const;
        LayerOutcome check_content(const records::WineRecord &db, const nlohmann::json &onchain);
        ValidationResult fail(ValidationResult result, const std::optional<std::string> &wine_id);
        nlohmann::json overview(const records::WineRecord &record) const;
        Response route(std::string_view endpoint, const nlohmann::json &payload);

        ServiceIdentity m_identity;
        crypto::KeyPair m_key;
        ServiceDeps m_deps;
        std::mt19937_64 m_rng;
        std::recursive_mutex m_serial;

        VotePolicy m_vote_policy;
        KeyResolver m_key_resolver;
        std::set<std::string> m_seen_events;
        std::size_t m_validator_requests = 0;
        bool m_listening = false;

        std::map<std::string, Session> m_sessions;
        SimTime m_session_timeout = 0;
        std::uint64_t m_session_counter = 0;
    };
} // namespace dnas::protocol
