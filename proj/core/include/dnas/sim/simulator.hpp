#pragma once

#include "dnas/crypto/vault.hpp"
#include "dnas/ledger/chain.hpp"
#include "dnas/protocol/service.hpp"
#include "dnas/sim/bus.hpp"

#include <memory>

namespace dnas::sim
{
    inline constexpr std::string_view kSharedNode = "shared";

    struct MemberSpec
    {
        std::string id;
        contract::PeerRole peer_role = contract::PeerRole::Participant;
        contract::NodeType node_type = contract::NodeType::Validator;
        bool administrator = false;
        bool bootstrap = true; // joins during the bootstrap stage; otherwise onboarded later

        protocol::MemberKind kind() const noexcept;
    };

    struct SimConfig
    {
        // Empty blocks pull the gas limit down; keep room for transactions in long runs.
        SimConfig() { genesis.gas_floor = 1'000'000; }

        std::uint64_t seed = 1;
        // Validators, administrator and allocations are filled in from the members.
        ledger::GenesisConfig genesis;
        std::uint32_t bootstrap_count = 5;
        SimTime latency = 1;
        SimTime receipt_timeout = 64;
        std::string keystore_password = "dnas-sim";
        std::uint64_t kdf_work_factor = 1u << 14;
        std::vector<MemberSpec> members;
        std::vector<std::string> consumers;
    };

    class Simulator;

    /// One consortium member's deployment: chain node, store node, vault and
    /// blockchain service.
    class SimNode
    {
    public:
        const MemberSpec &spec() const noexcept { return m_spec; }
        const std::string &id() const noexcept { return m_spec.id; }
        crypto::Address address() const { return m_key.address(); }
        const crypto::KeyPair &key() const noexcept { return m_key; }
        ledger::Chain &chain() noexcept { return *m_chain; }
        const ledger::Chain &chain() const noexcept { return *m_chain; }
        protocol::Service &service() noexcept { return *m_service; }
        protocol::LedgerGateway &gateway() noexcept { return *m_gateway; }
        crypto::Vault &vault() noexcept { return *m_vault; }
        bool halted() const noexcept { return m_halted; }
        std::size_t blocks_sealed() const noexcept { return m_sealed; }

    private:
        friend class Simulator;
        SimNode(MemberSpec spec, crypto::KeyPair key) : m_spec(std::move(spec)), m_key(std::move(key)) {}

        MemberSpec m_spec;
        crypto::KeyPair m_key;
        std::unique_ptr<crypto::Vault> m_vault;
        std::unique_ptr<ledger::Chain> m_chain;
        std::unique_ptr<protocol::LedgerGateway> m_gateway;
        std::unique_ptr<protocol::Service> m_service;
        std::vector<Envelope> m_backlog;
        bool m_halted = false;
        std::size_t m_sealed = 0;
    };

    /// Deterministic in-process consortium. Time advances in whole ticks;
    /// each tick delivers due messages and then lets at most one validator
    /// seal. Everything random is derived from the seed.
    class Simulator
    {
    public:
        explicit Simulator(SimConfig config);
        ~Simulator();
        Simulator(const Simulator &) = delete;
        Simulator &operator=(const Simulator &) = delete;

        // Deploys the v1 implementation and admits the bootstrap members.
        void bootstrap();
        // Infrastructure for a member that will be onboarded later.
        SimNode &provision(const MemberSpec &spec);

        SimNode &node(const std::string &id);
        const SimNode &node(const std::string &id) const;
        bool has_node(const std::string &id) const { return m_nodes.count(id) != 0; }
        std::vector<std::string> node_ids() const;
        SimNode &admin();
        protocol::Service &shared_service() { return *m_shared; }
        bool is_consumer(const std::string &id) const { return m_consumers.count(id) != 0; }
        const crypto::KeyPair &consumer_key(const std::string &id) const;

        SimTime now() const noexcept { return m_clock.now(); }
        void tick();
        void run_until_time(SimTime t);
        bool run_until(const std::function<bool()> &condition, SimTime timeout);
        // Lets gossip carry block `height` to every running replica.
        void await_propagation(std::uint64_t height);

        void halt(const std::string &id);
        void resume(const std::string &id);

        store::ContentNetwork &store() noexcept { return *m_store; }
        records::RecordDb &db() noexcept { return m_db; }
        const records::RecordDb &db() const noexcept { return m_db; }
        protocol::TagRegistry &tags() noexcept { return m_tags; }
        records::TagUid new_tag_uid();
        // Tags are addressed by alias in scenarios; a record's tag is aliased by its wine id.
        void alias_tag(const std::string &alias, const records::TagUid &uid);
        records::NfcTag &tag(const std::string &alias);
        // A fresh blank tag with a unique UID, registered under `alias`.
        records::NfcTag &issue_tag(const std::string &alias);
        bool has_tag(const std::string &alias) const { return m_tag_alias.count(alias) != 0; }

        // The administrator's chain replica, used for reporting.
        ledger::Chain &reference_chain();
        const MessageBus &bus() const noexcept { return m_bus; }
        const std::vector<nlohmann::json> &notifications() const noexcept { return m_notifications; }
        const SimConfig &config() const noexcept { return m_config; }
        std::uint64_t derive_seed(std::string_view label) const;

    private:
        class Gateway;
        class Network;

        crypto::KeyPair derive_key(std::string_view label) const;
        SimNode &create_node(const MemberSpec &spec, const crypto::KeyPair &key);
        void deliver(Envelope envelope);
        void broadcast(const std::string &from, const std::string &kind, const std::function<void(SimNode &)> &apply);
        void seal_if_due();
        // Imports whatever the longest running replica has that `n` lacks.
        void catch_up(SimNode &n);

        SimConfig m_config;
        SimClock m_clock;
        MessageBus m_bus;
        std::shared_ptr<const contract::Runtime> m_runtime;
        std::unique_ptr<store::ContentNetwork> m_store;
        records::RecordDb m_db;
        protocol::TagRegistry m_tags;
        std::map<std::string, records::TagUid> m_tag_alias;
        std::unique_ptr<Network> m_network;
        std::map<std::string, std::unique_ptr<SimNode>> m_nodes;
        std::string m_admin_id;
        std::unique_ptr<protocol::Service> m_shared;
        std::map<std::string, crypto::KeyPair> m_consumers;
        std::mt19937_64 m_rng;
        std::vector<nlohmann::json> m_notifications;
        bool m_in_tick = false;
    };
} // namespace dnas::sim
