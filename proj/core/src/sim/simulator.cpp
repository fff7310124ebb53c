#include "dnas/sim/simulator.hpp"

#include "dnas/crypto/hash.hpp"
#include "dnas/crypto/keystore.hpp"

#include <algorithm>

namespace dnas::sim
{
    using nlohmann::json;

    protocol::MemberKind MemberSpec::kind() const noexcept
    {
        if (administrator)
            return protocol::MemberKind::ConsortiumAdministrator;
        return peer_role == contract::PeerRole::Winemaker ? protocol::MemberKind::Winemaker
                                                          : protocol::MemberKind::SupplyChainParticipant;
    }

    // A member's view of its own chain node.
    class Simulator::Gateway final : public protocol::LedgerGateway
    {
    public:
        Gateway(Simulator &sim, SimNode &node) : m_sim(sim), m_node(node) {}

        crypto::Address address() const override { return m_node.address(); }
        SimTime now() const override { return m_sim.now(); }

        Hash32 submit(std::string_view target, std::string_view method, const json &payload) override
        {
            if (m_node.halted())
                throw Error(Errc::State, m_node.id() + " is halted");
            auto &chain = m_node.chain();
            ledger::Transaction tx;
            tx.chain_id = chain.genesis().chain_id;
            tx.sender = m_node.address();
            tx.target = std::string(target);
            tx.method = std::string(method);
            tx.payload = payload;
            tx.nonce = chain.next_nonce(tx.sender);
            const auto signed_tx = ledger::SignedTransaction::sign(std::move(tx), m_node.key());
            const Hash32 hash = chain.submit(signed_tx);
            m_sim.broadcast(m_node.id(), "tx " + to_hex(hash).substr(0, 16), [signed_tx](SimNode &peer) {
                peer.chain().submit(signed_tx);
            });
            return hash;
        }

        ledger::Receipt await_receipt(const Hash32 &tx_hash) override
        {
            auto &chain = m_node.chain();
            if (!m_sim.run_until([&] { return chain.has_receipt(tx_hash); }, m_sim.m_config.receipt_timeout))
                throw Error(Errc::Timeout, "no receipt for " + to_hex(tx_hash, true));
            auto receipt = chain.receipt(tx_hash);
            m_sim.await_propagation(receipt.block_number);
            return receipt;
        }

        bool await(const std::function<bool()> &condition, SimTime timeout) override
        {
            if (!m_sim.run_until(condition, timeout))
                return false;
            m_sim.await_propagation(m_node.chain().height());
            return true;
        }

        json call(std::string_view target, std::string_view method, const json &payload) const override
        {
            return m_node.chain().call(m_node.address(), target, method, payload);
        }

        ledger::ValidatorSet validators() const override { return m_node.chain().validators(); }

        void propose_validator(const crypto::Address &candidate, bool add) override
        {
            m_node.chain().propose(m_node.address(), candidate, add);
        }

        void on_block(ledger::BlockListener listener) override { m_node.chain().on_block(std::move(listener)); }

    private:
        Simulator &m_sim;
        SimNode &m_node;
    };

    // Service-to-service requests ride the bus like everything else.
    class Simulator::Network final : public protocol::Transport
    {
    public:
        explicit Network(Simulator &sim) : m_sim(sim) {}

        void send(const std::string &from, const std::string &to, const std::string &endpoint, json payload) override
        {
            Simulator &sim = m_sim;
            sim.m_bus.post(sim.now() + sim.m_config.latency, from, to, endpoint,
                           [&sim, to, endpoint, payload = std::move(payload)]() -> std::string {
                               if (!sim.has_node(to))
                                   return "unroutable";
                               const auto response = sim.node(to).service().dispatch(endpoint, payload);
                               return std::to_string(response.status);
                           });
        }

    private:
        Simulator &m_sim;
    };

    Simulator::Simulator(SimConfig config) : m_config(std::move(config)), m_rng(0)
    {
        m_rng.seed(derive_seed("tags"));
        m_runtime = std::make_shared<contract::Runtime>();
        m_network = std::make_unique<Network>(*this);

        const auto admin = std::find_if(m_config.members.begin(), m_config.members.end(),
                                        [](const MemberSpec &m) { return m.administrator; });
        if (admin == m_config.members.end() ||
            std::count_if(m_config.members.begin(), m_config.members.end(),
                          [](const MemberSpec &m) { return m.administrator; }) != 1)
            throw Error(Errc::Config, "exactly one member must be the consortium administrator");
        if (!admin->bootstrap)
            throw Error(Errc::Config, "the administrator must join during the bootstrap stage");
        m_admin_id = admin->id;

        std::map<std::string, crypto::KeyPair> keys;
        auto &genesis = m_config.genesis;
        genesis.initial_validators.clear();
        genesis.bootstrap_count = m_config.bootstrap_count;
        for (const auto &m : m_config.members)
        {
            if (m.id.empty() || m.id == kSharedNode || keys.count(m.id))
                throw Error(Errc::Config, "member ids must be unique and non-empty: '" + m.id + "'");
            if (!m.bootstrap)
                continue;
            auto key = derive_key("member/" + m.id);
            if (m.node_type == contract::NodeType::Validator)
                genesis.initial_validators.push_back(key.address());
            genesis.alloc[key.address()] = 1'000'000'000;
            if (m.administrator)
                genesis.administrator = key.address();
            keys.emplace(m.id, std::move(key));
        }
        genesis.validate();

        m_store = std::make_unique<store::ContentNetwork>(m_admin_id);
        for (const auto &m : m_config.members)
            if (m.bootstrap)
                create_node(m, keys.at(m.id));

        for (const auto &c : m_config.consumers)
        {
            if (keys.count(c) || !m_consumers.emplace(c, derive_key("consumer/" + c)).second)
                throw Error(Errc::Config, "consumer id '" + c + "' collides with another actor");
        }

        SimNode &admin_node = node(m_admin_id);
        protocol::ServiceIdentity shared{std::string(kSharedNode),
                                         {protocol::MemberKind::WineConsumer, contract::NodeType::Listener},
                                         admin->peer_role,
                                         std::string(kSharedNode)};
        m_shared = std::make_unique<protocol::Service>(
            shared, admin_node.key(),
            protocol::ServiceDeps{admin_node.gateway(), *m_network, *m_store, m_db, m_tags}, derive_seed("shared"));
        m_shared->set_key_resolver([this](const std::string &name) -> std::optional<crypto::KeyPair> {
            auto it = m_consumers.find(name);
            if (it == m_consumers.end())
                return std::nullopt;
            return it->second;
        });

        m_db.on_flag([this](const records::WineRecord &record, const records::ValidationFailure &failure) {
            json notify = json::array({record.owner_member});
            for (const auto &entry : record.supply_chain_data)
                if (std::find(notify.begin(), notify.end(), entry.member) == notify.end())
                    notify.push_back(entry.member);
            m_notifications.push_back(json{{"time", failure.timestamp},
                                           {"wine_id", record.wine_id},
                                           {"attack", records::to_string(failure.attack_class)},
                                           {"layer", records::to_string(failure.layer)},
                                           {"details", failure.details},
                                           {"notify", notify}});
        });
    }

    Simulator::~Simulator() = default;

    std::uint64_t Simulator::derive_seed(std::string_view label) const
    {
        const std::string text = "dnas-sim/" + std::to_string(m_config.seed) + "/" + std::string(label);
        const Hash32 h = crypto::keccak256(as_bytes(text));
        std::uint64_t out = 0;
        for (int i = 0; i < 8; ++i)
            out = (out << 8) | h[static_cast<std::size_t>(i)];
        return out;
    }

    crypto::KeyPair Simulator::derive_key(std::string_view label) const
    {
        Hash32 scalar = crypto::keccak256(as_bytes("dnas-sim-key/" + std::to_string(m_config.seed) + "/" +
                                                   std::string(label)));
        for (;;)
        {
            try
            {
                return crypto::generate_keypair(scalar);
            }
            catch (const Error &e)
            {
                if (e.code() != Errc::RejectedSeed)
                    throw;
                scalar = crypto::keccak256(scalar);
            }
        }
    }

    SimNode &Simulator::create_node(const MemberSpec &spec, const crypto::KeyPair &key)
    {
        auto owned = std::unique_ptr<SimNode>(new SimNode(spec, key));
        SimNode &n = *owned;

        // The node key reaches the service only through the member's vault.
        n.m_vault = std::make_unique<crypto::Vault>([this] { return now(); }, derive_seed("vault/" + spec.id));
        const std::string path = crypto::member_secret_path(spec.id, "nodekey");
        {
            const crypto::VaultSession root{n.m_vault->issue_token({std::string(crypto::kVaultPrefixKey)}), 0};
            const Hash32 salt = crypto::keccak256(as_bytes("salt/" + std::to_string(derive_seed("ks/" + spec.id))));
            const Bytes iv(salt.begin(), salt.begin() + 16);
            const auto ks = crypto::encrypt_keystore(key, m_config.keystore_password, Bytes(salt.begin(), salt.end()),
                                                     iv, m_config.kdf_work_factor);
            n.m_vault->put(root, path, ks.to_json().dump());
        }
        const std::string secret_id = n.m_vault->create_approle("service-" + spec.id, {crypto::member_policy(spec.id)});
        const auto session = n.m_vault->login(crypto::VaultAuthMethod::with_approle("service-" + spec.id, secret_id));
        const auto stored = crypto::Keystore::from_json(json::parse(n.m_vault->get(session, path).value));
        crypto::KeyPair service_key = crypto::decrypt_keystore(stored, m_config.keystore_password);

        n.m_chain = std::make_unique<ledger::Chain>(m_config.genesis, m_runtime);
        catch_up(n);
        n.m_gateway = std::make_unique<Gateway>(*this, n);

        protocol::ServiceIdentity identity{spec.id, {spec.kind(), spec.node_type}, spec.peer_role, spec.id};
        n.m_service = std::make_unique<protocol::Service>(
            identity, std::move(service_key), protocol::ServiceDeps{*n.m_gateway, *m_network, *m_store, m_db, m_tags},
            derive_seed("service/" + spec.id));
        return *m_nodes.emplace(spec.id, std::move(owned)).first->second;
    }

    SimNode &Simulator::provision(const MemberSpec &spec)
    {
        if (has_node(spec.id) || is_consumer(spec.id) || spec.id == kSharedNode)
            throw Error(Errc::Duplicate, "node '" + spec.id + "' already exists");
        if (spec.administrator)
            throw Error(Errc::Config, "there is already a consortium administrator");
        return create_node(spec, derive_key("member/" + spec.id));
    }

    void Simulator::bootstrap()
    {
        auto &admin_service = admin().service();
        admin_service.enable_event_listener();
        admin_service.upgrade(contract::kVersionV1);
        m_store->add_member(m_admin_id, std::string(kSharedNode));
        for (const auto &m : m_config.members)
        {
            if (!m.bootstrap)
                continue;
            const SimNode &n = node(m.id);
            admin_service.onboard_node(contract::PeerEntry{n.address(), m.peer_role, m.id, m.node_type, now()});
        }
    }

    SimNode &Simulator::node(const std::string &id)
    {
        auto it = m_nodes.find(id);
        if (it == m_nodes.end())
            throw Error(Errc::NotFound, "no node '" + id + "'");
        return *it->second;
    }

    const SimNode &Simulator::node(const std::string &id) const
    {
        return const_cast<Simulator *>(this)->node(id);
    }

    std::vector<std::string> Simulator::node_ids() const
    {
        std::vector<std::string> ids;
        for (const auto &[id, n] : m_nodes)
            ids.push_back(id);
        return ids;
    }

    SimNode &Simulator::admin() { return node(m_admin_id); }

    const crypto::KeyPair &Simulator::consumer_key(const std::string &id) const
    {
        auto it = m_consumers.find(id);
        if (it == m_consumers.end())
            throw Error(Errc::NotFound, "no consumer '" + id + "'");
        return it->second;
    }

    ledger::Chain &Simulator::reference_chain() { return admin().chain(); }

    records::TagUid Simulator::new_tag_uid()
    {
        for (;;)
        {
            auto uid = records::random_uid(m_rng);
            if (!m_tags.contains(uid))
                return uid;
        }
    }

    void Simulator::alias_tag(const std::string &alias, const records::TagUid &uid) { m_tag_alias[alias] = uid; }

    records::NfcTag &Simulator::tag(const std::string &alias)
    {
        auto it = m_tag_alias.find(alias);
        if (it == m_tag_alias.end())
            throw Error(Errc::NotFound, "no tag aliased '" + alias + "'");
        return m_tags.at(it->second);
    }

    records::NfcTag &Simulator::issue_tag(const std::string &alias)
    {
        if (has_tag(alias))
            throw Error(Errc::Duplicate, "tag alias '" + alias + "' is taken");
        auto &tag = m_tags.add(records::NfcTag(new_tag_uid()));
        alias_tag(alias, tag.uid());
        return tag;
    }

    void Simulator::broadcast(const std::string &from, const std::string &kind,
                              const std::function<void(SimNode &)> &apply)
    {
        for (const auto &[id, n] : m_nodes)
        {
            if (id == from)
                continue;
            m_bus.post(now() + m_config.latency, from, id, kind, [this, id = id, apply]() -> std::string {
                try
                {
                    apply(node(id));
                    return "ok";
                }
                catch (const Error &e)
                {
                    return std::string(to_string(e.code()));
                }
            });
        }
    }

    void Simulator::deliver(Envelope envelope)
    {
        if (has_node(envelope.to) && node(envelope.to).halted())
        {
            m_bus.record(now(), envelope, "deferred");
            node(envelope.to).m_backlog.push_back(std::move(envelope));
            return;
        }
        const std::string outcome = envelope.deliver();
        m_bus.record(now(), envelope, outcome);
    }

    void Simulator::seal_if_due()
    {
        std::uint64_t tip = 0;
        for (const auto &[id, n] : m_nodes)
            if (!n->halted())
                tip = std::max(tip, n->chain().height());

        SimNode *chosen = nullptr;
        SimTime best = 0;
        for (const auto &[id, n] : m_nodes)
        {
            if (n->halted() || n->chain().height() != tip)
                continue;
            const auto slot = n->chain().slot_for(n->address());
            if (!slot || *slot > now())
                continue;
            if (!chosen || *slot < best)
            {
                chosen = n.get();
                best = *slot;
            }
        }
        if (!chosen)
            return;
        const ledger::Block block = chosen->chain().seal_block(chosen->key(), now());
        ++chosen->m_sealed;
        m_bus.record(now(), Envelope{now(), 0, chosen->id(), "*", "seal #" + std::to_string(block.header.number), {}},
                     to_hex(block.hash()).substr(0, 16));
        broadcast(chosen->id(), "block #" + std::to_string(block.header.number),
                  [this, block](SimNode &peer) {
                      if (block.header.number > peer.chain().height() + 1)
                          catch_up(peer);
                      peer.chain().import_block(block);
                  });
    }

    void Simulator::tick()
    {
        m_in_tick = true;
        try
        {
            m_clock.advance_to(now() + 1);
            while (auto envelope = m_bus.pop_due(now()))
                deliver(std::move(*envelope));
            seal_if_due();
        }
        catch (...)
        {
            m_in_tick = false;
            throw;
        }
        m_in_tick = false;
    }

    void Simulator::run_until_time(SimTime t)
    {
        while (now() < t)
            tick();
    }

    bool Simulator::run_until(const std::function<bool()> &condition, SimTime timeout)
    {
        if (m_in_tick)
            throw Error(Errc::State, "cannot wait for simulated time from inside a message handler");
        const SimTime deadline = now() + timeout;
        while (!condition())
        {
            if (now() >= deadline)
                return false;
            tick();
        }
        return true;
    }

    void Simulator::catch_up(SimNode &n)
    {
        const SimNode *best = nullptr;
        for (const auto &[id, other] : m_nodes)
            if (other.get() != &n && !other->halted() && (!best || other->chain().height() > best->chain().height()))
                best = other.get();
        if (!best)
            return;
        for (std::uint64_t h = n.chain().height() + 1; h <= best->chain().height(); ++h)
            n.chain().import_block(best->chain().block(h));
    }

    void Simulator::await_propagation(std::uint64_t height)
    {
        run_until(
            [&] {
                for (const auto &[id, n] : m_nodes)
                    if (!n->halted() && n->chain().height() < height)
                        return false;
                return true;
            },
            m_config.latency + 1);
    }

    void Simulator::halt(const std::string &id)
    {
        auto &n = node(id);
        if (n.halted())
            throw Error(Errc::State, id + " is already halted");
        n.m_halted = true;
    }

    void Simulator::resume(const std::string &id)
    {
        auto &n = node(id);
        if (!n.halted())
            throw Error(Errc::State, id + " is not halted");
        n.m_halted = false;
        auto backlog = std::move(n.m_backlog);
        n.m_backlog.clear();
        for (auto &envelope : backlog)
        {
            const std::string outcome = envelope.deliver();
            m_bus.record(now(), envelope, "replayed " + outcome);
        }
    }
} // namespace dnas::sim
