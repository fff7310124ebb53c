#include "dnas/protocol/service.hpp"

#include "dnas/crypto/json.hpp"
#include "dnas/crypto/tag_payload.hpp"

namespace dnas::protocol
{
    using nlohmann::json;
    using records::NfcTag;
    using records::TagReading;
    using records::WineRecord;
    using records::WineStatus;

    namespace
    {
        template <class F>
        auto at_stage(const std::string &stage, F &&step) -> decltype(step())
        {
            try
            {
                return step();
            }
            catch (const FlowError &)
            {
                throw;
            }
            catch (const Error &e)
            {
                throw FlowError(stage, e.code(), e.what());
            }
        }

        std::string event_key(const Hash32 &tx, std::size_t index)
        {
            return to_hex(tx) + "/" + std::to_string(index);
        }

        LayerOutcome pass(ValidationLayer layer) { return {layer, std::nullopt, {}}; }

        LayerOutcome attack(ValidationLayer layer, AttackClass cls, std::string details)
        {
            return {layer, cls, std::move(details)};
        }

        records::TagUid uid_of(const json &payload)
        {
            return fixed_from_hex<records::kTagUidSize>(payload.at("tag_uid").get<std::string>());
        }

        json sig_payload(const std::string &wine_id, const crypto::Signature &sig)
        {
            return json{{"wine_id", wine_id}, {"v", sig.v}, {"r", to_hex(sig.r)}, {"s", to_hex(sig.s)}};
        }
    } // namespace

    records::NfcTag &TagRegistry::add(records::NfcTag tag)
    {
        const auto uid = tag.uid();
        auto [it, inserted] = m_tags.emplace(uid, std::move(tag));
        if (!inserted)
            throw Error(Errc::Duplicate, "tag " + to_hex(uid) + " already exists");
        return it->second;
    }

    records::NfcTag &TagRegistry::at(const records::TagUid &uid)
    {
        auto it = m_tags.find(uid);
        if (it == m_tags.end())
            throw Error(Errc::NotFound, "no tag with uid " + to_hex(uid));
        return it->second;
    }

    const records::NfcTag &TagRegistry::at(const records::TagUid &uid) const
    {
        return const_cast<TagRegistry *>(this)->at(uid);
    }

    Service::Service(ServiceIdentity identity, crypto::KeyPair node_key, ServiceDeps deps, std::uint64_t seed)
        : m_identity(std::move(identity)), m_key(std::move(node_key)), m_deps(deps), m_rng(seed)
    {
    }

    bool Service::peer_validate(const crypto::Address &requester) const
    {
        try
        {
            return m_deps.ledger.call(kRegistry, "isPeer", json{{"address", requester}}).at("result").get<bool>();
        }
        catch (const Error &e)
        {
            throw Error(Errc::Routing, std::string("registry unreachable: ") + e.what());
        }
    }

    std::vector<PeerEntry> Service::peers() const
    {
        return m_deps.ledger.call(kRegistry, "getPeers", json::object()).get<std::vector<PeerEntry>>();
    }

    ledger::Receipt Service::transact_or_throw(const std::string &stage, std::string_view target,
                                               std::string_view method, const json &payload)
    {
        auto receipt = at_stage(stage, [&] { return m_deps.ledger.transact(target, method, payload); });
        if (!receipt.success)
            throw FlowError(stage, Errc::ContractReverted, receipt.error);
        return receipt;
    }

    void Service::require_admin() const
    {
        if (!m_identity.administrator())
            throw Error(Errc::Authorization, m_identity.member_id + " is not the consortium administrator");
    }

    void Service::fan_out(const std::string &endpoint, const json &payload,
                          const std::function<bool(const PeerEntry &)> &recipient)
    {
        for (const auto &peer : peers())
        {
            if (!recipient(peer))
                continue;
            m_deps.transport.send(m_identity.member_id, peer.node_id, endpoint, payload);
            if (endpoint == "/validator/propose")
                ++m_validator_requests;
        }
    }

    // Membership

    OnboardResult Service::onboard_node(const PeerEntry &candidate, SimTime vote_timeout)
    {
        std::lock_guard lock(m_serial);
        require_admin();
        if (peer_validate(candidate.address))
            throw Error(Errc::Duplicate, candidate.node_id + " is already a consortium member");

        PeerEntry entry = candidate;
        if (entry.joined_at == 0)
            entry.joined_at = m_deps.ledger.now();

        OnboardResult result;
        const json stage = m_deps.ledger.call(kRegistry, "getBootstrapCount", json::object());
        if (stage.at("size").get<std::size_t>() < stage.at("bootstrap_count").get<std::size_t>())
        {
            transact_or_throw("bootstrap", kRegistry, "bootstrapAddPeer", json{{"candidate", entry}});
            result.bootstrap = true;
            result.state = MembershipState::Admitted;
            return result;
        }

        const json request{{"candidate", entry}, {"add", true}};
        for (const auto &peer : peers())
        {
            m_deps.transport.send(m_identity.member_id, peer.node_id, "/peer/propose-add", request);
            ++result.requests;
        }
        const auto address = entry.address;
        const bool admitted = m_deps.ledger.await([&] { return peer_validate(address); }, vote_timeout);
        result.state = admitted ? MembershipState::Admitted : MembershipState::Pending;
        return result;
    }

    OnboardResult Service::remove_node(const crypto::Address &candidate, SimTime vote_timeout)
    {
        std::lock_guard lock(m_serial);
        require_admin();
        std::optional<PeerEntry> entry;
        for (const auto &p : peers())
            if (p.address == candidate)
                entry = p;
        if (!entry)
            throw Error(Errc::NotFound, candidate.hex() + " is not a consortium member");

        OnboardResult result;
        const json request{{"candidate", *entry}, {"add", false}};
        for (const auto &peer : peers())
        {
            if (peer.address == candidate)
                continue;
            m_deps.transport.send(m_identity.member_id, peer.node_id, "/peer/propose-remove", request);
            ++result.requests;
        }
        const bool removed = m_deps.ledger.await([&] { return !peer_validate(candidate); }, vote_timeout);
        result.state = removed ? MembershipState::Admitted : MembershipState::Pending;
        return result;
    }

    bool Service::handle_propose(const PeerEntry &candidate, bool add)
    {
        std::lock_guard lock(m_serial);
        if (m_vote_policy && !m_vote_policy(candidate.address, add))
            return false;
        if (!peer_validate(address()))
            return false;
        m_deps.ledger.submit(kRegistry, "proposePeer", json{{"candidate", candidate}, {"add", add}});
        return true;
    }

    // Registry events

    void Service::enable_event_listener()
    {
        std::lock_guard lock(m_serial);
        if (m_listening)
            return;
        m_listening = true;
        m_deps.ledger.on_block([this](const ledger::Block &block, const std::vector<ledger::Receipt> &receipts) {
            handle_block(block, receipts);
        });
    }

    void Service::handle_block(const ledger::Block &, const std::vector<ledger::Receipt> &receipts)
    {
        std::lock_guard lock(m_serial);
        if (!m_identity.administrator())
            return;
        for (const auto &receipt : receipts)
        {
            if (!receipt.success)
                continue;
            for (std::size_t i = 0; i < receipt.events.size(); ++i)
            {
                if (!m_seen_events.insert(event_key(receipt.tx_hash, i)).second)
                    continue;
                const auto &kind = receipt.events[i].kind;
                if (const auto *added = std::get_if<contract::PeerAdded>(&kind))
                {
                    const PeerEntry &c = added->candidate;
                    if (!m_deps.store.is_member(c.node_id))
                        m_deps.store.add_member(m_identity.store_node, c.node_id);
                    if (c.node_type == NodeType::Validator && !m_deps.ledger.validators().contains(c.address))
                    {
                        fan_out("/validator/propose", json{{"candidate", c.address}, {"add", true}},
                                [&](const PeerEntry &p) {
                                    return p.node_type == NodeType::Validator && p.address != c.address;
                                });
                    }
                }
                else if (const auto *removed = std::get_if<contract::PeerRemoved>(&kind))
                {
                    const PeerEntry &c = removed->candidate;
                    if (m_deps.store.is_member(c.node_id) && c.node_id != m_identity.store_node)
                        m_deps.store.remove_member(m_identity.store_node, c.node_id);
                    if (m_deps.ledger.validators().contains(c.address))
                    {
                        fan_out("/validator/propose", json{{"candidate", c.address}, {"add", false}},
                                [&](const PeerEntry &p) { return p.node_type == NodeType::Validator; });
                    }
                }
            }
        }
    }

    // Creation

    CreateReceipt Service::create_record_flow(const RecordDraft &draft, NfcTag &tag, const std::string &device_id)
    {
        std::lock_guard lock(m_serial);
        const SimTime now = m_deps.ledger.now();

        at_stage("peer_validate", [&] {
            if (!peer_validate(address()))
                throw Error(Errc::Membership, m_identity.member_id + " is not a consortium member");
            if (m_identity.peer_role != PeerRole::Winemaker)
                throw Error(Errc::Role, m_identity.member_id + " lacks the winemaker role");
        });

        at_stage("db_create", [&] {
            WineRecord record;
            record.wine_id = draft.wine_id;
            record.owner_member = m_identity.member_id;
            record.pedigree_data = draft.pedigree;
            record.wine_status = WineStatus::Created;
            record.write_count = 1;
            record.custodian = address();
            record.tag.uid = tag.uid();
            record.tag.device_id = device_id;
            record.supply_chain_data.push_back({m_identity.member_id, address(), "created", now, 1});
            m_deps.db.create(m_identity.peer_role, std::move(record));
        });

        at_stage("tag_write", [&] {
            const auto sig = crypto::sign_tag_payload(draft.wine_id, tag.uid(), device_id, m_key);
            tag.write(records::TagPayload{draft.wine_id, sig, 1});
            const auto password = tag.enable_protection(m_rng);
            m_deps.db.mutate(draft.wine_id, [&](WineRecord &r) {
                r.tag.signature = sig;
                r.tag.password = password;
            });
        });

        const store::ContentId cid = at_stage("content_add", [&] {
            const std::string subset = records::derive_subset(m_deps.db.get(draft.wine_id));
            auto id = m_deps.store.add(m_identity.store_node, as_bytes(subset));
            m_deps.store.pin(m_identity.store_node, id);
            return id;
        });

        const json create{{"wine_id", draft.wine_id},
                          {"data_hash", cid.str()},
                          {"pub_addr", address()},
                          {"tag_hash", hash_to_json(crypto::hashed_identifier(ByteView(tag.uid())))},
                          {"device_hash", hash_to_json(crypto::hashed_identifier(std::string_view(device_id)))}};
        ledger::Receipt receipt;
        try
        {
            receipt = transact_or_throw("chain_create", kProxy, "createWineRecord", create);
        }
        catch (const FlowError &)
        {
            // Kept for audit; the written tag must be re-issued.
            m_deps.db.mutate(draft.wine_id, [](WineRecord &r) { r.wine_status = WineStatus::Error; });
            throw;
        }

        at_stage("record_update", [&] {
            m_deps.db.mutate(draft.wine_id, [&](WineRecord &r) {
                r.transaction_data.push_back({to_hex(receipt.tx_hash, true), receipt.block_number, address(),
                                              m_deps.ledger.now(), "createWineRecord"});
                r.content_id = cid.str();
            });
        });
        return CreateReceipt{draft.wine_id, cid.str(), receipt.tx_hash, receipt.block_number};
    }

    // Validation

    LayerOutcome Service::check_database(const WineRecord &db, const TagReading &reading) const
    {
        constexpr auto layer = ValidationLayer::OffChainDb;
        if (!reading.payload)
            return attack(layer, AttackClass::Modification, "tag memory is blank or undecodable");
        const auto &payload = *reading.payload;
        if (reading.uid != db.tag.uid)
            return attack(layer, AttackClass::Cloning, "tag uid " + to_hex(reading.uid) + " is not bound to " + db.wine_id);
        if (reading.write_counter != db.write_count || payload.write_counter != db.write_count)
            return attack(layer, AttackClass::Reapplication,
                          "write counter " + std::to_string(reading.write_counter) + "/" +
                              std::to_string(payload.write_counter) + ", database has " +
                              std::to_string(db.write_count));
        if (reading.read_counter != db.read_count + 1)
            return attack(layer, AttackClass::Reapplication,
                          "read counter " + std::to_string(reading.read_counter) + ", database expects " +
                              std::to_string(db.read_count + 1));
        if (payload.wine_id != db.wine_id)
            return attack(layer, AttackClass::Modification, "payload wine id '" + payload.wine_id + "'");
        if (payload.signature != db.tag.signature)
            return attack(layer, AttackClass::Modification, "payload signature differs from the database");
        return pass(layer);
    }

    LayerOutcome Service::check_chain(const TagReading &reading, json &onchain) const
    {
        constexpr auto layer = ValidationLayer::OnChain;
        const auto &payload = *reading.payload;
        try
        {
            onchain = m_deps.ledger.call(kProxy, "getWineRecord", json{{"wine_id", payload.wine_id}});
        }
        catch (const Error &e)
        {
            return attack(layer, AttackClass::Modification, std::string("wine id not found on-chain: ") + e.what());
        }
        if (hash_from_json(onchain.at("tag_hash")) != crypto::hashed_identifier(ByteView(reading.uid)))
            return attack(layer, AttackClass::Cloning, "tag uid hash differs from the registered tag");
        const auto writes = onchain.at("write_count").get<std::uint64_t>();
        const auto reads = onchain.at("read_count").get<std::uint64_t>();
        if (reading.write_counter != writes || payload.write_counter != writes)
            return attack(layer, AttackClass::Reapplication, "write counter differs from on-chain " + std::to_string(writes));
        if (reading.read_counter != reads + 1)
            return attack(layer, AttackClass::Reapplication, "read counter differs from on-chain " + std::to_string(reads));
        const bool signer_ok =
            m_deps.ledger.call(kProxy, "validateSignature", sig_payload(payload.wine_id, payload.signature))
                .at("result")
                .get<bool>();
        if (!signer_ok)
            return attack(layer, AttackClass::Modification, "signature does not recover the custodian address");
        return pass(layer);
    }

    LayerOutcome Service::check_content(const WineRecord &db, const json &onchain)
    {
        constexpr auto layer = ValidationLayer::ContentStore;
        const std::string latest = onchain.at("data_hash").get<std::string>();
        Bytes stored;
        try
        {
            stored = m_deps.store.get(m_identity.store_node, store::ContentId::parse(latest));
        }
        catch (const Error &e)
        {
            return attack(layer, AttackClass::Modification, "subset " + latest + " unavailable: " + e.what());
        }
        const std::string expected = records::derive_subset(db);
        if (std::string(stored.begin(), stored.end()) != expected)
            return attack(layer, AttackClass::Modification, "stored subset differs from the database record");
        return pass(layer);
    }

    ValidationResult Service::fail(ValidationResult result, const std::optional<std::string> &wine_id)
    {
        const auto &last = result.layers.back();
        if (wine_id)
            m_deps.db.log_unsuccessful_validation(
                *wine_id, records::ValidationFailure{*last.attack, last.layer, m_deps.ledger.now(), last.details});
        return result;
    }

    ValidationResult Service::validate_record_flow(NfcTag &tag)
    {
        std::lock_guard lock(m_serial);
        ValidationResult result;

        std::optional<WineRecord> record = m_deps.db.find_by_uid(tag.uid());
        TagReading reading;
        try
        {
            reading = tag.read(record ? record->tag.password : std::nullopt);
        }
        catch (const Error &e)
        {
            result.wine_id = record ? record->wine_id : std::string();
            result.layers.push_back(attack(ValidationLayer::OffChainDb, AttackClass::Modification,
                                           std::string("tag unreadable: ") + e.what()));
            return fail(std::move(result), record ? std::optional(record->wine_id) : std::nullopt);
        }
        if (!record && reading.payload)
            record = m_deps.db.find(reading.payload->wine_id);
        if (!record)
        {
            result.layers.push_back(
                attack(ValidationLayer::OffChainDb, AttackClass::Modification, "no wine record matches this tag"));
            return fail(std::move(result), std::nullopt);
        }
        result.wine_id = record->wine_id;

        result.layers.push_back(check_database(*record, reading));
        if (!result.layers.back().passed())
            return fail(std::move(result), record->wine_id);

        json onchain;
        result.layers.push_back(check_chain(reading, onchain));
        if (!result.layers.back().passed())
            return fail(std::move(result), record->wine_id);

        result.layers.push_back(check_content(*record, onchain));
        if (!result.layers.back().passed())
            return fail(std::move(result), record->wine_id);

        const auto updated = at_stage("record_read", [&] {
            auto r = m_deps.db.mutate(record->wine_id, [](WineRecord &w) { ++w.read_count; });
            transact_or_throw("record_read", kProxy, "recordRead",
                              json{{"wine_id", record->wine_id},
                                   {"expected_read_count", onchain.at("read_count").get<std::uint64_t>()}});
            return r;
        });

        Session session;
        session.token = m_identity.member_id + "-" + std::to_string(++m_session_counter);
        if (m_session_timeout > 0)
            session.expires_at = m_deps.ledger.now() + m_session_timeout;
        m_sessions[record->wine_id] = session;
        result.session = session.token;
        result.overview = overview(updated);
        return result;
    }

    json Service::overview(const WineRecord &record) const
    {
        json j{{"wine_id", record.wine_id},
               {"wine_status", records::to_string(record.wine_status)},
               {"pedigree_data", record.pedigree_data},
               {"custodian", record.custodian},
               {"write_count", record.write_count},
               {"read_count", record.read_count},
               {"content_id", record.content_id}};
        if (!record.transaction_data.empty())
        {
            j["tx_hash"] = record.transaction_data.back().tx_hash;
            j["block_number"] = record.transaction_data.back().block_number;
        }
        return j;
    }

    bool Service::has_session(const std::string &wine_id) const
    {
        auto it = m_sessions.find(wine_id);
        if (it == m_sessions.end())
            return false;
        return it->second.expires_at == 0 || m_deps.ledger.now() <= it->second.expires_at;
    }

    // Acceptance

    AppendReceipt Service::accept_record_flow(NfcTag &tag, const std::optional<crypto::KeyPair> &custodian,
                                              const std::string &custodian_name)
    {
        std::lock_guard lock(m_serial);
        const auto found = m_deps.db.find_by_uid(tag.uid());
        if (!found)
            throw FlowError("session", Errc::NotFound, "no wine record is bound to tag " + to_hex(tag.uid()));
        const WineRecord &record = *found;
        if (record.wine_status == WineStatus::Flagged)
            throw FlowError("session", Errc::Rejected, record.wine_id + " is flagged");
        if (!has_session(record.wine_id))
            throw FlowError("session", Errc::Sequencing, record.wine_id + " has no fresh validation in this session");

        const crypto::KeyPair &signer = custodian ? *custodian : m_key;
        const std::uint64_t next_count = record.write_count + 1;
        const bool purchase = m_identity.consumer_instance();

        WineRecord next = record;
        at_stage("tag_write", [&] {
            const auto sig = crypto::sign_tag_payload(record.wine_id, tag.uid(), record.tag.device_id, signer);
            tag.write(records::TagPayload{record.wine_id, sig, next_count}, record.tag.password);
            next.tag.signature = sig;
        });
        next.write_count = next_count;
        next.custodian = signer.address();
        next.wine_status = purchase ? WineStatus::Sold : WineStatus::Accepted;
        next.supply_chain_data.push_back({custodian_name.empty() ? m_identity.member_id : custodian_name,
                                          signer.address(), purchase ? "purchased" : "accepted",
                                          m_deps.ledger.now(), next_count});

        const store::ContentId cid = at_stage("content_add", [&] {
            const std::string subset = records::derive_subset(next);
            auto id = m_deps.store.add(m_identity.store_node, as_bytes(subset));
            m_deps.store.pin(m_identity.store_node, id);
            return id;
        });

        const json append{
            {"wine_id", record.wine_id},
            {"data_hash", cid.str()},
            {"pub_addr", signer.address()},
            {"tag_hash", hash_to_json(crypto::hashed_identifier(ByteView(tag.uid())))},
            {"device_hash", hash_to_json(crypto::hashed_identifier(std::string_view(record.tag.device_id)))},
            {"expected_write_count", record.write_count}};
        const auto receipt = transact_or_throw("chain_append", kProxy, "appendWineRecord", append);

        next.content_id = cid.str();
        next.transaction_data.push_back({to_hex(receipt.tx_hash, true), receipt.block_number, address(),
                                         m_deps.ledger.now(), "appendWineRecord"});
        at_stage("record_update", [&] { m_deps.db.mutate(record.wine_id, [&](WineRecord &r) { r = next; }); });
        m_sessions.erase(record.wine_id);

        return AppendReceipt{record.wine_id, cid.str(), receipt.tx_hash, receipt.block_number, next_count,
                             next.wine_status};
    }

    // Administration

    ledger::Receipt Service::upgrade(std::string_view version)
    {
        std::lock_guard lock(m_serial);
        require_admin();
        return transact_or_throw("upgrade", kProxy, "upgradeTo", json{{"version", version}});
    }

    ledger::Receipt Service::set_consensus_level(std::optional<std::uint64_t> level)
    {
        std::lock_guard lock(m_serial);
        require_admin();
        const json payload{{"level", level ? json(*level) : json(nullptr)}};
        return transact_or_throw("consensus_level", kRegistry, "setConsensusLevel", payload);
    }

    // Endpoint surface

    Response Service::dispatch(std::string_view endpoint, const json &payload)
    {
        try
        {
            return route(endpoint, payload);
        }
        catch (const FlowError &e)
        {
            return {status_for(e.code()),
                    json{{"status", "error"}, {"error", to_string(e.code())}, {"stage", e.stage()}, {"message", e.what()}}};
        }
        catch (const Error &e)
        {
            return {status_for(e.code()), json{{"status", "error"}, {"error", to_string(e.code())}, {"message", e.what()}}};
        }
        catch (const json::exception &e)
        {
            return {400, json{{"status", "error"}, {"error", "decode"}, {"message", e.what()}}};
        }
    }

    Response Service::route(std::string_view endpoint, const json &payload)
    {
        auto ok = [](json body) {
            body["status"] = "ok";
            return Response{200, std::move(body)};
        };

        if (endpoint == "/peer/validate")
            return ok(json{{"result", peer_validate(payload.at("address").get<crypto::Address>())}});
        if (endpoint == "/peer/get")
            return ok(json{{"peers", peers()}});
        if (endpoint == "/peer/propose-add" || endpoint == "/peer/propose-remove")
        {
            const bool add = endpoint == "/peer/propose-add";
            return ok(json{{"voted", handle_propose(payload.at("candidate").get<PeerEntry>(), add)}});
        }
        if (endpoint == "/record/create")
        {
            RecordDraft draft{payload.at("wine_id").get<std::string>(), payload.value("pedigree", json::object())};
            auto &tag = m_deps.tags.at(uid_of(payload));
            return ok(create_record_flow(draft, tag, payload.at("device_id").get<std::string>()).to_json());
        }
        if (endpoint == "/record/validate")
            return ok(validate_record_flow(m_deps.tags.at(uid_of(payload))).to_json());
        if (endpoint == "/record/append")
        {
            auto &tag = m_deps.tags.at(uid_of(payload));
            std::optional<crypto::KeyPair> key;
            std::string name;
            if (payload.contains("custodian"))
            {
                name = payload.at("custodian").get<std::string>();
                if (m_key_resolver)
                    key = m_key_resolver(name);
                if (!key)
                    throw Error(Errc::NotFound, "no signing key for custodian " + name);
            }
            return ok(accept_record_flow(tag, key, name).to_json());
        }
        if (endpoint == "/admin/upgrade")
            return ok(upgrade(payload.at("version").get<std::string>()).to_json());
        if (endpoint == "/admin/consensus-level")
        {
            const auto &level = payload.at("level");
            return ok(set_consensus_level(level.is_null() ? std::nullopt
                                                          : std::optional(level.get<std::uint64_t>()))
                          .to_json());
        }
        if (endpoint == "/admin/onboard")
            return ok(onboard_node(payload.at("candidate").get<PeerEntry>()).to_json());
        if (endpoint == "/admin/remove")
            return ok(remove_node(payload.at("address").get<crypto::Address>()).to_json());
        if (endpoint == "/validator/propose")
        {
            if (m_identity.role.node_type != NodeType::Validator)
                return ok(json{{"proposed", false}});
            m_deps.ledger.propose_validator(payload.at("candidate").get<crypto::Address>(),
                                            payload.at("add").get<bool>());
            return ok(json{{"proposed", true}});
        }
        throw Error(Errc::Routing, "no endpoint " + std::string(endpoint));
    }
} // namespace dnas::protocol
