#include "sim_fixture.hpp"
#include "test_support.hpp"

#include "dnas/crypto/tag_payload.hpp"

using namespace dnas;
using dnas::test_support::bootstrapped;
using dnas::test_support::consortium_config;
using dnas::test_support::create_wine;
using dnas::test_support::error_code_of;
using dnas::test_support::purchase;
using dnas::test_support::ship;
using nlohmann::json;
using protocol::AttackClass;
using protocol::ValidationLayer;

namespace
{
    struct Counters
    {
        std::uint64_t tag_writes, db_writes, chain_writes;
        std::uint64_t tag_reads, db_reads, chain_reads;

        bool consistent() const
        {
            return tag_writes == db_writes && db_writes == chain_writes && tag_reads == db_reads &&
                   db_reads == chain_reads;
        }
    };

    Counters counters(sim::Simulator &s, const std::string &wine_id)
    {
        const auto &tag = s.tag(wine_id);
        const auto rec = s.db().get(wine_id);
        const json onchain = s.reference_chain().call(s.admin().address(), "proxy", "getWineRecord",
                                                      json{{"wine_id", wine_id}});
        return {tag.write_counter(), rec.write_count, onchain.at("write_count").get<std::uint64_t>(),
                tag.read_counter(), rec.read_count, onchain.at("read_count").get<std::uint64_t>()};
    }

    contract::PeerEntry entry_for(sim::SimNode &n)
    {
        return {n.address(), n.spec().peer_role, n.id(), n.spec().node_type, 0};
    }

    // Only the listed members approve registry changes.
    void approvers(sim::Simulator &s, const std::set<std::string> &yes)
    {
        for (const auto &id : s.node_ids())
        {
            const bool approve = yes.count(id) != 0;
            s.node(id).service().set_vote_policy([approve](const crypto::Address &, bool) { return approve; });
        }
    }

    records::TagPassword password_of(sim::Simulator &s, const std::string &wine_id)
    {
        return *s.db().get(wine_id).tag.password;
    }
} // namespace

TEST(Onboarding, BootstrapAdmitsFiveWithoutVotes)
{
    auto s = bootstrapped(consortium_config(5));
    auto &admin = s->admin().service();
    EXPECT_EQ(admin.peers().size(), 5u);
    EXPECT_EQ(s->reference_chain().validators().size(), 5u);
    for (const auto &id : s->node_ids())
    {
        EXPECT_TRUE(admin.peer_validate(s->node(id).address())) << id;
        EXPECT_TRUE(s->store().is_member(id)) << id;
    }
    EXPECT_FALSE(admin.peer_validate(crypto::generate_keypair().address()));
    EXPECT_EQ(admin.validator_requests_sent(), 0u);
}

TEST(Onboarding, SixthNodeWithThreeOfFiveVotesIsAdmittedThenBecomesValidator)
{
    auto s = bootstrapped(consortium_config(6));
    auto &m6 = s->provision(consortium_config(6).members.back());
    approvers(*s, {"m1", "m2", "m3"});

    const auto result = s->admin().service().onboard_node(entry_for(m6));
    EXPECT_EQ(result.state, protocol::MembershipState::Admitted);
    EXPECT_FALSE(result.bootstrap);
    EXPECT_EQ(result.requests, 5u);
    EXPECT_TRUE(s->admin().service().peer_validate(m6.address()));
    EXPECT_EQ(s->admin().service().validator_requests_sent(), 5u);

    ASSERT_TRUE(s->run_until([&] { return s->reference_chain().validators().contains(m6.address()); }, 30));
    EXPECT_EQ(s->reference_chain().validators().size(), 6u);
    EXPECT_TRUE(s->store().is_member("m6"));
    s->await_propagation(s->reference_chain().height());
    for (const auto &id : s->node_ids())
        EXPECT_TRUE(s->node(id).chain().validators().contains(m6.address())) << id;
}

TEST(Onboarding, TwoOfFiveVotesLeavesCandidatePending)
{
    auto s = bootstrapped(consortium_config(6));
    auto &m6 = s->provision(consortium_config(6).members.back());
    approvers(*s, {"m1", "m2"});

    const auto result = s->admin().service().onboard_node(entry_for(m6));
    EXPECT_EQ(result.state, protocol::MembershipState::Pending);
    EXPECT_FALSE(s->admin().service().peer_validate(m6.address()));
    EXPECT_EQ(s->admin().service().peers().size(), 5u);
    EXPECT_EQ(s->admin().service().validator_requests_sent(), 0u);
    EXPECT_FALSE(s->reference_chain().validators().contains(m6.address()));
}

TEST(Onboarding, DuplicateCandidateAndNonAdminAreRejected)
{
    auto s = bootstrapped(consortium_config(5));
    EXPECT_EQ(error_code_of([&] { s->admin().service().onboard_node(entry_for(s->node("m3"))); }), Errc::Duplicate);
    EXPECT_EQ(error_code_of([&] { s->node("m2").service().onboard_node(entry_for(s->node("m3"))); }),
              Errc::Authorization);
}

TEST(Onboarding, DuplicateEventDeliveryDoesNotRepeatProposals)
{
    auto s = bootstrapped(consortium_config(6));
    auto &m6 = s->provision(consortium_config(6).members.back());
    approvers(*s, {"m1", "m2", "m3", "m4", "m5"});
    ASSERT_EQ(s->admin().service().onboard_node(entry_for(m6)).state, protocol::MembershipState::Admitted);
    auto &admin = s->admin().service();
    const std::size_t sent = admin.validator_requests_sent();
    ASSERT_EQ(sent, 5u);

    const auto &chain = s->reference_chain();
    for (std::uint64_t h = 1; h <= chain.height(); ++h)
        admin.handle_block(chain.block(h), chain.receipts(h));
    EXPECT_EQ(admin.validator_requests_sent(), sent);
}

TEST(Onboarding, RemovalRoundDropsRegistryEntryAndValidator)
{
    auto s = bootstrapped(consortium_config(5));
    approvers(*s, {"m1", "m2", "m3", "m4"});
    const auto victim = s->node("m5").address();
    const auto result = s->admin().service().remove_node(victim);
    EXPECT_EQ(result.state, protocol::MembershipState::Admitted);
    EXPECT_FALSE(s->admin().service().peer_validate(victim));
    EXPECT_FALSE(s->store().is_member("m5"));
    ASSERT_TRUE(s->run_until([&] { return !s->reference_chain().validators().contains(victim); }, 30));
    EXPECT_EQ(s->reference_chain().validators().size(), 4u);
}

TEST(Creation, HappyPathProducesReceiptAndConsistentRecord)
{
    auto s = bootstrapped(consortium_config(5));
    const auto receipt = create_wine(*s, "m2", "W1");
    EXPECT_EQ(receipt.content_id.size(), store::kContentIdChars);
    EXPECT_GT(receipt.block_number, 0u);

    const auto rec = s->db().get("W1");
    EXPECT_EQ(rec.wine_status, records::WineStatus::Created);
    EXPECT_EQ(rec.content_id, receipt.content_id);
    ASSERT_EQ(rec.transaction_data.size(), 1u);
    EXPECT_EQ(rec.transaction_data[0].tx_hash, to_hex(receipt.tx_hash, true));
    EXPECT_EQ(rec.transaction_data[0].block_number, receipt.block_number);
    EXPECT_TRUE(s->tag("W1").protection_enabled());
    EXPECT_EQ(store::ContentId::of(records::derive_subset(rec)).str(), receipt.content_id);

    const auto c = counters(*s, "W1");
    EXPECT_TRUE(c.consistent());
    EXPECT_EQ(c.chain_writes, 1u);
    EXPECT_EQ(c.chain_reads, 0u);

    const auto tx = s->reference_chain().receipt(receipt.tx_hash);
    ASSERT_EQ(tx.events.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<contract::WineRecordCreated>(tx.events[0].kind));
}

TEST(Creation, ParticipantAndNonMemberStopAtPeerValidation)
{
    auto s = bootstrapped(consortium_config(6));
    auto &tag = s->issue_tag("W1");
    try
    {
        s->node("m3").service().create_record_flow({"W1", json::object()}, tag, "d");
        FAIL() << "participant created a record";
    }
    catch (const protocol::FlowError &e)
    {
        EXPECT_EQ(e.stage(), "peer_validate");
        EXPECT_EQ(e.code(), Errc::Role);
    }

    auto spec = consortium_config(6).members.back();
    spec.peer_role = contract::PeerRole::Winemaker;
    auto &outsider = s->provision(spec);
    try
    {
        outsider.service().create_record_flow({"W1", json::object()}, tag, "d");
        FAIL() << "non-member created a record";
    }
    catch (const protocol::FlowError &e)
    {
        EXPECT_EQ(e.stage(), "peer_validate");
        EXPECT_EQ(e.code(), Errc::Membership);
    }
    EXPECT_FALSE(s->db().find("W1").has_value());
    EXPECT_EQ(tag.write_counter(), 0u);
}

TEST(Creation, OnChainDuplicateFailsAtChainStageAndMarksError)
{
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "W1");
    s->db().remove(contract::PeerRole::Winemaker, "W1");
    auto &second = s->issue_tag("W1-reissue");
    try
    {
        s->node("m2").service().create_record_flow({"W1", json::object()}, second, "device-2");
        FAIL() << "duplicate wine id accepted on-chain";
    }
    catch (const protocol::FlowError &e)
    {
        EXPECT_EQ(e.stage(), "chain_create");
        EXPECT_EQ(e.code(), Errc::ContractReverted);
    }
    const auto rec = s->db().get("W1");
    EXPECT_EQ(rec.wine_status, records::WineStatus::Error);
    EXPECT_TRUE(rec.transaction_data.empty());
    EXPECT_EQ(second.write_counter(), 1u);
}

TEST(Validation, CleanTagPassesAllLayersAndBumpsEveryReadCounter)
{
    auto s = bootstrapped(consortium_config(5));
    const auto created = create_wine(*s, "m2", "W1");
    const auto v = s->node("m3").service().validate_record_flow(s->tag("W1"));
    ASSERT_TRUE(v.passed()) << v.to_json().dump();
    ASSERT_EQ(v.layers.size(), 3u);
    EXPECT_EQ(v.layers[0].layer, ValidationLayer::OffChainDb);
    EXPECT_EQ(v.layers[1].layer, ValidationLayer::OnChain);
    EXPECT_EQ(v.layers[2].layer, ValidationLayer::ContentStore);
    EXPECT_FALSE(v.session.empty());
    EXPECT_EQ(v.overview.at("tx_hash"), to_hex(created.tx_hash, true));
    EXPECT_EQ(v.overview.at("block_number"), created.block_number);

    const auto c = counters(*s, "W1");
    EXPECT_TRUE(c.consistent());
    EXPECT_EQ(c.tag_reads, 1u);
    EXPECT_TRUE(s->notifications().empty());
}

namespace
{
    enum class Corruption
    {
        WineId,
        Signature,
        Uid,
        WriteCounter,
        ReadCounter,
        SubsetBytes,
    };

    struct AttackCase
    {
        Corruption corruption;
        AttackClass expected;
        ValidationLayer layer;
    };

    // Returns the tag to present to the scanner.
    records::NfcTag &corrupt(sim::Simulator &s, const std::string &wine_id, Corruption c)
    {
        auto &tag = s.tag(wine_id);
        const auto pw = password_of(s, wine_id);
        auto payload = records::TagPayload::decode(tag.memory());
        switch (c)
        {
        case Corruption::WineId:
            payload.wine_id += "-fake";
            tag.tamper_payload(payload);
            return tag;
        case Corruption::Signature:
            payload.signature =
                crypto::sign_tag_payload(wine_id, tag.uid(), "device-" + wine_id, crypto::generate_keypair());
            tag.tamper_payload(payload);
            return tag;
        case Corruption::Uid:
        {
            auto clone = tag.clone_onto(s.new_tag_uid());
            auto &stored = s.tags().add(std::move(clone));
            s.alias_tag(wine_id + "-clone", stored.uid());
            return stored;
        }
        case Corruption::WriteCounter:
            tag.bump_write_counter();
            return tag;
        case Corruption::ReadCounter:
            tag.read(pw);
            return tag;
        case Corruption::SubsetBytes:
        {
            const auto cid = store::ContentId::parse(s.db().get(wine_id).content_id);
            for (const auto &holder : s.store().holders(cid))
                s.store().tamper(holder, cid, Bytes{'{', '}'});
            return tag;
        }
        }
        return tag;
    }
} // namespace

TEST(Validation, SingleFieldCorruptionMatrix)
{
    const std::vector<AttackCase> cases{
        {Corruption::WineId, AttackClass::Modification, ValidationLayer::OffChainDb},
        {Corruption::Signature, AttackClass::Modification, ValidationLayer::OffChainDb},
        {Corruption::Uid, AttackClass::Cloning, ValidationLayer::OffChainDb},
        {Corruption::WriteCounter, AttackClass::Reapplication, ValidationLayer::OffChainDb},
        {Corruption::ReadCounter, AttackClass::Reapplication, ValidationLayer::OffChainDb},
        {Corruption::SubsetBytes, AttackClass::Modification, ValidationLayer::ContentStore},
    };
    auto s = bootstrapped(consortium_config(5));
    for (std::size_t i = 0; i < cases.size(); ++i)
    {
        const std::string wine = "W" + std::to_string(i + 1);
        create_wine(*s, "m2", wine);
        ship(*s, "m3", wine);
        ASSERT_TRUE(counters(*s, wine).consistent()) << wine;
    }
    for (std::size_t i = 0; i < cases.size(); ++i)
    {
        const std::string wine = "W" + std::to_string(i + 1);
        auto &presented = corrupt(*s, wine, cases[i].corruption);
        const auto v = s->node("m4").service().validate_record_flow(presented);
        ASSERT_FALSE(v.passed()) << wine;
        EXPECT_EQ(v.attack(), cases[i].expected) << wine;
        EXPECT_EQ(v.failed_layer(), cases[i].layer) << wine;
        EXPECT_EQ(v.wine_id, wine);
        // Nothing runs past the failing layer.
        EXPECT_EQ(v.layers.size(), static_cast<std::size_t>(cases[i].layer) + 1) << wine;
        const auto rec = s->db().get(wine);
        EXPECT_EQ(rec.wine_status, records::WineStatus::Flagged);
        ASSERT_EQ(rec.unsuccessful_validation_data.size(), 1u);
        EXPECT_EQ(rec.unsuccessful_validation_data[0].attack_class, cases[i].expected);
    }
    EXPECT_EQ(s->notifications().size(), cases.size());
}

TEST(Validation, SimultaneousMismatchesFollowPrecedence)
{
    // uid beats counters beats identity fields. The forged wine id names
    // another registered bottle so a foreign uid still resolves to a record.
    struct Combo
    {
        bool uid, counter, wine;
        AttackClass expected;
    };
    const std::vector<Combo> combos{
        {true, false, false, AttackClass::Cloning},      {false, true, false, AttackClass::Reapplication},
        {false, false, true, AttackClass::Modification}, {true, true, false, AttackClass::Cloning},
        {true, false, true, AttackClass::Cloning},       {false, true, true, AttackClass::Reapplication},
        {true, true, true, AttackClass::Cloning},
    };
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "decoy");
    for (std::size_t i = 0; i < combos.size(); ++i)
        create_wine(*s, "m2", "P" + std::to_string(i));
    for (std::size_t i = 0; i < combos.size(); ++i)
    {
        const std::string wine = "P" + std::to_string(i);
        auto *tag = &s->tag(wine);
        if (combos[i].uid)
            tag = &s->tags().add(tag->clone_onto(s->new_tag_uid()));
        auto payload = records::TagPayload::decode(tag->memory());
        if (combos[i].wine)
            payload.wine_id = "decoy";
        tag->tamper_payload(payload);
        if (combos[i].counter)
            tag->bump_write_counter();
        const auto v = s->node("m3").service().validate_record_flow(*tag);
        ASSERT_FALSE(v.passed()) << wine;
        EXPECT_EQ(v.attack(), combos[i].expected) << wine;
        EXPECT_EQ(v.failed_layer(), ValidationLayer::OffChainDb) << wine;
    }
}

TEST(Validation, ChainLayerCatchesWhatAConsistentlyForgedDatabaseHides)
{
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "W1");
    create_wine(*s, "m2", "W2");

    // Forged signature written to both tag and database: only the chain can tell.
    {
        auto &tag = s->tag("W1");
        auto payload = records::TagPayload::decode(tag.memory());
        payload.signature = crypto::sign_tag_payload("W1", tag.uid(), "device-W1", crypto::generate_keypair());
        tag.tamper_payload(payload);
        s->db().mutate("W1", [&](records::WineRecord &r) { r.tag.signature = payload.signature; });
        const auto v = s->node("m3").service().validate_record_flow(tag);
        EXPECT_EQ(v.attack(), AttackClass::Modification);
        EXPECT_EQ(v.failed_layer(), ValidationLayer::OnChain);
        EXPECT_EQ(v.layers.size(), 2u);
    }
    // Write counter advanced on tag and database but never appended on-chain.
    {
        auto &tag = s->tag("W2");
        auto payload = records::TagPayload::decode(tag.memory());
        payload.write_counter = 2;
        tag.tamper_payload(payload);
        tag.bump_write_counter();
        s->db().mutate("W2", [](records::WineRecord &r) { r.write_count = 2; });
        const auto v = s->node("m3").service().validate_record_flow(tag);
        EXPECT_EQ(v.attack(), AttackClass::Reapplication);
        EXPECT_EQ(v.failed_layer(), ValidationLayer::OnChain);
    }
}

TEST(Validation, MissingSubsetIsAnIntegrityFailureAtTheStoreLayer)
{
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "W1");
    s->db().mutate("W1", [](records::WineRecord &r) { r.pedigree_data["grape"] = "merlot"; });
    const auto v = s->node("m3").service().validate_record_flow(s->tag("W1"));
    EXPECT_EQ(v.attack(), AttackClass::Modification);
    EXPECT_EQ(v.failed_layer(), ValidationLayer::ContentStore);
    EXPECT_EQ(v.layers.size(), 3u);
}

TEST(Validation, UnknownTagAndPayloadIsModification)
{
    auto s = bootstrapped(consortium_config(5));
    auto &blank = s->issue_tag("stray");
    const auto v = s->node("m3").service().validate_record_flow(blank);
    EXPECT_EQ(v.attack(), AttackClass::Modification);
    EXPECT_TRUE(v.wine_id.empty());
    EXPECT_TRUE(s->notifications().empty());
}

TEST(Acceptance, ParticipantAcceptRotatesCustodyAndCountsWrite)
{
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "W1");
    const auto before = s->reference_chain().call(s->admin().address(), "proxy", "getWineRecord", json{{"wine_id", "W1"}});
    const auto receipt = ship(*s, "m3", "W1");
    EXPECT_EQ(receipt.write_count, 2u);
    EXPECT_EQ(receipt.status, records::WineStatus::Accepted);

    const auto after = s->reference_chain().call(s->admin().address(), "proxy", "getWineRecord", json{{"wine_id", "W1"}});
    EXPECT_EQ(after.at("write_count"), 2);
    EXPECT_NE(after.at("pub_addr"), before.at("pub_addr"));
    EXPECT_EQ(after.at("pub_addr").get<crypto::Address>(), s->node("m3").address());
    EXPECT_EQ(after.at("data_hash"), receipt.content_id);

    const auto rec = s->db().get("W1");
    EXPECT_EQ(rec.wine_status, records::WineStatus::Accepted);
    EXPECT_EQ(rec.custodian, s->node("m3").address());
    EXPECT_EQ(rec.transaction_data.size(), 2u);
    EXPECT_EQ(rec.supply_chain_data.size(), 2u);
    EXPECT_EQ(rec.supply_chain_data.back().member, "m3");
    EXPECT_TRUE(counters(*s, "W1").consistent());

    // The new custodian's signature is what the chain now checks.
    EXPECT_TRUE(s->node("m4").service().validate_record_flow(s->tag("W1")).passed());
}

TEST(Acceptance, ConsumerPurchaseSellsAndStaysTransferable)
{
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "W1");
    ship(*s, "m3", "W1");
    const auto sold = purchase(*s, "alice", "W1");
    EXPECT_EQ(sold.status, records::WineStatus::Sold);
    EXPECT_EQ(s->db().get("W1").custodian, s->consumer_key("alice").address());
    EXPECT_EQ(s->db().get("W1").supply_chain_data.back().action, "purchased");

    const auto resold = purchase(*s, "bob", "W1");
    EXPECT_EQ(resold.write_count, 4u);
    EXPECT_EQ(s->db().get("W1").custodian, s->consumer_key("bob").address());
    EXPECT_TRUE(counters(*s, "W1").consistent());
}

TEST(Acceptance, RequiresFreshValidationAndUnflaggedRecord)
{
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "W1");
    create_wine(*s, "m2", "W2");
    auto &m3 = s->node("m3").service();
    auto code_of_accept = [&](const std::string &wine) {
        try
        {
            m3.accept_record_flow(s->tag(wine));
        }
        catch (const protocol::FlowError &e)
        {
            return e.code();
        }
        return Errc::InvalidArgument;
    };

    EXPECT_EQ(code_of_accept("W1"), Errc::Sequencing);
    ASSERT_TRUE(m3.validate_record_flow(s->tag("W1")).passed());
    m3.accept_record_flow(s->tag("W1"));
    // A session covers one acceptance.
    EXPECT_EQ(code_of_accept("W1"), Errc::Sequencing);

    s->tag("W2").bump_write_counter();
    EXPECT_FALSE(m3.validate_record_flow(s->tag("W2")).passed());
    EXPECT_EQ(code_of_accept("W2"), Errc::Rejected);
    EXPECT_EQ(s->db().get("W2").transaction_data.size(), 1u);
}

TEST(Acceptance, SessionsExpire)
{
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "W1");
    auto &m3 = s->node("m3").service();
    m3.set_session_timeout(3);
    ASSERT_TRUE(m3.validate_record_flow(s->tag("W1")).passed());
    EXPECT_TRUE(m3.has_session("W1"));
    s->run_until_time(s->now() + 5);
    EXPECT_FALSE(m3.has_session("W1"));
    EXPECT_EQ(error_code_of([&] { m3.accept_record_flow(s->tag("W1")); }), Errc::Sequencing);
}

TEST(Dispatch, RoutesAndMapsErrors)
{
    auto s = bootstrapped(consortium_config(5));
    auto &m3 = s->node("m3").service();

    auto r = m3.dispatch("/peer/validate", json{{"address", s->node("m2").address()}});
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body.at("result"), true);

    EXPECT_EQ(m3.dispatch("/peer/get", json::object()).body.at("peers").size(), 5u);

    auto &tag = s->issue_tag("W1");
    r = m3.dispatch("/record/create", json{{"wine_id", "W1"}, {"tag_uid", to_hex(tag.uid())}, {"device_id", "d"}});
    EXPECT_EQ(r.status, 403);
    EXPECT_EQ(r.body.at("error"), "role");
    EXPECT_EQ(r.body.at("stage"), "peer_validate");

    r = s->node("m2").service().dispatch("/record/create",
                                         json{{"wine_id", "W1"}, {"tag_uid", to_hex(tag.uid())}, {"device_id", "d"}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body.at("content_id").get<std::string>().size(), 46u);

    r = m3.dispatch("/record/validate", json{{"tag_uid", to_hex(tag.uid())}});
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body.at("passed"), true);
    r = m3.dispatch("/record/append", json{{"tag_uid", to_hex(tag.uid())}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body.at("status"), "ok");
    EXPECT_EQ(r.body.at("write_count"), 2);

    EXPECT_EQ(m3.dispatch("/nowhere", json::object()).status, 404);
    EXPECT_EQ(m3.dispatch("/nowhere", json::object()).body.at("error"), "routing");
    EXPECT_EQ(m3.dispatch("/peer/validate", json{{"addr", 1}}).status, 400);
    EXPECT_EQ(m3.dispatch("/record/validate", json{{"tag_uid", "zz"}}).status, 400);
    EXPECT_EQ(m3.dispatch("/admin/upgrade", json{{"version", "WineDataContract/v2"}}).status, 403);

    r = s->admin().service().dispatch("/admin/consensus-level", json{{"level", 2}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    const auto level = s->reference_chain().call(s->admin().address(), "registry", "getConsensusLevel", json::object());
    EXPECT_EQ(level.at("consensus_level"), 2);
}

TEST(Upgrade, RecordsSurviveAndV2MethodsAppear)
{
    auto s = bootstrapped(consortium_config(5));
    create_wine(*s, "m2", "W1");
    auto &admin = s->admin().service();
    const auto r = admin.upgrade(contract::kVersionV2);
    ASSERT_TRUE(r.success);
    ASSERT_TRUE(s->node("m3").service().validate_record_flow(s->tag("W1")).passed());
    s->node("m3").service().accept_record_flow(s->tag("W1"));
    const auto history =
        s->reference_chain().call(s->admin().address(), "proxy", "getWineHistory", json{{"wine_id", "W1"}});
    EXPECT_EQ(history.at("iterations").size(), 2u);
    EXPECT_TRUE(counters(*s, "W1").consistent());
    EXPECT_EQ(error_code_of([&] { s->node("m2").service().upgrade(contract::kVersionV2); }), Errc::Authorization);
}
