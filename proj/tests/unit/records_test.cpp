#include "dnas/crypto/tag_payload.hpp"
#include "dnas/records/record_db.hpp"
#include "dnas/store/content_id.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace dnas;
using namespace dnas::records;
using contract::PeerRole;
using dnas::test_support::error_code_of;
using nlohmann::json;

namespace
{
    crypto::KeyPair key(std::uint8_t n)
    {
        Hash32 seed{};
        seed[31] = n;
        return crypto::generate_keypair(seed);
    }

    TagPayload payload_for(const std::string &wine, std::uint64_t counter = 1)
    {
        const TagUid uid{4, 1, 2, 3, 4, 5, 6};
        return TagPayload{wine, crypto::sign_tag_payload(wine, uid, "DEV", key(1)), counter};
    }

    WineRecord record(const std::string &wine, std::uint8_t uid_tail = 1)
    {
        WineRecord r;
        r.wine_id = wine;
        r.owner_member = "winery";
        r.pedigree_data = json{{"vintage", 2019}, {"varietal", "Shiraz"}, {"region", "Barossa"}};
        r.tag.uid = TagUid{4, 0, 0, 0, 0, 0, uid_tail};
        r.tag.device_id = "DEV";
        r.write_count = 1;
        r.custodian = key(1).address();
        r.supply_chain_data.push_back(SupplyChainEntry{"winery", key(1).address(), "created", 10, 1});
        return r;
    }
} // namespace

TEST(NfcTag, WriteThenRead)
{
    NfcTag tag(TagUid{4, 9, 9, 9, 9, 9, 9});
    const auto p = payload_for("W1");
    tag.write(p);
    EXPECT_EQ(tag.write_counter(), 1u);
    const TagReading r = tag.read();
    ASSERT_TRUE(r.payload.has_value());
    EXPECT_EQ(*r.payload, p);
    EXPECT_EQ(r.uid, tag.uid());
    EXPECT_EQ(r.read_counter, 1u);
    tag.read();
    EXPECT_EQ(tag.read_counter(), 2u);
}

TEST(NfcTag, WriteCounterNeverDecreases)
{
    NfcTag tag(TagUid{});
    tag.write(payload_for("W1", 3));
    tag.write(payload_for("W1", 2));
    EXPECT_EQ(tag.write_counter(), 3u);
    EXPECT_EQ(tag.read().payload->write_counter, 2u);
}

TEST(NfcTag, ProtectionLocksReadsAndWrites)
{
    std::mt19937_64 rng(5);
    NfcTag tag(TagUid{});
    tag.write(payload_for("W1"));
    const TagPassword pw = tag.enable_protection(rng);
    EXPECT_EQ(error_code_of([&] { tag.enable_protection(rng); }), Errc::State);
    EXPECT_EQ(error_code_of([&] { tag.read(); }), Errc::Locked);
    TagPassword wrong = pw;
    wrong[0] ^= 1;
    EXPECT_EQ(error_code_of([&] { tag.read(wrong); }), Errc::Locked);
    EXPECT_EQ(tag.read_counter(), 0u);
    EXPECT_EQ(error_code_of([&] { tag.write(payload_for("W2", 2), wrong); }), Errc::Locked);
    EXPECT_EQ(tag.read(pw).payload->wine_id, "W1");
    tag.write(payload_for("W2", 2), pw);
    EXPECT_EQ(tag.read(pw).payload->wine_id, "W2");
}

TEST(NfcTag, CapacityIsEnforced)
{
    // format byte + length prefix + signature + counter leaves 810 bytes of wine id.
    const std::size_t overhead = 1 + 4 + 65 + 8;
    NfcTag tag(TagUid{});
    TagPayload p = payload_for("W");
    p.wine_id.assign(kTagMemorySize - overhead, 'x');
    EXPECT_EQ(p.encode().size(), kTagMemorySize);
    tag.write(p);
    const Bytes before = tag.memory();
    p.wine_id.push_back('x');
    EXPECT_EQ(error_code_of([&] { tag.write(p); }), Errc::Capacity);
    p.wine_id.assign(900, 'y');
    EXPECT_EQ(error_code_of([&] { tag.write(p); }), Errc::Capacity);
    EXPECT_EQ(tag.memory(), before);
}

TEST(NfcTag, PasswordsAreFourBytes)
{
    std::mt19937_64 rng(11);
    std::set<TagPassword> distinct;
    for (int i = 0; i < 1000; ++i)
    {
        NfcTag tag(random_uid(rng));
        const TagPassword pw = tag.enable_protection(rng);
        EXPECT_EQ(pw.size(), kTagPasswordSize);
        EXPECT_EQ(tag.uid()[0], 0x04);
        distinct.insert(pw);
    }
    EXPECT_GT(distinct.size(), 990u);
}

TEST(NfcTag, PayloadDecodeRejectsGarbage)
{
    EXPECT_EQ(error_code_of([] { TagPayload::decode(Bytes{1, 0, 0}); }), Errc::Decode);
    EXPECT_EQ(error_code_of([] { TagPayload::decode(Bytes{2, 0, 0, 0, 0}); }), Errc::Decode);
    Bytes extra = payload_for("W1").encode();
    extra.push_back(0);
    EXPECT_EQ(error_code_of([&] { TagPayload::decode(extra); }), Errc::Decode);
    NfcTag tag(TagUid{});
    tag.write(payload_for("W1"));
    tag.tamper_payload(payload_for("W2"));
    EXPECT_EQ(tag.read().payload->wine_id, "W2");
}

TEST(NfcTag, CloneCopiesPayloadNotIdentity)
{
    std::mt19937_64 rng(1);
    NfcTag original(TagUid{4, 1, 1, 1, 1, 1, 1});
    original.write(payload_for("W1", 2));
    original.enable_protection(rng);
    const NfcTag copy = original.clone_onto(TagUid{4, 2, 2, 2, 2, 2, 2});
    EXPECT_NE(copy.uid(), original.uid());
    EXPECT_EQ(copy.memory(), original.memory());
    EXPECT_FALSE(copy.protection_enabled());
    EXPECT_EQ(copy.write_counter(), 2u);
}

TEST(WineRecordSubset, DeterministicAndFieldComplete)
{
    WineRecord r = record("W1");
    r.supply_chain_data.push_back(SupplyChainEntry{"shipper", key(2).address(), "accepted", 20, 2});
    r.supply_chain_data.push_back(SupplyChainEntry{"retailer", key(3).address(), "accepted", 30, 3});
    r.write_count = 3;
    r.unsuccessful_validation_data.push_back(ValidationFailure{});
    r.transaction_data.push_back(TransactionEntry{"0xaa", 1, key(1).address(), 10, "createWineRecord"});

    const std::string a = derive_subset(r);
    EXPECT_EQ(a, derive_subset(r));
    const json j = json::parse(a);
    EXPECT_EQ(j.size(), 5u);
    EXPECT_EQ(j.at("subset_version"), 3);
    EXPECT_EQ(j.at("wine_status"), "created");
    ASSERT_EQ(j.at("supply_chain_data").size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(j.at("supply_chain_data")[i], to_json(r.supply_chain_data[i]));
    EXPECT_FALSE(j.contains("transaction_data"));
    EXPECT_FALSE(j.contains("unsuccessful_validation_data"));
    // Sorted keys, no whitespace.
    EXPECT_EQ(a.find(' '), std::string::npos);
    EXPECT_EQ(a.rfind("{\"pedigree_data\"", 0), 0u);

    // Excluded fields do not move the bytes; included ones do.
    r.transaction_data.push_back(TransactionEntry{"0xbb", 2, key(2).address(), 20, "appendWineRecord"});
    r.unsuccessful_validation_data.clear();
    EXPECT_EQ(derive_subset(r), a);
    r.pedigree_data["vintage"] = 2020;
    EXPECT_NE(store::ContentId::of(derive_subset(r)), store::ContentId::of(a));
}

TEST(RecordDb, CrudAndRoles)
{
    RecordDb db;
    db.create(PeerRole::Winemaker, record("W1"));
    EXPECT_EQ(db.get("W1").to_json(), record("W1").to_json());
    EXPECT_EQ(error_code_of([&] { db.create(PeerRole::Winemaker, record("W1", 2)); }), Errc::Duplicate);
    EXPECT_EQ(error_code_of([&] { db.create(PeerRole::Winemaker, record("W2", 1)); }), Errc::Duplicate);
    EXPECT_EQ(error_code_of([&] { db.create(PeerRole::Participant, record("W3", 3)); }), Errc::Authorization);
    EXPECT_EQ(error_code_of([&] { db.remove(PeerRole::Participant, "W1"); }), Errc::Authorization);
    EXPECT_EQ(error_code_of([&] { db.update(PeerRole::Participant, record("W1")); }), Errc::Authorization);
    EXPECT_EQ(error_code_of([&] { db.get("W9"); }), Errc::NotFound);
    EXPECT_EQ(error_code_of([&] { db.update(PeerRole::Winemaker, record("W9")); }), Errc::NotFound);
    EXPECT_EQ(db.find_by_uid(record("W1").tag.uid)->wine_id, "W1");

    db.remove(PeerRole::Winemaker, "W1");
    EXPECT_FALSE(db.find("W1"));
    EXPECT_FALSE(db.find_by_uid(record("W1").tag.uid));
}

TEST(RecordDb, TransactionHistoryIsAppendOnly)
{
    RecordDb db;
    WineRecord r = record("W1");
    r.transaction_data.push_back(TransactionEntry{"0xaa", 1, key(1).address(), 10, "createWineRecord"});
    db.create(PeerRole::Winemaker, r);

    r.transaction_data.push_back(TransactionEntry{"0xbb", 2, key(1).address(), 11, "appendWineRecord"});
    db.update(PeerRole::Winemaker, r);
    EXPECT_EQ(db.get("W1").transaction_data.size(), 2u);

    WineRecord truncated = r;
    truncated.transaction_data.pop_back();
    EXPECT_EQ(error_code_of([&] { db.update(PeerRole::Winemaker, truncated); }), Errc::InvalidArgument);
    WineRecord rewritten = r;
    rewritten.transaction_data[0].tx_hash = "0xcc";
    EXPECT_EQ(error_code_of([&] { db.update(PeerRole::Winemaker, rewritten); }), Errc::InvalidArgument);
    EXPECT_EQ(db.get("W1").transaction_data.size(), 2u);
}

TEST(RecordDb, FlaggingLogsNotifiesAndBlocksSale)
{
    RecordDb db;
    db.create(PeerRole::Winemaker, record("W1"));
    std::vector<AttackClass> notified;
    db.on_flag([&](const WineRecord &, const ValidationFailure &f) { notified.push_back(f.attack_class); });

    db.log_unsuccessful_validation("W1", {AttackClass::Modification, ValidationLayer::OffChainDb, 5, "wine id"});
    WineRecord r = db.get("W1");
    EXPECT_EQ(r.wine_status, WineStatus::Flagged);
    EXPECT_EQ(r.unsuccessful_validation_data.size(), 1u);
    db.log_unsuccessful_validation("W1", {AttackClass::Cloning, ValidationLayer::OnChain, 6, "uid"});
    r = db.get("W1");
    ASSERT_EQ(r.unsuccessful_validation_data.size(), 2u);
    EXPECT_EQ(r.unsuccessful_validation_data[0].attack_class, AttackClass::Modification);
    EXPECT_EQ(r.unsuccessful_validation_data[1].attack_class, AttackClass::Cloning);
    EXPECT_EQ(notified, (std::vector<AttackClass>{AttackClass::Modification, AttackClass::Cloning}));

    EXPECT_EQ(error_code_of([&] { db.mutate("W1", [](WineRecord &w) { w.wine_status = WineStatus::Sold; }); }),
              Errc::Rejected);
    EXPECT_EQ(error_code_of([&] { db.log_unsuccessful_validation("W9", {}); }), Errc::NotFound);
}

TEST(RecordDb, ExportImportRoundTrip)
{
    RecordDb db;
    WineRecord r = record("W1");
    r.tag.password = TagPassword{1, 2, 3, 4};
    r.transaction_data.push_back(TransactionEntry{"0xaa", 1, key(1).address(), 10, "createWineRecord"});
    r.unsuccessful_validation_data.push_back({AttackClass::Reapplication, ValidationLayer::ContentStore, 3, "x"});
    db.create(PeerRole::Winemaker, r);
    db.create(PeerRole::Winemaker, record("W2", 2));

    RecordDb copy;
    copy.import_json(json::parse(db.export_json().dump()));
    EXPECT_EQ(copy.export_json(), db.export_json());
    EXPECT_EQ(copy.find_by_uid(r.tag.uid)->tag.password, r.tag.password);
}
