#include "dnas/crypto/hash.hpp"
#include "dnas/crypto/keys.hpp"
#include "dnas/crypto/keystore.hpp"
#include "dnas/crypto/tag_payload.hpp"
#include "dnas/crypto/vault.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <set>
#include <thread>

using namespace dnas;
using namespace dnas::crypto;
using dnas::test_support::error_code_of;

namespace
{
    Hash32 filled(std::uint8_t b)
    {
        Hash32 h{};
        h.fill(b);
        return h;
    }
} // namespace

TEST(Keccak, MatchesReferenceVectors)
{
    for (const auto &v : test_support::crypto_vectors().at("keccak"))
    {
        const Bytes input = from_hex(v.at("input").get<std::string>());
        EXPECT_EQ(to_hex(keccak256(input)), v.at("digest").get<std::string>()) << "input size " << input.size();
    }
}

TEST(Keccak, EmptyInputKnownDigest)
{
    EXPECT_EQ(to_hex(keccak256(std::string_view{})),
              "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
}

TEST(Keys, CurveOrderMatchesPublishedConstant)
{
    EXPECT_EQ(to_hex(curve_order()), test_support::crypto_vectors().at("curve_order").get<std::string>());
}

TEST(Keys, SeededGenerationIsDeterministic)
{
    const auto a = generate_keypair(filled(0x01));
    const auto b = generate_keypair(filled(0x01));
    EXPECT_EQ(a.public_key, b.public_key);
    EXPECT_EQ(a.address(), b.address());
}

TEST(Keys, UnseededGenerationIsRandom)
{
    const auto a = generate_keypair();
    const auto b = generate_keypair();
    EXPECT_NE(a.secret_key.bytes(), b.secret_key.bytes());
}

TEST(Keys, SeedOutsideScalarRangeIsRejected)
{
    EXPECT_EQ(error_code_of([] { generate_keypair(curve_order()); }), Errc::RejectedSeed);
    EXPECT_EQ(error_code_of([] { generate_keypair(Hash32{}); }), Errc::RejectedSeed);
    EXPECT_EQ(error_code_of([] { generate_keypair(filled(0xff)); }), Errc::RejectedSeed);

    Hash32 n_minus_one = curve_order();
    n_minus_one[31] -= 1;
    EXPECT_NO_THROW(generate_keypair(n_minus_one));
}

TEST(Keys, AddressDerivationMatchesReference)
{
    for (const auto &v : test_support::crypto_vectors().at("keys"))
    {
        const auto kp = generate_keypair(fixed_from_hex<32>(v.at("secret").get<std::string>()));
        EXPECT_EQ(to_hex(kp.public_key.xy), v.at("public").get<std::string>());
        EXPECT_EQ(to_hex(kp.address().bytes()), v.at("address").get<std::string>());
    }
}

TEST(Keys, PointOffCurveIsInvalid)
{
    PublicKey bogus;
    bogus.xy.fill(0x07);
    EXPECT_EQ(error_code_of([&] { derive_address(bogus); }), Errc::InvalidKey);
}

TEST(Keys, RandomKeysYieldDistinctAddresses)
{
    std::mt19937_64 rng(42);
    std::set<Address> seen;
    constexpr int kPairs = 10'000;
    for (int i = 0; i < 2 * kPairs; ++i)
    {
        Hash32 seed{};
        for (auto &b : seed)
            b = static_cast<std::uint8_t>(rng());
        seed[0] &= 0x7f; // keep below n
        seen.insert(generate_keypair(seed).address());
    }
    EXPECT_EQ(seen.size(), static_cast<std::size_t>(2 * kPairs));
}

TEST(TagPayload, EncodingIsLengthPrefixed)
{
    const Bytes a = encode_tag_payload(as_bytes("A"), as_bytes("BC"), as_bytes("D"));
    const Bytes b = encode_tag_payload(as_bytes("AB"), as_bytes("C"), as_bytes("D"));
    EXPECT_NE(a, b);
    EXPECT_EQ(a.size(), 3u * 4u + 4u);
    EXPECT_EQ(a[3], 1);
}

TEST(TagPayload, DigestMatchesReferenceForRawIdentifiers)
{
    EXPECT_EQ(to_hex(prefixed_digest("W1", "T1", "D1")),
              test_support::crypto_vectors().at("raw_payload_digest_W1_T1_D1").get<std::string>());
}

TEST(TagPayload, DigestIsDeterministicAndSensitive)
{
    EXPECT_EQ(prefixed_digest("W1", "T1", "D1"), prefixed_digest("W1", "T1", "D1"));
    EXPECT_NE(prefixed_digest("W1", "T1", "D1"), prefixed_digest("W1", "T2", "D1"));
}

TEST(TagPayload, EmptyIdentifierIsAnEncodingError)
{
    EXPECT_EQ(error_code_of([] { prefixed_digest("", "T1", "D1"); }), Errc::Encoding);
    EXPECT_EQ(error_code_of([] { prefixed_digest("W1", "T1", ""); }), Errc::Encoding);
}

TEST(Signing, FixedVectorsAreByteIdenticalToReference)
{
    for (const auto &v : test_support::crypto_vectors().at("keys"))
    {
        const auto kp = generate_keypair(fixed_from_hex<32>(v.at("secret").get<std::string>()));
        const std::string wine = v.at("wine_id");
        const std::string tag = v.at("tag_id");
        const std::string device = v.at("device_id");

        const Hash32 digest = tag_payload_digest(wine, as_bytes(tag), device);
        EXPECT_EQ(to_hex(digest), v.at("digest").get<std::string>());

        const Signature sig = sign_tag_payload(wine, as_bytes(tag), device, kp);
        EXPECT_EQ(to_hex(sig.r), v.at("r").get<std::string>()) << wine;
        EXPECT_EQ(to_hex(sig.s), v.at("s").get<std::string>()) << wine;
        EXPECT_EQ(sig.v, v.at("v").get<int>()) << wine;
        EXPECT_EQ(recover_signer(digest, sig), kp.address());
    }
}

TEST(Signing, RoundtripRecoversSigner)
{
    const auto kp = generate_keypair(filled(0x11));
    const auto other = generate_keypair(filled(0x22));
    const Hash32 digest = tag_payload_digest("W9", as_bytes("uid"), "dev");
    const Signature sig = sign_digest(digest, kp);
    EXPECT_EQ(recover_signer(digest, sig), kp.address());
    EXPECT_NE(recover_signer(digest, sig), other.address());
}

TEST(Signing, RawRecoveryIdIsAccepted)
{
    const auto kp = generate_keypair(filled(0x11));
    const Hash32 digest = keccak256(std::string_view("x"));
    Signature sig = sign_digest(digest, kp);
    sig.v -= 27;
    EXPECT_EQ(recover_signer(digest, sig), kp.address());
}

TEST(Signing, HighSIsRejectedAsNonCanonical)
{
    const auto kp = generate_keypair(filled(0x33));
    const Hash32 digest = keccak256(std::string_view("payload"));
    Signature sig = sign_digest(digest, kp);

    // s' = n - s, computed with plain big-endian subtraction.
    const Hash32 &n = curve_order();
    Hash32 flipped{};
    int borrow = 0;
    for (int i = 31; i >= 0; --i)
    {
        int d = int(n[i]) - int(sig.s[i]) - borrow;
        borrow = d < 0 ? 1 : 0;
        flipped[i] = static_cast<std::uint8_t>(d + (borrow ? 256 : 0));
    }
    sig.s = flipped;
    sig.v ^= 1;
    EXPECT_EQ(error_code_of([&] { recover_signer(digest, sig); }), Errc::Recovery);
}

TEST(Signing, InvalidRecoveryIdIsRejected)
{
    const auto kp = generate_keypair(filled(0x44));
    const Hash32 digest = keccak256(std::string_view("payload"));
    Signature sig = sign_digest(digest, kp);
    sig.v = 29;
    EXPECT_EQ(error_code_of([&] { recover_signer(digest, sig); }), Errc::Recovery);
}

TEST(Signing, RandomSignatureBytesAlmostAlwaysFailRecovery)
{
    std::mt19937_64 rng(7);
    const Hash32 digest = keccak256(std::string_view("fuzz"));
    int failures = 0;
    constexpr int kTrials = 10'000;
    for (int i = 0; i < kTrials; ++i)
    {
        std::array<std::uint8_t, 65> raw{};
        for (auto &b : raw)
            b = static_cast<std::uint8_t>(rng());
        try
        {
            recover_signer(digest, Signature::from_bytes(raw));
        }
        catch (const Error &e)
        {
            EXPECT_EQ(e.code(), Errc::Recovery);
            ++failures;
        }
    }
    EXPECT_GE(failures, kTrials * 99 / 100);
}

TEST(Keystore, RoundtripAndWrongPassword)
{
    const auto kp = generate_keypair(filled(0x55));
    const Keystore ks = encrypt_keystore(kp, "correct horse");
    EXPECT_EQ(ks.address, kp.address());
    EXPECT_EQ(decrypt_keystore(ks, "correct horse").secret_key.bytes(), kp.secret_key.bytes());
    EXPECT_EQ(error_code_of([&] { decrypt_keystore(ks, "battery staple"); }), Errc::Mac);
}

TEST(Keystore, JsonCarriesHexFieldsAndRoundtrips)
{
    const auto kp = generate_keypair(filled(0x66));
    const Keystore ks = encrypt_keystore(kp, "pw", Bytes(32, 0xaa), Bytes(16, 0xbb));
    const auto j = ks.to_json();
    for (const char *field : {"address", "ciphertext", "kdf_params", "mac"})
        EXPECT_TRUE(j.contains(field)) << field;
    EXPECT_GE(j["kdf_params"]["n"].get<std::uint64_t>(), 1u << 14);

    const Keystore back = Keystore::from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(decrypt_keystore(back, "pw").address(), kp.address());

    Keystore tampered = back;
    tampered.ciphertext[0] ^= 1;
    EXPECT_EQ(error_code_of([&] { decrypt_keystore(tampered, "pw"); }), Errc::Mac);
}

namespace
{
    struct VaultFixture : ::testing::Test
    {
        SimTime now = 100;
        Vault vault{[this] { return now; }, 1, 60};
    };
} // namespace

TEST_F(VaultFixture, AppRoleLoginMintsLeasedToken)
{
    const std::string secret_id = vault.create_approle("svc-member42", {member_policy("member42")});
    const auto session = vault.login(VaultAuthMethod::with_approle("svc-member42", secret_id));
    EXPECT_FALSE(session.token.empty());
    EXPECT_GT(session.lease_expiry, now);
}

TEST_F(VaultFixture, AuthFailures)
{
    const std::string secret_id = vault.create_approle("role", {"dnas/"});
    EXPECT_EQ(error_code_of([&] { vault.login(VaultAuthMethod::with_approle("role", "wrong")); }), Errc::Auth);
    EXPECT_EQ(error_code_of([&] { vault.login(VaultAuthMethod::with_approle("nope", secret_id)); }), Errc::Auth);

    const std::string token = vault.issue_token({"dnas/"}, 10);
    EXPECT_NO_THROW(vault.login(VaultAuthMethod::with_token(token)));
    now += 10;
    EXPECT_EQ(error_code_of([&] { vault.login(VaultAuthMethod::with_token(token)); }), Errc::Auth);
    EXPECT_EQ(error_code_of([&] { vault.get(VaultSession{token, 0}, "dnas/x"); }), Errc::Auth);
}

TEST_F(VaultFixture, PutBumpsVersionGetReturnsLatest)
{
    const auto session = vault.login(VaultAuthMethod::with_token(vault.issue_token({member_policy("member42")})));
    const std::string key = member_secret_path("member42", "nodekey");
    EXPECT_EQ(key, "dnas/member42/nodekey");
    EXPECT_EQ(vault.put(session, key, "k1"), 1u);
    auto s = vault.get(session, key);
    EXPECT_EQ(s.value, "k1");
    EXPECT_EQ(s.version, 1u);

    EXPECT_EQ(vault.put(session, key, "k2"), 2u);
    s = vault.get(session, key);
    EXPECT_EQ(s.value, "k2");
    EXPECT_EQ(s.version, 2u);
    EXPECT_EQ(vault.get(session, key, 1).value, "k1");

    EXPECT_EQ(error_code_of([&] { vault.get(session, member_secret_path("member42", "missing")); }), Errc::NotFound);
}

TEST_F(VaultFixture, PolicyMatrixAcrossMembers)
{
    const std::vector<std::string> members = {"member1", "member12", "member2", "admin"};
    std::vector<VaultSession> sessions;
    for (const auto &m : members)
        sessions.push_back(vault.login(VaultAuthMethod::with_token(vault.issue_token({member_policy(m)}))));

    for (std::size_t i = 0; i < members.size(); ++i)
        vault.put(sessions[i], member_secret_path(members[i], "nodekey"), members[i]);

    for (std::size_t i = 0; i < members.size(); ++i)
    {
        for (std::size_t j = 0; j < members.size(); ++j)
        {
            const std::string key = member_secret_path(members[j], "nodekey");
            if (i == j)
                EXPECT_EQ(vault.get(sessions[i], key).value, members[j]);
            else
                EXPECT_EQ(error_code_of([&] { vault.get(sessions[i], key); }), Errc::Auth)
                    << members[i] << " read " << members[j];
        }
    }
}

TEST_F(VaultFixture, DeploymentSecretPath)
{
    const auto proxy = generate_keypair(filled(0x09)).address();
    EXPECT_EQ(deployment_secret_path(proxy), "dnas/SCDeploymentSecret/" + proxy.hex());
}

TEST_F(VaultFixture, ConcurrentReadersNeverSeeTornValues)
{
    const auto session = vault.login(VaultAuthMethod::with_token(vault.issue_token({"dnas/"})));
    const std::string key = "dnas/shared/value";
    vault.put(session, key, std::string(256, 'a'));

    std::atomic<bool> stop{false};
    std::atomic<int> torn{0};
    std::atomic<std::uint64_t> last_seen{0};
    std::vector<std::thread> readers;
    for (int t = 0; t < 4; ++t)
    {
        readers.emplace_back([&] {
            std::uint64_t prev = 0;
            while (!stop)
            {
                const auto s = vault.get(session, key);
                if (s.value != std::string(256, s.value.front()))
                    ++torn;
                if (s.version < prev)
                    ++torn;
                prev = s.version;
                last_seen = std::max<std::uint64_t>(last_seen, s.version);
            }
        });
    }
    for (int i = 0; i < 2000; ++i)
        vault.put(session, key, std::string(256, static_cast<char>('a' + i % 26)));
    stop = true;
    for (auto &t : readers)
        t.join();
    EXPECT_EQ(torn.load(), 0);
    EXPECT_EQ(vault.get(session, key).version, 2001u);
}
