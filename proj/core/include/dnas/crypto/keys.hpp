#pragma once

#include "dnas/common/bytes.hpp"

#include <compare>
#include <functional>
#include <optional>
#include <string>

namespace dnas::crypto
{
    inline constexpr std::size_t kAddressSize = 20;
    inline constexpr std::size_t kPublicKeySize = 64;

    /// 20-byte account identifier: the low 20 bytes of Keccak-256 over the
    /// uncompressed public key (x||y, no 0x04 tag).
    class Address
    {
    public:
        using Storage = std::array<std::uint8_t, kAddressSize>;

        constexpr Address() = default;
        explicit constexpr Address(const Storage &bytes) : m_bytes(bytes) {}

        static Address from_hex(std::string_view hex);

        const Storage &bytes() const noexcept { return m_bytes; }
        std::string hex() const { return to_hex(m_bytes, true); }
        bool is_zero() const noexcept;

        friend auto operator<=>(const Address &, const Address &) = default;

    private:
        Storage m_bytes{};
    };

    struct PublicKey
    {
        std::array<std::uint8_t, kPublicKeySize> xy{};
        friend bool operator==(const PublicKey &, const PublicKey &) = default;
    };

    // A secp256k1 scalar in [1, n-1], big-endian.
    class SecretKey
    {
    public:
        explicit SecretKey(const Hash32 &scalar);
        ~SecretKey();
        SecretKey(const SecretKey &) = default;
        SecretKey &operator=(const SecretKey &) = default;

        const Hash32 &bytes() const noexcept { return m_scalar; }

    private:
        Hash32 m_scalar{};
    };

    struct KeyPair
    {
        SecretKey secret_key;
        PublicKey public_key;

        Address address() const;
    };

    /// Recoverable ECDSA signature. `v` is the recovery id, either raw (0/1)
    /// or Ethereum-offset (27/28). Signatures we produce always use 27/28 and low-s.
    struct Signature
    {
        std::uint8_t v = 0;
        Hash32 r{};
        Hash32 s{};

        // r || s || v
        std::array<std::uint8_t, 65> to_bytes() const;
        static Signature from_bytes(ByteView bytes65);
        std::string hex() const { return to_hex(to_bytes(), true); }
        static Signature from_hex(std::string_view hex);

        friend bool operator==(const Signature &, const Signature &) = default;
    };

    const Hash32 &curve_order() noexcept;

    /// Deterministic when `seed` is given (the seed is taken as the scalar);
    /// otherwise draws from the OS CSPRNG. Seeds mapping to 0 or >= n are rejected.
    KeyPair generate_keypair(std::optional<Hash32> seed = std::nullopt);
    KeyPair keypair_from_secret(const SecretKey &secret);

    Address derive_address(const PublicKey &public_key);

    // RFC 6979 (HMAC-SHA256) nonce, low-s normalized.
    Signature sign_digest(const Hash32 &digest, const KeyPair &key);

    Address recover_signer(const Hash32 &digest, const Signature &sig);
    PublicKey recover_public_key(const Hash32 &digest, const Signature &sig);
} // namespace dnas::crypto

template <>
struct std::hash<dnas::crypto::Address>
{
    std::size_t operator()(const dnas::crypto::Address &a) const noexcept
    {
        std::size_t h = 0;
        for (auto b : a.bytes())
            h = h * 131 + b;
        return h;
    }
};
