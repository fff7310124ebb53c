#pragma once

#include "dnas/crypto/keys.hpp"

#include <nlohmann/json.hpp>

namespace dnas::crypto
{
    struct KdfParams
    {
        std::uint64_t n = 1u << 14;
        std::uint32_t r = 8;
        std::uint32_t p = 1;
        std::uint32_t dklen = 32;
        Bytes salt;
        Bytes iv; // AES-128-CTR initial counter block
    };

    /// Password-encrypted secret key: scrypt-derived key, AES-128-CTR body,
    /// MAC = keccak256(derived[16..32] || ciphertext).
    struct Keystore
    {
        Address address;
        Bytes ciphertext;
        KdfParams kdf_params;
        Hash32 mac{};

        nlohmann::json to_json() const;
        static Keystore from_json(const nlohmann::json &j);
    };

    // Salt/iv are drawn from the CSPRNG unless supplied (deterministic tests and replays).
    Keystore encrypt_keystore(const KeyPair &key, std::string_view password,
                              std::optional<Bytes> salt = std::nullopt, std::optional<Bytes> iv = std::nullopt,
                              std::uint64_t work_factor = 1u << 14);

    // Throws Error(Errc::Mac) on a wrong password.
    KeyPair decrypt_keystore(const Keystore &ks, std::string_view password);
} // namespace dnas::crypto
