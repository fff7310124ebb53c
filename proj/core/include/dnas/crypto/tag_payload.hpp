#pragma once

#include "dnas/crypto/hash.hpp"
#include "dnas/crypto/keys.hpp"

namespace dnas::crypto
{
    inline constexpr std::string_view kEthereumMessagePrefix = "\x19" "Ethereum Signed Message:\n32";

    // len32(wine_id) || wine_id || len32(tag_id) || tag_id || len32(device_id) || device_id
    Bytes encode_tag_payload(ByteView wine_id, ByteView tag_id, ByteView device_id);

    // keccak256(prefix || keccak256(encode_tag_payload(...)))
    Hash32 prefixed_digest(ByteView wine_id, ByteView tag_id, ByteView device_id);
    inline Hash32 prefixed_digest(std::string_view wine_id, std::string_view tag_id, std::string_view device_id)
    {
        return prefixed_digest(as_bytes(wine_id), as_bytes(tag_id), as_bytes(device_id));
    }

    // Identifiers are stored hashed on-chain; the signed payload carries the hashed forms.
    inline Hash32 hashed_identifier(ByteView raw) { return keccak256(raw); }
    Hash32 hashed_identifier(std::string_view raw);

    // Signs (wine_id, keccak(tag_id), keccak(device_id)).
    Signature sign_tag_payload(std::string_view wine_id, ByteView tag_id, std::string_view device_id, const KeyPair &key);
    Hash32 tag_payload_digest(std::string_view wine_id, ByteView tag_id, std::string_view device_id);
    Hash32 tag_payload_digest_hashed(std::string_view wine_id, const Hash32 &tag_hash, const Hash32 &device_hash);
} // namespace dnas::crypto
