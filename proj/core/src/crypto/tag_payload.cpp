#include "dnas/crypto/tag_payload.hpp"

namespace dnas::crypto
{
    Bytes encode_tag_payload(ByteView wine_id, ByteView tag_id, ByteView device_id)
    {
        if (wine_id.empty() || tag_id.empty() || device_id.empty())
            throw Error(Errc::Encoding, "tag payload identifiers must be non-empty");
        return ByteWriter{}.field(wine_id).field(tag_id).field(device_id).take();
    }

    Hash32 prefixed_digest(ByteView wine_id, ByteView tag_id, ByteView device_id)
    {
        const Hash32 inner = keccak256(encode_tag_payload(wine_id, tag_id, device_id));
        return keccak256(ByteWriter{}.raw(as_bytes(kEthereumMessagePrefix)).raw(inner).take());
    }

    Hash32 hashed_identifier(std::string_view raw)
    {
        if (raw.empty())
            throw Error(Errc::Encoding, "identifier must be non-empty");
        return keccak256(as_bytes(raw));
    }

    Hash32 tag_payload_digest_hashed(std::string_view wine_id, const Hash32 &tag_hash, const Hash32 &device_hash)
    {
        return prefixed_digest(as_bytes(wine_id), tag_hash, device_hash);
    }

    Hash32 tag_payload_digest(std::string_view wine_id, ByteView tag_id, std::string_view device_id)
    {
        if (tag_id.empty())
            throw Error(Errc::Encoding, "tag identifier must be non-empty");
        return tag_payload_digest_hashed(wine_id, keccak256(tag_id), hashed_identifier(device_id));
    }

    Signature sign_tag_payload(std::string_view wine_id, ByteView tag_id, std::string_view device_id, const KeyPair &key)
    {
        return sign_digest(tag_payload_digest(wine_id, tag_id, device_id), key);
    }
} // namespace dnas::crypto
