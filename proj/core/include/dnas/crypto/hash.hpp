#pragma once

#include "dnas/common/bytes.hpp"

namespace dnas::crypto
{
    // Original Keccak-256 (0x01 domain padding), as used by Ethereum. Not FIPS SHA3-256.
    Hash32 keccak256(ByteView data);
    inline Hash32 keccak256(std::string_view s) { return keccak256(as_bytes(s)); }

    Hash32 sha256(ByteView data);
    inline Hash32 sha256(std::string_view s) { return sha256(as_bytes(s)); }

    Hash32 hmac_sha256(ByteView key, ByteView data);
} // namespace dnas::crypto
