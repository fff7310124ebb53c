#include "dnas/store/content_id.hpp"

#include "dnas/crypto/hash.hpp"
#include "dnas/store/base58.hpp"

#include <algorithm>

namespace dnas::store
{
    ContentId ContentId::of(ByteView content)
    {
        const Hash32 digest = crypto::sha256(content);
        Bytes multihash{kMultihashSha256, kMultihashLength};
        multihash.insert(multihash.end(), digest.begin(), digest.end());
        return ContentId(base58_encode(multihash));
    }

    ContentId ContentId::parse(std::string_view text)
    {
        if (text.size() != kContentIdChars)
            throw Error(Errc::Decode, "content id must be 46 characters");
        const Bytes raw = base58_decode(text);
        if (raw.size() != 34 || raw[0] != kMultihashSha256 || raw[1] != kMultihashLength)
            throw Error(Errc::Decode, "content id is not a sha2-256 multihash");
        return ContentId(std::string(text));
    }

    Hash32 ContentId::digest() const
    {
        const Bytes raw = base58_decode(m_text);
        Hash32 out{};
        std::copy(raw.begin() + 2, raw.end(), out.begin());
        return out;
    }

    bool ContentId::matches(ByteView content) const { return crypto::sha256(content) == digest(); }
} // namespace dnas::store
