#pragma once

#include "dnas/common/bytes.hpp"

namespace dnas::store
{
    // Bitcoin alphabet. Leading zero bytes map to leading '1's.
    std::string base58_encode(ByteView data);
    Bytes base58_decode(std::string_view text);
} // namespace dnas::store
