#pragma once

#include "dnas/crypto/keys.hpp"

#include <nlohmann/json.hpp>

namespace dnas::crypto
{
    inline void to_json(nlohmann::json &j, const Address &a) { j = a.hex(); }
    inline void from_json(const nlohmann::json &j, Address &a) { a = Address::from_hex(j.get<std::string>()); }

    inline void to_json(nlohmann::json &j, const Signature &s) { j = s.hex(); }
    inline void from_json(const nlohmann::json &j, Signature &s) { s = Signature::from_hex(j.get<std::string>()); }
} // namespace dnas::crypto

namespace dnas
{
    inline std::string hash_to_json(const Hash32 &h) { return to_hex(h, true); }
    inline Hash32 hash_from_json(const nlohmann::json &j) { return fixed_from_hex<32>(j.get<std::string>()); }
} // namespace dnas
