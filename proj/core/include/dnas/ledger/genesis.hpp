#pragma once

#include "dnas/contract/store.hpp"

#include <limits>
#include <map>
#include <vector>

namespace dnas::ledger
{
    using crypto::Address;

    inline constexpr std::uint64_t kDefaultGasFloor = 5000;
    inline constexpr std::size_t kExtraVanity = 32;
    inline constexpr std::size_t kExtraSeal = 65;

    struct GenesisConfig
    {
        std::uint64_t chain_id = 1337;
        std::uint64_t period = 1;
        std::vector<Address> initial_validators;
        std::map<Address, std::uint64_t> alloc; // balances in gwei
        std::uint64_t gas_limit = 8'000'000;
        std::uint64_t gas_floor = kDefaultGasFloor;
        std::uint64_t gas_ceiling = std::numeric_limits<std::uint64_t>::max();
        // Contract genesis: administrator owns the proxy and the registry.
        Address administrator;
        std::uint32_t bootstrap_count = contract::kDefaultBootstrapCount;

        // Throws Error(Errc::Config).
        void validate() const;

        // vanity(32 zero bytes) || validator addresses || seal(65 zero bytes)
        Bytes extra_data() const;
        static std::vector<Address> validators_from_extra_data(ByteView extra);

        nlohmann::json to_json() const;
        static GenesisConfig from_json(const nlohmann::json &j);
    };

    /// Moves toward ceil(used * 3/2) by at most parent/1024, then applies floor and ceiling.
    std::uint64_t next_gas_limit(std::uint64_t parent_gas_limit, std::uint64_t parent_gas_used,
                                 std::uint64_t floor = 0,
                                 std::uint64_t ceiling = std::numeric_limits<std::uint64_t>::max());
} // namespace dnas::ledger
