#pragma once

#include "dnas/contract/types.hpp"

#include <map>
#include <optional>
#include <set>

namespace dnas::contract
{
    inline constexpr std::uint32_t kDefaultBootstrapCount = 5;

    /// On-chain wine mappings. Iteration keys for a wine run 1..write_count.
    struct WineDataStore
    {
        std::map<std::pair<std::string, std::uint64_t>, std::string> data_hash;
        std::map<std::string, Address> pub_addr;
        std::map<std::string, Hash32> tag_id;
        std::map<std::string, Hash32> device_id;
        std::map<std::string, std::uint64_t> write_count;
        std::map<std::string, std::uint64_t> read_count;

        std::uint64_t writes(const std::string &wine_id) const;
    };

    struct VoteKey
    {
        Address candidate;
        bool add = true;
        friend auto operator<=>(const VoteKey &, const VoteKey &) = default;
    };

    struct PeerRegistryStore
    {
        std::map<Address, PeerEntry> peers;
        std::map<VoteKey, std::set<Address>> votes;
        // Candidate details for open add-proposals, keyed by address.
        std::map<Address, PeerEntry> proposed;
        std::optional<std::uint32_t> consensus_override;
        std::uint32_t bootstrap_count = kDefaultBootstrapCount;
        Address admin;

        bool is_member(const Address &a) const { return peers.count(a) > 0; }
        // Administrator override if set, otherwise ceil(N/2) with a floor of 1.
        std::uint32_t consensus_level() const;
    };

    struct ProxySlot
    {
        std::optional<std::string> current_implementation;
        std::map<std::string, std::uint32_t> initialize_counter;
        Address owner;
    };

    struct ContractStore
    {
        WineDataStore wine;
        PeerRegistryStore registry;
        ProxySlot proxy;

        static ContractStore genesis(const Address &admin, std::uint32_t bootstrap_count = kDefaultBootstrapCount);

        // Canonical form: sorted keys, compact. state_root hashes its dump.
        nlohmann::json to_json() const;
        static ContractStore from_json(const nlohmann::json &j);
        Hash32 state_root() const;
    };
} // namespace dnas::contract
