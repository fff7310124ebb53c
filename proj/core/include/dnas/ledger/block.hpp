#pragma once

#include "dnas/contract/types.hpp"
#include "dnas/ledger/transaction.hpp"

#include <optional>
#include <vector>

namespace dnas::ledger
{
    // A sealer's validator vote, carried in the header of a block it seals.
    struct Vote
    {
        Address candidate;
        bool add = true;
        friend bool operator==(const Vote &, const Vote &) = default;
    };

    struct BlockHeader
    {
        std::uint64_t number = 0;
        Hash32 parent_hash{};
        Address sealer;
        SimTime timestamp = 0;
        std::uint64_t gas_limit = 0;
        std::uint64_t gas_used = 0;
        Hash32 tx_root{};
        Hash32 state_root{};
        std::optional<Vote> vote;
        crypto::Signature seal;

        // Digest the sealer signs: every field except the seal.
        Hash32 seal_hash() const;
        Hash32 hash() const;
    };

    struct Block
    {
        BlockHeader header;
        std::vector<SignedTransaction> transactions;

        Hash32 hash() const { return header.hash(); }
        static Hash32 compute_tx_root(const std::vector<SignedTransaction> &txs);

        nlohmann::json to_json() const;
        static Block from_json(const nlohmann::json &j);
    };

    struct Receipt
    {
        Hash32 tx_hash{};
        std::uint64_t block_number = 0;
        std::size_t index = 0;
        Address sender;
        std::string target;
        std::string method;
        bool success = false;
        std::string error;
        nlohmann::json output;
        std::uint64_t gas_used = 0;
        std::vector<contract::ContractEvent> events;

        nlohmann::json to_json() const;
        static Receipt from_json(const nlohmann::json &j);
    };
} // namespace dnas::ledger
