#pragma once

#include "dnas/contract/runtime.hpp"
#include "dnas/ledger/block.hpp"
#include "dnas/ledger/genesis.hpp"
#include "dnas/ledger/validator_set.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <shared_mutex>
#include <map>

namespace dnas::ledger
{
    using BlockListener = std::function<void(const Block &, const std::vector<Receipt> &)>;

    /// One node's replica of the chain: blocks, contract state, validator set
    /// and transaction pool. Validator nodes also seal.
    class Chain
    {
    public:
        Chain(GenesisConfig genesis, std::shared_ptr<const contract::Runtime> runtime);

        const GenesisConfig &genesis() const noexcept { return m_genesis; }

        // Pool. Throws Error(Errc::PoolRejected).
        Hash32 submit(const SignedTransaction &tx);
        std::size_t pool_size() const;
        bool in_pool(const Hash32 &tx_hash) const;
        // Next nonce a sender should use: confirmed count plus pending pool entries.
        std::uint64_t next_nonce(const Address &sender) const;
        std::uint64_t confirmed_nonce(const Address &sender) const;

        // Local clique-style proposal; cast in headers this node seals.
        // Throws Error(Errc::Authorization) if `voter` is not a validator.
        void propose(const Address &voter, const Address &candidate, bool add);
        void discard_proposal(const Address &candidate);
        std::map<Address, bool> proposals() const;

        // Earliest timestamp at which `sealer` may seal the next block, if it may at all.
        std::optional<SimTime> slot_for(const Address &sealer) const;
        // Builds, seals and commits the next block. Throws Error(Errc::SealRejected)
        // when the key is not a validator or its slot has not arrived.
        Block seal_block(const crypto::KeyPair &sealer, SimTime now);
        // Verifies and commits a block sealed elsewhere. Throws Error(Errc::InvalidBlock).
        std::vector<Receipt> import_block(const Block &block);

        // Queries. Throw Error(Errc::NotFound) for unknown items.
        std::uint64_t height() const;
        Block head() const;
        Block block(std::uint64_t number) const;
        Receipt receipt(const Hash32 &tx_hash) const;
        bool has_receipt(const Hash32 &tx_hash) const;
        std::vector<Receipt> receipts(std::uint64_t number) const;
        std::shared_ptr<const contract::ContractStore> state() const;
        Hash32 state_root() const;
        ValidatorSet validators() const;
        std::uint64_t balance(const Address &a) const;

        // Read-only contract call against the current head state.
        nlohmann::json call(const Address &caller, std::string_view target, std::string_view method,
                            const nlohmann::json &payload) const;

        void on_block(BlockListener listener);

    private:
        struct Execution
        {
            std::shared_ptr<const contract::ContractStore> state;
            std::map<Address, std::uint64_t> nonces;
            std::vector<Receipt> receipts;
            std::uint64_t gas_used = 0;
        };

        Execution execute(const std::vector<SignedTransaction> &txs, std::uint64_t number, SimTime timestamp) const;
        void verify_slot(const Address &sealer, SimTime timestamp) const;
        std::optional<Vote> pick_vote(const Address &sealer) const;
        void commit(const Block &block, Execution exec);
        void notify(const Block &block, const std::vector<Receipt> &receipts);

        GenesisConfig m_genesis;
        std::shared_ptr<const contract::Runtime> m_runtime;

        mutable std::shared_mutex m_mutex;
        std::vector<Block> m_blocks;
        std::vector<std::vector<Receipt>> m_receipts;
        std::map<Hash32, std::pair<std::uint64_t, std::size_t>> m_tx_index;
        std::shared_ptr<const contract::ContractStore> m_state;
        std::map<Address, std::uint64_t> m_nonces;
        ValidatorSet m_validators;
        std::deque<SignedTransaction> m_pool;
        std::map<Address, bool> m_proposals;
        std::vector<BlockListener> m_listeners;
    };
} // namespace dnas::ledger
