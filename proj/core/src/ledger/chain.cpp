#include "dnas/ledger/chain.hpp"

#include <mutex>

namespace dnas::ledger
{
    using nlohmann::json;

    Chain::Chain(GenesisConfig genesis, std::shared_ptr<const contract::Runtime> runtime)
        : m_genesis(std::move(genesis)), m_runtime(std::move(runtime)),
          m_validators((m_genesis.validate(), m_genesis.initial_validators))
    {
        if (!m_runtime)
            throw Error(Errc::Config, "chain needs a contract runtime");
        m_state = std::make_shared<const contract::ContractStore>(
            contract::ContractStore::genesis(m_genesis.administrator, m_genesis.bootstrap_count));

        Block genesis_block;
        genesis_block.header.gas_limit = m_genesis.gas_limit;
        genesis_block.header.tx_root = Block::compute_tx_root({});
        genesis_block.header.state_root = m_state->state_root();
        m_blocks.push_back(std::move(genesis_block));
        m_receipts.emplace_back();
    }

    Hash32 Chain::submit(const SignedTransaction &stx)
    {
        std::unique_lock lock(m_mutex);
        const auto &tx = stx.tx();
        if (!stx.verify())
            throw Error(Errc::PoolRejected, "signature does not recover to sender");
        if (tx.chain_id != m_genesis.chain_id)
            throw Error(Errc::PoolRejected, "wrong chain id");
        if (tx.gas_price != 0)
            throw Error(Errc::PoolRejected, "gas price must be zero");
        if (m_tx_index.count(stx.hash()))
            throw Error(Errc::PoolRejected, "transaction already included");
        std::uint64_t expected = m_nonces.count(tx.sender) ? m_nonces.at(tx.sender) : 0;
        for (const auto &pending : m_pool)
        {
            if (pending.hash() == stx.hash())
                throw Error(Errc::PoolRejected, "transaction already pooled");
            if (pending.tx().sender == tx.sender)
                ++expected;
        }
        if (tx.nonce != expected)
            throw Error(Errc::PoolRejected,
                        "nonce " + std::to_string(tx.nonce) + " but expected " + std::to_string(expected));
        if (tx.intrinsic_gas() > m_blocks.back().header.gas_limit)
            throw Error(Errc::PoolRejected, "transaction exceeds the block gas limit");
        m_pool.push_back(stx);
        return stx.hash();
    }

    std::size_t Chain::pool_size() const
    {
        std::shared_lock lock(m_mutex);
        return m_pool.size();
    }

    bool Chain::in_pool(const Hash32 &tx_hash) const
    {
        std::shared_lock lock(m_mutex);
        return std::any_of(m_pool.begin(), m_pool.end(), [&](const auto &tx) { return tx.hash() == tx_hash; });
    }

    std::uint64_t Chain::confirmed_nonce(const Address &sender) const
    {
        std::shared_lock lock(m_mutex);
        const auto it = m_nonces.find(sender);
        return it == m_nonces.end() ? 0 : it->second;
    }

    std::uint64_t Chain::next_nonce(const Address &sender) const
    {
        std::shared_lock lock(m_mutex);
        const auto it = m_nonces.find(sender);
        std::uint64_t n = it == m_nonces.end() ? 0 : it->second;
        for (const auto &pending : m_pool)
            if (pending.tx().sender == sender)
                ++n;
        return n;
    }

    void Chain::propose(const Address &voter, const Address &candidate, bool add)
    {
        std::unique_lock lock(m_mutex);
        if (!m_validators.contains(voter))
            throw Error(Errc::Authorization, voter.hex() + " is not a validator");
        m_proposals[candidate] = add;
    }

    void Chain::discard_proposal(const Address &candidate)
    {
        std::unique_lock lock(m_mutex);
        m_proposals.erase(candidate);
    }

    std::map<Address, bool> Chain::proposals() const
    {
        std::shared_lock lock(m_mutex);
        return m_proposals;
    }

    std::optional<Vote> Chain::pick_vote(const Address &sealer) const
    {
        for (const auto &[candidate, add] : m_proposals)
            if (m_validators.is_actionable(candidate, add) && !m_validators.has_voted(sealer, candidate, add))
                return Vote{candidate, add};
        return std::nullopt;
    }

    std::optional<SimTime> Chain::slot_for(const Address &sealer) const
    {
        std::shared_lock lock(m_mutex);
        if (!m_validators.contains(sealer))
            return std::nullopt;
        const auto &parent = m_blocks.back().header;
        const auto k = m_validators.turn_offset(sealer, parent.number + 1);
        return parent.timestamp + static_cast<SimTime>(m_genesis.period * (1 + k));
    }

    void Chain::verify_slot(const Address &sealer, SimTime timestamp) const
    {
        if (!m_validators.contains(sealer))
            throw Error(Errc::SealRejected, sealer.hex() + " is not a validator");
        const auto &parent = m_blocks.back().header;
        // In-turn sealer may seal one period after the parent; the validator k
        // places behind it waits k further periods.
        const auto k = m_validators.turn_offset(sealer, parent.number + 1);
        const SimTime earliest = parent.timestamp + static_cast<SimTime>(m_genesis.period * (1 + k));
        if (timestamp < earliest)
            throw Error(Errc::SealRejected, sealer.hex() + " sealed out of turn at " + std::to_string(timestamp) +
                                                ", earliest slot " + std::to_string(earliest));
    }

    Chain::Execution Chain::execute(const std::vector<SignedTransaction> &txs, std::uint64_t number,
                                    SimTime timestamp) const
    {
        contract::ContractStore store = *m_state;
        Execution exec;
        exec.nonces = m_nonces;
        for (std::size_t i = 0; i < txs.size(); ++i)
        {
            const auto &stx = txs[i];
            const auto &tx = stx.tx();
            if (!stx.verify() || tx.chain_id != m_genesis.chain_id || tx.gas_price != 0)
                throw Error(Errc::InvalidBlock, "invalid transaction " + to_hex(stx.hash(), true));
            auto &nonce = exec.nonces[tx.sender];
            if (tx.nonce != nonce)
                throw Error(Errc::InvalidBlock, "nonce gap in transaction " + to_hex(stx.hash(), true));
            ++nonce;

            Receipt r;
            r.tx_hash = stx.hash();
            r.block_number = number;
            r.index = i;
            r.sender = tx.sender;
            r.target = tx.target;
            r.method = tx.method;
            r.gas_used = tx.intrinsic_gas();
            contract::ContractStore scratch = store;
            try
            {
                auto result = m_runtime->execute(scratch, contract::CallContext{tx.sender, number, timestamp, stx.hash()},
                                                 tx.target, tx.method, tx.payload);
                r.success = true;
                r.output = std::move(result.output);
                r.events = std::move(result.events);
                store = std::move(scratch);
            }
            catch (const Error &e)
            {
                r.error = std::string(to_string(e.code())) + ": " + e.what();
            }
            catch (const std::exception &e)
            {
                r.error = std::string("decode: ") + e.what();
            }
            exec.gas_used += r.gas_used;
            exec.receipts.push_back(std::move(r));
        }
        exec.state = std::make_shared<const contract::ContractStore>(std::move(store));
        return exec;
    }

    void Chain::commit(const Block &block, Execution exec)
    {
        const auto number = block.header.number;
        for (std::size_t i = 0; i < block.transactions.size(); ++i)
            m_tx_index[block.transactions[i].hash()] = {number, i};
        m_blocks.push_back(block);
        m_receipts.push_back(std::move(exec.receipts));
        m_state = std::move(exec.state);
        m_nonces = std::move(exec.nonces);
        if (block.header.vote)
            m_validators.propose(block.header.sealer, block.header.vote->candidate, block.header.vote->add);

        std::erase_if(m_pool, [&](const SignedTransaction &tx) {
            if (m_tx_index.count(tx.hash()))
                return true;
            const auto it = m_nonces.find(tx.tx().sender);
            return it != m_nonces.end() && tx.tx().nonce < it->second;
        });
    }

    void Chain::notify(const Block &block, const std::vector<Receipt> &receipts)
    {
        std::vector<BlockListener> listeners;
        {
            std::shared_lock lock(m_mutex);
            listeners = m_listeners;
        }
        for (const auto &l : listeners)
            l(block, receipts);
    }

    Block Chain::seal_block(const crypto::KeyPair &sealer, SimTime now)
    {
        Block block;
        std::vector<Receipt> receipts;
        {
            std::unique_lock lock(m_mutex);
            const Address me = sealer.address();
            verify_slot(me, now);
            const auto &parent = m_blocks.back().header;

            auto &h = block.header;
            h.number = parent.number + 1;
            h.parent_hash = m_blocks.back().hash();
            h.sealer = me;
            h.timestamp = now;
            h.gas_limit = next_gas_limit(parent.gas_limit, parent.gas_used, m_genesis.gas_floor, m_genesis.gas_ceiling);

            std::map<Address, std::uint64_t> expected = m_nonces;
            std::uint64_t gas = 0;
            for (const auto &tx : m_pool)
            {
                auto &n = expected[tx.tx().sender];
                if (tx.tx().nonce != n)
                    continue;
                if (gas + tx.tx().intrinsic_gas() > h.gas_limit)
                    break;
                gas += tx.tx().intrinsic_gas();
                ++n;
                block.transactions.push_back(tx);
            }

            Execution exec = execute(block.transactions, h.number, now);
            h.gas_used = exec.gas_used;
            h.tx_root = Block::compute_tx_root(block.transactions);
            h.state_root = exec.state->state_root();
            h.vote = pick_vote(me);
            h.seal = crypto::sign_digest(h.seal_hash(), sealer);
            receipts = exec.receipts;
            commit(block, std::move(exec));
        }
        notify(block, receipts);
        return block;
    }

    std::vector<Receipt> Chain::import_block(const Block &block)
    {
        std::vector<Receipt> receipts;
        {
            std::unique_lock lock(m_mutex);
            const auto &h = block.header;
            const auto height = m_blocks.back().header.number;
            if (h.number <= height && m_blocks[h.number].hash() == block.hash())
                return m_receipts[h.number];
            if (h.number != height + 1)
                throw Error(Errc::InvalidBlock, "expected block " + std::to_string(height + 1) + ", got " +
                                                    std::to_string(h.number));
            const auto &parent = m_blocks.back().header;
            if (h.parent_hash != m_blocks.back().hash())
                throw Error(Errc::InvalidBlock, "parent hash mismatch at " + std::to_string(h.number));

            Address signer;
            try
            {
                signer = crypto::recover_signer(h.seal_hash(), h.seal);
            }
            catch (const Error &)
            {
                throw Error(Errc::InvalidBlock, "unrecoverable seal");
            }
            if (signer != h.sealer)
                throw Error(Errc::InvalidBlock, "seal does not match sealer");
            try
            {
                verify_slot(h.sealer, h.timestamp);
            }
            catch (const Error &e)
            {
                throw Error(Errc::InvalidBlock, e.what());
            }
            if (h.gas_limit != next_gas_limit(parent.gas_limit, parent.gas_used, m_genesis.gas_floor, m_genesis.gas_ceiling))
                throw Error(Errc::InvalidBlock, "gas limit violates the adjustment rule");
            if (h.tx_root != Block::compute_tx_root(block.transactions))
                throw Error(Errc::InvalidBlock, "transaction root mismatch");
            if (h.vote && !m_validators.is_actionable(h.vote->candidate, h.vote->add))
                throw Error(Errc::InvalidBlock, "vote for a candidate already in the target state");

            Execution exec = execute(block.transactions, h.number, h.timestamp);
            if (exec.gas_used != h.gas_used || exec.gas_used > h.gas_limit)
                throw Error(Errc::InvalidBlock, "gas used mismatch");
            if (exec.state->state_root() != h.state_root)
                throw Error(Errc::InvalidBlock, "state root mismatch at " + std::to_string(h.number));
            receipts = exec.receipts;
            commit(block, std::move(exec));
        }
        notify(block, receipts);
        return receipts;
    }

    std::uint64_t Chain::height() const
    {
        std::shared_lock lock(m_mutex);
        return m_blocks.back().header.number;
    }

    Block Chain::head() const
    {
        std::shared_lock lock(m_mutex);
        return m_blocks.back();
    }

    Block Chain::block(std::uint64_t number) const
    {
        std::shared_lock lock(m_mutex);
        if (number >= m_blocks.size())
            throw Error(Errc::NotFound, "no block at height " + std::to_string(number));
        return m_blocks[number];
    }

    std::vector<Receipt> Chain::receipts(std::uint64_t number) const
    {
        std::shared_lock lock(m_mutex);
        if (number >= m_receipts.size())
            throw Error(Errc::NotFound, "no block at height " + std::to_string(number));
        return m_receipts[number];
    }

    bool Chain::has_receipt(const Hash32 &tx_hash) const
    {
        std::shared_lock lock(m_mutex);
        return m_tx_index.count(tx_hash) > 0;
    }

    Receipt Chain::receipt(const Hash32 &tx_hash) const
    {
        std::shared_lock lock(m_mutex);
        const auto it = m_tx_index.find(tx_hash);
        if (it == m_tx_index.end())
            throw Error(Errc::NotFound, "no transaction " + to_hex(tx_hash, true));
        return m_receipts[it->second.first][it->second.second];
    }

    std::shared_ptr<const contract::ContractStore> Chain::state() const
    {
        std::shared_lock lock(m_mutex);
        return m_state;
    }

    Hash32 Chain::state_root() const
    {
        std::shared_lock lock(m_mutex);
        return m_blocks.back().header.state_root;
    }

    ValidatorSet Chain::validators() const
    {
        std::shared_lock lock(m_mutex);
        return m_validators;
    }

    std::uint64_t Chain::balance(const Address &a) const
    {
        const auto it = m_genesis.alloc.find(a);
        return it == m_genesis.alloc.end() ? 0 : it->second;
    }

    json Chain::call(const Address &caller, std::string_view target, std::string_view method, const json &payload) const
    {
        const auto snapshot = state();
        return m_runtime->call(*snapshot, caller, target, method, payload);
    }

    void Chain::on_block(BlockListener listener)
    {
        std::unique_lock lock(m_mutex);
        m_listeners.push_back(std::move(listener));
    }
} // namespace dnas::ledger
