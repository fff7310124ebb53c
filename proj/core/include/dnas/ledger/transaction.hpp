#pragma once

#include "dnas/crypto/json.hpp"

namespace dnas::ledger
{
    using crypto::Address;

    inline constexpr std::uint64_t kTxBaseGas = 21000;
    inline constexpr std::uint64_t kTxPayloadByteGas = 16;

    /// A contract call. `payload` is the canonical (sorted, compact) JSON of the arguments.
    struct Transaction
    {
        std::uint64_t chain_id = 0;
        Address sender;
        std::string target;
        std::string method;
        nlohmann::json payload = nlohmann::json::object();
        std::uint64_t nonce = 0;
        std::uint64_t gas_price = 0;

        Bytes signing_bytes() const;
        Hash32 signing_hash() const;
        std::uint64_t intrinsic_gas() const;
    };

    class SignedTransaction
    {
    public:
        SignedTransaction(Transaction tx, crypto::Signature sig);

        // Fills in tx.sender from the key.
        static SignedTransaction sign(Transaction tx, const crypto::KeyPair &key);

        const Transaction &tx() const noexcept { return m_tx; }
        const crypto::Signature &signature() const noexcept { return m_sig; }
        const Hash32 &hash() const noexcept { return m_hash; }

        // True iff the signature recovers to tx.sender.
        bool verify() const noexcept;

        nlohmann::json to_json() const;
        static SignedTransaction from_json(const nlohmann::json &j);

    private:
        Transaction m_tx;
        crypto::Signature m_sig;
        Hash32 m_hash{};
    };
} // namespace dnas::ledger
