#include "dnas/ledger/transaction.hpp"

#include "dnas/crypto/hash.hpp"

namespace dnas::ledger
{
    using nlohmann::json;

    Bytes Transaction::signing_bytes() const
    {
        ByteWriter w;
        w.u64(chain_id).raw(sender.bytes()).field(target).field(method).field(payload.dump()).u64(nonce).u64(gas_price);
        return w.take();
    }

    Hash32 Transaction::signing_hash() const { return crypto::keccak256(signing_bytes()); }

    std::uint64_t Transaction::intrinsic_gas() const
    {
        return kTxBaseGas + kTxPayloadByteGas * static_cast<std::uint64_t>(payload.dump().size());
    }

    SignedTransaction::SignedTransaction(Transaction tx, crypto::Signature sig) : m_tx(std::move(tx)), m_sig(sig)
    {
        ByteWriter w;
        w.raw(m_tx.signing_bytes()).raw(m_sig.to_bytes());
        m_hash = crypto::keccak256(w.bytes());
    }

    SignedTransaction SignedTransaction::sign(Transaction tx, const crypto::KeyPair &key)
    {
        tx.sender = key.address();
        const auto sig = crypto::sign_digest(tx.signing_hash(), key);
        return SignedTransaction(std::move(tx), sig);
    }

    bool SignedTransaction::verify() const noexcept
    {
        try
        {
            return crypto::recover_signer(m_tx.signing_hash(), m_sig) == m_tx.sender;
        }
        catch (const std::exception &)
        {
            return false;
        }
    }

    json SignedTransaction::to_json() const
    {
        return json{{"hash", hash_to_json(m_hash)},
                    {"chain_id", m_tx.chain_id},
                    {"sender", m_tx.sender},
                    {"target", m_tx.target},
                    {"method", m_tx.method},
                    {"payload", m_tx.payload},
                    {"nonce", m_tx.nonce},
                    {"gas_price", m_tx.gas_price},
                    {"signature", m_sig}};
    }

    SignedTransaction SignedTransaction::from_json(const json &j)
    {
        Transaction tx;
        tx.chain_id = j.at("chain_id").get<std::uint64_t>();
        tx.sender = j.at("sender").get<Address>();
        tx.target = j.at("target").get<std::string>();
        tx.method = j.at("method").get<std::string>();
        tx.payload = j.at("payload");
        tx.nonce = j.at("nonce").get<std::uint64_t>();
        tx.gas_price = j.at("gas_price").get<std::uint64_t>();
        return SignedTransaction(std::move(tx), j.at("signature").get<crypto::Signature>());
    }
} // namespace dnas::ledger
