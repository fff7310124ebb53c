#include "dnas/ledger/block.hpp"

#include "dnas/crypto/hash.hpp"

namespace dnas::ledger
{
    using nlohmann::json;

    namespace
    {
        ByteWriter header_fields(const BlockHeader &h)
        {
            ByteWriter w;
            w.u64(h.number)
                .raw(h.parent_hash)
                .raw(h.sealer.bytes())
                .u64(static_cast<std::uint64_t>(h.timestamp))
                .u64(h.gas_limit)
                .u64(h.gas_used)
                .raw(h.tx_root)
                .raw(h.state_root);
            if (h.vote)
                w.u8(1).raw(h.vote->candidate.bytes()).u8(h.vote->add ? 1 : 0);
            else
                w.u8(0);
            return w;
        }
    } // namespace

    Hash32 BlockHeader::seal_hash() const { return crypto::keccak256(header_fields(*this).bytes()); }

    Hash32 BlockHeader::hash() const
    {
        ByteWriter w = header_fields(*this);
        w.raw(seal.to_bytes());
        return crypto::keccak256(w.bytes());
    }

    Hash32 Block::compute_tx_root(const std::vector<SignedTransaction> &txs)
    {
        ByteWriter w;
        for (const auto &tx : txs)
            w.raw(tx.hash());
        return crypto::keccak256(w.bytes());
    }

    json Block::to_json() const
    {
        json txs = json::array();
        for (const auto &tx : transactions)
            txs.push_back(tx.to_json());
        json vote = header.vote ? json{{"candidate", header.vote->candidate}, {"add", header.vote->add}} : json(nullptr);
        return json{{"hash", hash_to_json(hash())},
                    {"number", header.number},
                    {"parent_hash", hash_to_json(header.parent_hash)},
                    {"sealer", header.sealer},
                    {"timestamp", header.timestamp},
                    {"gas_limit", header.gas_limit},
                    {"gas_used", header.gas_used},
                    {"tx_root", hash_to_json(header.tx_root)},
                    {"state_root", hash_to_json(header.state_root)},
                    {"vote", std::move(vote)},
                    {"seal", to_hex(header.seal.to_bytes(), true)},
                    {"transactions", std::move(txs)}};
    }

    Block Block::from_json(const json &j)
    {
        Block b;
        auto &h = b.header;
        h.number = j.at("number").get<std::uint64_t>();
        h.parent_hash = hash_from_json(j.at("parent_hash"));
        h.sealer = j.at("sealer").get<Address>();
        h.timestamp = j.at("timestamp").get<SimTime>();
        h.gas_limit = j.at("gas_limit").get<std::uint64_t>();
        h.gas_used = j.at("gas_used").get<std::uint64_t>();
        h.tx_root = hash_from_json(j.at("tx_root"));
        h.state_root = hash_from_json(j.at("state_root"));
        if (!j.at("vote").is_null())
            h.vote = Vote{j.at("vote").at("candidate").get<Address>(), j.at("vote").at("add").get<bool>()};
        h.seal = crypto::Signature::from_bytes(from_hex(j.at("seal").get<std::string>()));
        for (const auto &tx : j.at("transactions"))
            b.transactions.push_back(SignedTransaction::from_json(tx));
        return b;
    }

    json Receipt::to_json() const
    {
        return json{{"tx_hash", hash_to_json(tx_hash)},
                    {"block_number", block_number},
                    {"index", index},
                    {"sender", sender},
                    {"target", target},
                    {"method", method},
                    {"success", success},
                    {"error", error},
                    {"output", output},
                    {"gas_used", gas_used},
                    {"events", events}};
    }

    Receipt Receipt::from_json(const json &j)
    {
        Receipt r;
        r.tx_hash = hash_from_json(j.at("tx_hash"));
        r.block_number = j.at("block_number").get<std::uint64_t>();
        r.index = j.at("index").get<std::size_t>();
        r.sender = j.at("sender").get<Address>();
        r.target = j.at("target").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.success = j.at("success").get<bool>();
        r.error = j.at("error").get<std::string>();
        r.output = j.at("output");
        r.gas_used = j.at("gas_used").get<std::uint64_t>();
        r.events = j.at("events").get<std::vector<contract::ContractEvent>>();
        return r;
    }
} // namespace dnas::ledger
