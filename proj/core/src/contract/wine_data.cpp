#include "dnas/contract/runtime.hpp"

#include "dnas/crypto/tag_payload.hpp"

#include <array>

namespace dnas::contract
{
    using nlohmann::json;

    namespace
    {
        constexpr std::array<std::string_view, 6> kV1Methods{
            "createWineRecord", "validateWineRecordHash", "validateSignature",
            "appendWineRecord", "recordRead",             "getWineRecord",
        };

        [[noreturn]] void revert(const std::string &message) { throw Error(Errc::ContractReverted, message); }

        std::string wine_of(const json &payload)
        {
            auto wine_id = payload.at("wine_id").get<std::string>();
            if (wine_id.empty())
                revert("empty wine identifier");
            return wine_id;
        }

        void require_record(const WineDataStore &w, const std::string &wine_id)
        {
            if (w.writes(wine_id) == 0)
                revert("no wine record for " + wine_id);
        }

        void require_member(const ContractStore &s, const Address &caller)
        {
            if (!s.registry.is_member(caller))
                throw Error(Errc::Authorization, caller.hex() + " is not a consortium member");
        }

        std::string content_id_of(const json &payload)
        {
            return store::ContentId::parse(payload.at("data_hash").get<std::string>()).str();
        }

        json create(ContractStore &s, const CallContext &ctx, const json &p, std::vector<EventKind> &events)
        {
            const auto peer = s.registry.peers.find(ctx.sender);
            if (peer == s.registry.peers.end() || peer->second.role != PeerRole::Winemaker)
                throw Error(Errc::Role, ctx.sender.hex() + " lacks the winemaker role");

            const std::string wine_id = wine_of(p);
            if (s.wine.writes(wine_id) != 0)
                revert("wine record already exists: " + wine_id);

            const std::string cid = content_id_of(p);
            const auto pub = p.at("pub_addr").get<Address>();
            const Hash32 tag = hash_from_json(p.at("tag_hash"));
            const Hash32 device = hash_from_json(p.at("device_hash"));

            s.wine.data_hash[{wine_id, 1}] = cid;
            s.wine.pub_addr[wine_id] = pub;
            s.wine.tag_id[wine_id] = tag;
            s.wine.device_id[wine_id] = device;
            s.wine.write_count[wine_id] = 1;
            s.wine.read_count[wine_id] = 0;
            events.emplace_back(WineRecordCreated{wine_id, ctx.sender, device});
            return json{{"result", true}};
        }

        json validate_hash(const ContractStore &s, const json &p)
        {
            const std::string wine_id = wine_of(p);
            require_record(s.wine, wine_id);
            const auto latest = s.wine.data_hash.at({wine_id, s.wine.writes(wine_id)});
            return json{{"result", latest == p.at("data_hash").get<std::string>()}};
        }

        json validate_signature(const ContractStore &s, const json &p)
        {
            const std::string wine_id = wine_of(p);
            require_record(s.wine, wine_id);
            crypto::Signature sig;
            try
            {
                sig.v = p.at("v").get<std::uint8_t>();
                sig.r = fixed_from_hex<32>(p.at("r").get<std::string>());
                sig.s = fixed_from_hex<32>(p.at("s").get<std::string>());
            }
            catch (const Error &)
            {
                return json{{"result", false}};
            }
            const Hash32 digest =
                crypto::tag_payload_digest_hashed(wine_id, s.wine.tag_id.at(wine_id), s.wine.device_id.at(wine_id));
            try
            {
                return json{{"result", crypto::recover_signer(digest, sig) == s.wine.pub_addr.at(wine_id)}};
            }
            catch (const Error &)
            {
                return json{{"result", false}};
            }
        }

        json append(ContractStore &s, const CallContext &ctx, const json &p, std::vector<EventKind> &events)
        {
            require_member(s, ctx.sender);
            const std::string wine_id = wine_of(p);
            require_record(s.wine, wine_id);

            const std::uint64_t count = s.wine.writes(wine_id);
            if (p.at("expected_write_count").get<std::uint64_t>() != count)
                revert("stale write counter for " + wine_id);
            if (hash_from_json(p.at("tag_hash")) != s.wine.tag_id.at(wine_id))
                revert("tag identifier does not match the registered tag");
            if (hash_from_json(p.at("device_hash")) != s.wine.device_id.at(wine_id))
                revert("device identifier does not match the registered device");

            const std::string cid = content_id_of(p);
            const auto current = p.at("pub_addr").get<Address>();
            const Address previous = s.wine.pub_addr.at(wine_id);

            s.wine.write_count[wine_id] = count + 1;
            s.wine.data_hash[{wine_id, count + 1}] = cid;
            s.wine.pub_addr[wine_id] = current;
            events.emplace_back(WineRecordAppended{wine_id, previous, current, count + 1});
            return json{{"result", true}, {"write_count", count + 1}};
        }

        json record_read(ContractStore &s, const CallContext &ctx, const json &p)
        {
            require_member(s, ctx.sender);
            const std::string wine_id = wine_of(p);
            require_record(s.wine, wine_id);
            auto &reads = s.wine.read_count.at(wine_id);
            if (p.at("expected_read_count").get<std::uint64_t>() != reads)
                revert("stale read counter for " + wine_id);
            ++reads;
            return json{{"result", true}, {"read_count", reads}};
        }

        json get_record(const ContractStore &s, const json &p)
        {
            const std::string wine_id = wine_of(p);
            require_record(s.wine, wine_id);
            const std::uint64_t count = s.wine.writes(wine_id);
            return json{{"wine_id", wine_id},
                        {"write_count", count},
                        {"read_count", s.wine.read_count.at(wine_id)},
                        {"pub_addr", s.wine.pub_addr.at(wine_id)},
                        {"tag_hash", hash_to_json(s.wine.tag_id.at(wine_id))},
                        {"device_hash", hash_to_json(s.wine.device_id.at(wine_id))},
                        {"data_hash", s.wine.data_hash.at({wine_id, count})}};
        }
    } // namespace

    bool WineDataContract::has_method(std::string_view method) const
    {
        return std::find(kV1Methods.begin(), kV1Methods.end(), method) != kV1Methods.end();
    }

    json WineDataContract::invoke(ContractStore &store, const CallContext &ctx, std::string_view method,
                                  const json &payload, std::vector<EventKind> &events) const
    {
        if (method == "createWineRecord")
            return create(store, ctx, payload, events);
        if (method == "validateWineRecordHash")
            return validate_hash(store, payload);
        if (method == "validateSignature")
            return validate_signature(store, payload);
        if (method == "appendWineRecord")
            return append(store, ctx, payload, events);
        if (method == "recordRead")
            return record_read(store, ctx, payload);
        if (method == "getWineRecord")
            return get_record(store, payload);
        throw Error(Errc::NotFound, std::string(version()) + " has no method " + std::string(method));
    }

    bool WineDataContractV2::has_method(std::string_view method) const
    {
        return method == "getWineHistory" || WineDataContractV1::has_method(method);
    }

    json WineDataContractV2::invoke(ContractStore &store, const CallContext &ctx, std::string_view method,
                                    const json &payload, std::vector<EventKind> &events) const
    {
        if (method != "getWineHistory")
            return WineDataContractV1::invoke(store, ctx, method, payload, events);
        const std::string wine_id = wine_of(payload);
        require_record(store.wine, wine_id);
        json iterations = json::array();
        for (std::uint64_t i = 1; i <= store.wine.writes(wine_id); ++i)
            iterations.push_back(json{{"iteration", i}, {"data_hash", store.wine.data_hash.at({wine_id, i})}});
        return json{{"wine_id", wine_id}, {"iterations", std::move(iterations)}};
    }
} // namespace dnas::contract
