#include "dnas/contract/store.hpp"

#include "dnas/crypto/hash.hpp"

namespace dnas::contract
{
    using nlohmann::json;

    std::uint64_t WineDataStore::writes(const std::string &wine_id) const
    {
        const auto it = write_count.find(wine_id);
        return it == write_count.end() ? 0 : it->second;
    }

    std::uint32_t PeerRegistryStore::consensus_level() const
    {
        if (consensus_override)
            return *consensus_override;
        const auto n = static_cast<std::uint32_t>(peers.size());
        return std::max<std::uint32_t>(1, (n + 1) / 2);
    }

    ContractStore ContractStore::genesis(const Address &admin, std::uint32_t bootstrap_count)
    {
        ContractStore s;
        s.registry.admin = admin;
        s.registry.bootstrap_count = bootstrap_count;
        s.proxy.owner = admin;
        return s;
    }

    json ContractStore::to_json() const
    {
        json records = json::object();
        for (const auto &[wine_id, count] : wine.write_count)
        {
            json hashes = json::array();
            for (std::uint64_t i = 1; i <= count; ++i)
                hashes.push_back(wine.data_hash.at({wine_id, i}));
            records[wine_id] = json{{"data_hash", std::move(hashes)},
                                    {"pub_addr", wine.pub_addr.at(wine_id)},
                                    {"tag_id", hash_to_json(wine.tag_id.at(wine_id))},
                                    {"device_id", hash_to_json(wine.device_id.at(wine_id))},
                                    {"write_count", count},
                                    {"read_count", wine.read_count.at(wine_id)}};
        }

        json peers = json::object();
        for (const auto &[addr, entry] : registry.peers)
            peers[addr.hex()] = entry;
        json votes = json::array();
        for (const auto &[key, voters] : registry.votes)
            votes.push_back(json{{"candidate", key.candidate}, {"add", key.add}, {"voters", voters}});
        json proposed = json::object();
        for (const auto &[addr, entry] : registry.proposed)
            proposed[addr.hex()] = entry;

        json impl = proxy.current_implementation ? json(*proxy.current_implementation) : json(nullptr);
        json override_level = registry.consensus_override ? json(*registry.consensus_override) : json(nullptr);

        return json{{"wine", {{"records", std::move(records)}}},
                    {"registry",
                     {{"peers", std::move(peers)},
                      {"votes", std::move(votes)},
                      {"proposed", std::move(proposed)},
                      {"consensus_override", std::move(override_level)},
                      {"bootstrap_count", registry.bootstrap_count},
                      {"admin", registry.admin}}},
                    {"proxy",
                     {{"current_implementation", std::move(impl)},
                      {"initialize_counter", proxy.initialize_counter},
                      {"owner", proxy.owner}}}};
    }

    ContractStore ContractStore::from_json(const json &j)
    {
        ContractStore s;
        for (const auto &[wine_id, r] : j.at("wine").at("records").items())
        {
            const auto &hashes = r.at("data_hash");
            for (std::size_t i = 0; i < hashes.size(); ++i)
                s.wine.data_hash[{wine_id, i + 1}] = hashes[i].get<std::string>();
            s.wine.pub_addr[wine_id] = r.at("pub_addr").get<Address>();
            s.wine.tag_id[wine_id] = hash_from_json(r.at("tag_id"));
            s.wine.device_id[wine_id] = hash_from_json(r.at("device_id"));
            s.wine.write_count[wine_id] = r.at("write_count").get<std::uint64_t>();
            s.wine.read_count[wine_id] = r.at("read_count").get<std::uint64_t>();
        }

        const auto &reg = j.at("registry");
        for (const auto &[addr, entry] : reg.at("peers").items())
            s.registry.peers[Address::from_hex(addr)] = entry.get<PeerEntry>();
        for (const auto &v : reg.at("votes"))
            s.registry.votes[{v.at("candidate").get<Address>(), v.at("add").get<bool>()}] =
                v.at("voters").get<std::set<Address>>();
        for (const auto &[addr, entry] : reg.at("proposed").items())
            s.registry.proposed[Address::from_hex(addr)] = entry.get<PeerEntry>();
        if (!reg.at("consensus_override").is_null())
            s.registry.consensus_override = reg.at("consensus_override").get<std::uint32_t>();
        s.registry.bootstrap_count = reg.at("bootstrap_count").get<std::uint32_t>();
        s.registry.admin = reg.at("admin").get<Address>();

        const auto &px = j.at("proxy");
        if (!px.at("current_implementation").is_null())
            s.proxy.current_implementation = px.at("current_implementation").get<std::string>();
        s.proxy.initialize_counter = px.at("initialize_counter").get<std::map<std::string, std::uint32_t>>();
        s.proxy.owner = px.at("owner").get<Address>();
        return s;
    }

    Hash32 ContractStore::state_root() const { return crypto::keccak256(as_bytes(to_json().dump())); }
} // namespace dnas::contract
