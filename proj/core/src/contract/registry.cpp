#include "dnas/contract/runtime.hpp"

namespace dnas::contract
{
    using nlohmann::json;

    namespace
    {
        void require_admin(const ContractStore &s, const Address &caller)
        {
            if (caller != s.registry.admin)
                throw Error(Errc::Authorization, "only the consortium administrator may do this");
        }

        json peers_of(const PeerRegistryStore &r)
        {
            json out = json::array();
            for (const auto &[addr, entry] : r.peers)
                out.push_back(entry);
            return out;
        }

        std::size_t live_votes(const PeerRegistryStore &r, const std::set<Address> &voters)
        {
            return static_cast<std::size_t>(
                std::count_if(voters.begin(), voters.end(), [&](const Address &v) { return r.is_member(v); }));
        }

        void clear_candidate(PeerRegistryStore &r, const Address &candidate)
        {
            r.votes.erase({candidate, true});
            r.votes.erase({candidate, false});
            r.proposed.erase(candidate);
        }

        json bootstrap_add(ContractStore &s, const CallContext &ctx, const json &p, std::vector<EventKind> &events)
        {
            require_admin(s, ctx.sender);
            auto &r = s.registry;
            if (r.peers.size() >= r.bootstrap_count)
                throw Error(Errc::State, "bootstrap stage is over; new peers need consortium votes");
            auto entry = p.at("candidate").get<PeerEntry>();
            if (r.is_member(entry.address))
                throw Error(Errc::Duplicate, entry.address.hex() + " is already a member");
            entry.joined_at = ctx.timestamp;
            r.peers[entry.address] = entry;
            clear_candidate(r, entry.address);
            events.emplace_back(PeerAdded{entry});
            return json{{"result", true}, {"size", r.peers.size()}};
        }

        json propose(ContractStore &s, const CallContext &ctx, const json &p, std::vector<EventKind> &events)
        {
            auto &r = s.registry;
            if (!r.is_member(ctx.sender))
                throw Error(Errc::Authorization, ctx.sender.hex() + " is not a consortium member");
            const bool add = p.at("add").get<bool>();
            auto entry = p.at("candidate").get<PeerEntry>();
            const Address candidate = entry.address;
            if (add && r.is_member(candidate))
                throw Error(Errc::Duplicate, candidate.hex() + " is already a member");
            if (!add && !r.is_member(candidate))
                throw Error(Errc::NotFound, candidate.hex() + " is not a member");

            if (add)
                r.proposed.try_emplace(candidate, entry);
            auto &voters = r.votes[{candidate, add}];
            voters.insert(ctx.sender);

            // Evaluated on every vote event, including repeats, so a lowered
            // consensus level takes effect on the next vote.
            const std::size_t tally = live_votes(r, voters);
            const std::uint32_t required = r.consensus_level();
            bool applied = false;
            if (tally >= required)
            {
                applied = true;
                if (add)
                {
                    PeerEntry admitted = r.proposed.at(candidate);
                    admitted.joined_at = ctx.timestamp;
                    r.peers[candidate] = admitted;
                    events.emplace_back(PeerAdded{admitted});
                }
                else
                {
                    PeerEntry removed = r.peers.at(candidate);
                    r.peers.erase(candidate);
                    events.emplace_back(PeerRemoved{removed});
                }
                clear_candidate(r, candidate);
            }
            return json{{"tally", tally}, {"required", required}, {"applied", applied}};
        }

        json set_level(ContractStore &s, const CallContext &ctx, const json &p)
        {
            require_admin(s, ctx.sender);
            const auto &level = p.at("level");
            if (level.is_null())
            {
                s.registry.consensus_override.reset();
            }
            else
            {
                const auto value = level.get<std::int64_t>();
                if (value < 1)
                    throw Error(Errc::InvalidArgument, "consensus level must be at least 1");
                s.registry.consensus_override = static_cast<std::uint32_t>(value);
            }
            return json{{"consensus_level", s.registry.consensus_level()}};
        }
    } // namespace

    json invoke_registry(ContractStore &store, const CallContext &ctx, std::string_view method, const json &payload,
                         std::vector<EventKind> &events)
    {
        if (method == "getPeers")
            return peers_of(store.registry);
        if (method == "isPeer")
            return json{{"result", store.registry.is_member(payload.at("address").get<Address>())}};
        if (method == "getConsensusLevel")
            return json{{"consensus_level", store.registry.consensus_level()}};
        if (method == "getBootstrapCount")
            return json{{"bootstrap_count", store.registry.bootstrap_count}, {"size", store.registry.peers.size()}};
        if (method == "bootstrapAddPeer")
            return bootstrap_add(store, ctx, payload, events);
        if (method == "proposePeer")
            return propose(store, ctx, payload, events);
        if (method == "setConsensusLevel")
            return set_level(store, ctx, payload);
        throw Error(Errc::NotFound, "PeerRegistryContract has no method " + std::string(method));
    }
} // namespace dnas::contract
