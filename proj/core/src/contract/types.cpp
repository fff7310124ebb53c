#include "dnas/contract/types.hpp"

namespace dnas::contract
{
    using nlohmann::json;

    std::string_view to_string(PeerRole role) noexcept
    {
        return role == PeerRole::Winemaker ? "winemaker" : "participant";
    }

    std::string_view to_string(NodeType type) noexcept
    {
        return type == NodeType::Validator ? "validator" : "listener";
    }

    PeerRole peer_role_from_string(std::string_view text)
    {
        if (text == "winemaker")
            return PeerRole::Winemaker;
        if (text == "participant")
            return PeerRole::Participant;
        throw Error(Errc::Decode, "unknown peer role: " + std::string(text));
    }

    NodeType node_type_from_string(std::string_view text)
    {
        if (text == "validator")
            return NodeType::Validator;
        if (text == "listener")
            return NodeType::Listener;
        throw Error(Errc::Decode, "unknown node type: " + std::string(text));
    }

    void to_json(json &j, const PeerEntry &p)
    {
        j = json{{"address", p.address},
                 {"role", to_string(p.role)},
                 {"node_id", p.node_id},
                 {"node_type", to_string(p.node_type)},
                 {"joined_at", p.joined_at}};
    }

    void from_json(const json &j, PeerEntry &p)
    {
        p.address = j.at("address").get<Address>();
        p.role = peer_role_from_string(j.at("role").get<std::string>());
        p.node_id = j.value("node_id", std::string{});
        p.node_type = node_type_from_string(j.value("node_type", std::string("validator")));
        p.joined_at = j.value("joined_at", SimTime{0});
    }

    namespace
    {
        template <class... Fs>
        struct Overloaded : Fs...
        {
            using Fs::operator()...;
        };
        template <class... Fs>
        Overloaded(Fs...) -> Overloaded<Fs...>;
    } // namespace

    std::string_view event_name(const EventKind &kind)
    {
        return std::visit(Overloaded{
                              [](const WineRecordCreated &) { return std::string_view("WineRecordCreated"); },
                              [](const WineRecordAppended &) { return std::string_view("WineRecordAppended"); },
                              [](const PeerAdded &) { return std::string_view("PeerAdded"); },
                              [](const PeerRemoved &) { return std::string_view("PeerRemoved"); },
                              [](const Upgraded &) { return std::string_view("Upgraded"); },
                          },
                          kind);
    }

    json event_to_json(const EventKind &kind)
    {
        json j = std::visit(Overloaded{
                                [](const WineRecordCreated &e) {
                                    return json{{"wine_id", e.wine_id},
                                                {"creator", e.creator},
                                                {"hashed_device_id", hash_to_json(e.hashed_device_id)}};
                                },
                                [](const WineRecordAppended &e) {
                                    return json{{"wine_id", e.wine_id},
                                                {"previous", e.previous},
                                                {"current", e.current},
                                                {"write_count", e.write_count}};
                                },
                                [](const PeerAdded &e) { return json{{"candidate", e.candidate}}; },
                                [](const PeerRemoved &e) { return json{{"candidate", e.candidate}}; },
                                [](const Upgraded &e) { return json{{"version", e.version}}; },
                            },
                            kind);
        j["event"] = event_name(kind);
        return j;
    }

    EventKind event_from_json(const json &j)
    {
        const auto name = j.at("event").get<std::string>();
        if (name == "WineRecordCreated")
            return WineRecordCreated{j.at("wine_id").get<std::string>(), j.at("creator").get<Address>(),
                                     hash_from_json(j.at("hashed_device_id"))};
        if (name == "WineRecordAppended")
            return WineRecordAppended{j.at("wine_id").get<std::string>(), j.at("previous").get<Address>(),
                                      j.at("current").get<Address>(), j.at("write_count").get<std::uint64_t>()};
        if (name == "PeerAdded")
            return PeerAdded{j.at("candidate").get<PeerEntry>()};
        if (name == "PeerRemoved")
            return PeerRemoved{j.at("candidate").get<PeerEntry>()};
        if (name == "Upgraded")
            return Upgraded{j.at("version").get<std::string>()};
        throw Error(Errc::Decode, "unknown event: " + name);
    }

    void to_json(json &j, const ContractEvent &e)
    {
        j = event_to_json(e.kind);
        j["block_number"] = e.block_number;
        j["tx_hash"] = hash_to_json(e.tx_hash);
    }

    void from_json(const json &j, ContractEvent &e)
    {
        e.kind = event_from_json(j);
        e.block_number = j.at("block_number").get<std::uint64_t>();
        e.tx_hash = hash_from_json(j.at("tx_hash"));
    }
} // namespace dnas::contract
