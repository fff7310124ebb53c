#pragma once

#include "dnas/crypto/json.hpp"
#include "dnas/store/content_id.hpp"

#include <variant>

namespace dnas::contract
{
    using crypto::Address;

    enum class PeerRole
    {
        Winemaker,
        Participant,
    };

    enum class NodeType
    {
        Validator,
        Listener,
    };

    std::string_view to_string(PeerRole role) noexcept;
    std::string_view to_string(NodeType type) noexcept;
    PeerRole peer_role_from_string(std::string_view text);
    NodeType node_type_from_string(std::string_view text);

    struct PeerEntry
    {
        Address address;
        PeerRole role = PeerRole::Participant;
        std::string node_id;
        NodeType node_type = NodeType::Validator;
        SimTime joined_at = 0;

        friend bool operator==(const PeerEntry &, const PeerEntry &) = default;
    };

    void to_json(nlohmann::json &j, const PeerEntry &p);
    void from_json(const nlohmann::json &j, PeerEntry &p);

    struct WineRecordCreated
    {
        std::string wine_id;
        Address creator;
        Hash32 hashed_device_id{};
        friend bool operator==(const WineRecordCreated &, const WineRecordCreated &) = default;
    };

    struct WineRecordAppended
    {
        std::string wine_id;
        Address previous;
        Address current;
        std::uint64_t write_count = 0;
        friend bool operator==(const WineRecordAppended &, const WineRecordAppended &) = default;
    };

    struct PeerAdded
    {
        PeerEntry candidate;
        friend bool operator==(const PeerAdded &, const PeerAdded &) = default;
    };

    struct PeerRemoved
    {
        PeerEntry candidate;
        friend bool operator==(const PeerRemoved &, const PeerRemoved &) = default;
    };

    struct Upgraded
    {
        std::string version;
        friend bool operator==(const Upgraded &, const Upgraded &) = default;
    };

    using EventKind = std::variant<WineRecordCreated, WineRecordAppended, PeerAdded, PeerRemoved, Upgraded>;

    std::string_view event_name(const EventKind &kind);

    struct ContractEvent
    {
        EventKind kind;
        std::uint64_t block_number = 0;
        Hash32 tx_hash{};

        friend bool operator==(const ContractEvent &, const ContractEvent &) = default;
    };

    nlohmann::json event_to_json(const EventKind &kind);
    EventKind event_from_json(const nlohmann::json &j);
    void to_json(nlohmann::json &j, const ContractEvent &e);
    void from_json(const nlohmann::json &j, ContractEvent &e);
} // namespace dnas::contract
