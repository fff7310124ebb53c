#pragma once

#include "dnas/contract/types.hpp"
#include "dnas/records/wine_record.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dnas::protocol
{
    using contract::NodeType;
    using contract::PeerEntry;
    using contract::PeerRole;
    using records::AttackClass;
    using records::ValidationLayer;

    enum class MemberKind
    {
        Winemaker,
        SupplyChainParticipant,
        WineConsumer,
        ConsortiumAdministrator,
    };

    std::string_view to_string(MemberKind kind) noexcept;
    MemberKind member_kind_from_string(std::string_view text);

    struct NodeRole
    {
        MemberKind kind = MemberKind::SupplyChainParticipant;
        NodeType node_type = NodeType::Validator;
    };

    /// Who a service instance acts for. The administrator also holds a
    /// registry role (it is a winemaker or participant in its own right).
    struct ServiceIdentity
    {
        std::string member_id;
        NodeRole role;
        PeerRole peer_role = PeerRole::Participant;
        std::string store_node;

        bool administrator() const noexcept { return role.kind == MemberKind::ConsortiumAdministrator; }
        bool consumer_instance() const noexcept { return role.kind == MemberKind::WineConsumer; }
    };

    struct LayerOutcome
    {
        ValidationLayer layer = ValidationLayer::OffChainDb;
        std::optional<AttackClass> attack; // empty on pass
        std::string details;

        bool passed() const noexcept { return !attack.has_value(); }
        nlohmann::json to_json() const;
    };

    struct ValidationResult
    {
        std::string wine_id; // as resolved; empty if nothing matched
        std::vector<LayerOutcome> layers; // execution trace, in order
        nlohmann::json overview;          // record view on full pass
        std::string session;              // acceptance token on full pass

        bool passed() const noexcept;
        std::optional<AttackClass> attack() const noexcept;
        std::optional<ValidationLayer> failed_layer() const noexcept;
        nlohmann::json to_json() const;
    };

    struct CreateReceipt
    {
        std::string wine_id;
        std::string content_id;
        Hash32 tx_hash{};
        std::uint64_t block_number = 0;
        nlohmann::json to_json() const;
    };

    struct AppendReceipt
    {
        std::string wine_id;
        std::string content_id;
        Hash32 tx_hash{};
        std::uint64_t block_number = 0;
        std::uint64_t write_count = 0;
        records::WineStatus status = records::WineStatus::Accepted;
        nlohmann::json to_json() const;
    };

    enum class MembershipState
    {
        Admitted,
        Pending,
    };

    struct OnboardResult
    {
        MembershipState state = MembershipState::Pending;
        bool bootstrap = false;    // inserted directly, no votes
        std::size_t requests = 0;  // propose requests fanned out
        nlohmann::json to_json() const;
    };

    /// A flow that stopped part-way. `stage` names the step that failed;
    /// later steps did not run.
    class FlowError : public Error
    {
    public:
        FlowError(std::string stage, Errc code, const std::string &message)
            : Error(code, stage + ": " + message), m_stage(std::move(stage))
        {
        }
        const std::string &stage() const noexcept { return m_stage; }

    private:
        std::string m_stage;
    };

    struct Response
    {
        int status = 200;
        nlohmann::json body = nlohmann::json::object();
        bool ok() const noexcept { return status == 200; }
    };

    int status_for(Errc code) noexcept;
} // namespace dnas::protocol
