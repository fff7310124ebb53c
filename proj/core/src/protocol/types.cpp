#include "dnas/protocol/types.hpp"

#include "dnas/crypto/json.hpp"

#include <array>

namespace dnas::protocol
{
    using nlohmann::json;

    namespace
    {
        constexpr std::array<std::pair<MemberKind, std::string_view>, 4> kKinds{{
            {MemberKind::Winemaker, "winemaker"},
            {MemberKind::SupplyChainParticipant, "participant"},
            {MemberKind::WineConsumer, "consumer"},
            {MemberKind::ConsortiumAdministrator, "administrator"},
        }};
    } // namespace

    std::string_view to_string(MemberKind kind) noexcept
    {
        for (const auto &[k, name] : kKinds)
            if (k == kind)
                return name;
        return "unknown";
    }

    MemberKind member_kind_from_string(std::string_view text)
    {
        for (const auto &[k, name] : kKinds)
            if (name == text)
                return k;
        throw Error(Errc::Decode, "unknown member kind '" + std::string(text) + "'");
    }

    json LayerOutcome::to_json() const
    {
        return json{{"layer", records::to_string(layer)},
                    {"result", attack ? std::string(records::to_string(*attack)) : std::string("pass")},
                    {"details", details}};
    }

    bool ValidationResult::passed() const noexcept
    {
        return layers.size() == 3 && !attack().has_value();
    }

    std::optional<AttackClass> ValidationResult::attack() const noexcept
    {
        for (const auto &l : layers)
            if (l.attack)
                return l.attack;
        return std::nullopt;
    }

    std::optional<ValidationLayer> ValidationResult::failed_layer() const noexcept
    {
        for (const auto &l : layers)
            if (l.attack)
                return l.layer;
        return std::nullopt;
    }

    json ValidationResult::to_json() const
    {
        json outcomes = json::array();
        for (const auto &l : layers)
            outcomes.push_back(l.to_json());
        json j{{"wine_id", wine_id}, {"passed", passed()}, {"outcomes", outcomes}};
        if (auto a = attack())
        {
            j["attack"] = records::to_string(*a);
            j["layer"] = records::to_string(*failed_layer());
        }
        if (passed())
        {
            j["overview"] = overview;
            j["session"] = session;
        }
        return j;
    }

    json CreateReceipt::to_json() const
    {
        return json{{"wine_id", wine_id},
                    {"content_id", content_id},
                    {"tx_hash", hash_to_json(tx_hash)},
                    {"block_number", block_number}};
    }

    json AppendReceipt::to_json() const
    {
        return json{{"wine_id", wine_id},
                    {"content_id", content_id},
                    {"tx_hash", hash_to_json(tx_hash)},
                    {"block_number", block_number},
                    {"write_count", write_count},
                    {"status", records::to_string(status)}};
    }

    json OnboardResult::to_json() const
    {
        return json{{"state", state == MembershipState::Admitted ? "admitted" : "pending"},
                    {"bootstrap", bootstrap},
                    {"requests", requests}};
    }

    int status_for(Errc code) noexcept
    {
        switch (code)
        {
        case Errc::Decode:
        case Errc::Parse:
        case Errc::InvalidArgument:
            return 400;
        case Errc::Auth:
        case Errc::Authorization:
        case Errc::Role:
        case Errc::Membership:
            return 403;
        case Errc::NotFound:
        case Errc::Routing:
            return 404;
        case Errc::Duplicate:
        case Errc::State:
        case Errc::Sequencing:
        case Errc::Rejected:
        case Errc::AlreadyInitialized:
        case Errc::ContractReverted:
            return 409;
        case Errc::Timeout:
            return 504;
        default:
            return 500;
        }
    }
} // namespace dnas::protocol
