#pragma once

#include "dnas/crypto/json.hpp"
#include "dnas/records/nfc_tag.hpp"

#include <vector>

namespace dnas::records
{
    using crypto::Address;

    enum class WineStatus
    {
        Created,
        InTransit,
        Accepted,
        Sold,
        Flagged,
        Error, // creation failed on-chain; retained for audit
    };

    enum class AttackClass
    {
        Modification,
        Cloning,
        Reapplication,
    };

    enum class ValidationLayer
    {
        OffChainDb,
        OnChain,
        ContentStore,
    };

    std::string_view to_string(WineStatus s) noexcept;
    std::string_view to_string(AttackClass c) noexcept;
    std::string_view to_string(ValidationLayer l) noexcept;
    WineStatus wine_status_from_string(std::string_view s);
    AttackClass attack_class_from_string(std::string_view s);
    ValidationLayer validation_layer_from_string(std::string_view s);

    struct TagBinding
    {
        TagUid uid{};
        std::string device_id;
        crypto::Signature signature;
        std::optional<TagPassword> password;
    };

    struct TransactionEntry
    {
        std::string tx_hash;
        std::uint64_t block_number = 0;
        Address actor;
        SimTime timestamp = 0;
        std::string method;
        friend bool operator==(const TransactionEntry &, const TransactionEntry &) = default;
    };

    struct SupplyChainEntry
    {
        std::string member;
        Address custodian;
        std::string action; // created | accepted | purchased
        SimTime timestamp = 0;
        std::uint64_t write_count = 0;
        friend bool operator==(const SupplyChainEntry &, const SupplyChainEntry &) = default;
    };

    struct ValidationFailure
    {
        AttackClass attack_class = AttackClass::Modification;
        ValidationLayer layer = ValidationLayer::OffChainDb;
        SimTime timestamp = 0;
        std::string details;
        friend bool operator==(const ValidationFailure &, const ValidationFailure &) = default;
    };

    struct WineRecord
    {
        std::string wine_id;
        std::string owner_member; // winemaker that created the record
        nlohmann::json pedigree_data = nlohmann::json::object();
        std::vector<TransactionEntry> transaction_data;
        std::vector<SupplyChainEntry> supply_chain_data;
        std::vector<ValidationFailure> unsuccessful_validation_data;
        WineStatus wine_status = WineStatus::Created;
        std::uint64_t write_count = 0;
        std::uint64_t read_count = 0;
        Address custodian;
        std::string content_id;
        TagBinding tag;

        nlohmann::json to_json() const;
        static WineRecord from_json(const nlohmann::json &j);
    };

    /// Canonical subset bytes published to the content store: sorted-key
    /// compact JSON of {wine_id, pedigree_data, wine_status, supply_chain_data,
    /// subset_version}, where subset_version is the record's write count.
    std::string derive_subset(const WineRecord &record);

    nlohmann::json to_json(const SupplyChainEntry &e);
} // namespace dnas::records
