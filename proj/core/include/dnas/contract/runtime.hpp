#pragma once

#include "dnas/contract/store.hpp"

#include <memory>
#include <vector>

namespace dnas::contract
{
    inline constexpr std::string_view kProxyTarget = "proxy";
    inline constexpr std::string_view kRegistryTarget = "registry";
    inline constexpr std::string_view kVersionV1 = "WineDataContract/v1";
    inline constexpr std::string_view kVersionV2 = "WineDataContract/v2";

    struct CallContext
    {
        Address sender;
        std::uint64_t block_number = 0;
        SimTime timestamp = 0;
        Hash32 tx_hash{};
    };

    struct CallResult
    {
        nlohmann::json output;
        std::vector<ContractEvent> events;
    };

    /// A wine-data implementation. Instances are stateless; all state lives
    /// in the store the proxy hands them. The base class carries the v1 methods.
    class WineDataContract
    {
    public:
        virtual ~WineDataContract() = default;
        virtual std::string_view version() const noexcept = 0;
        virtual bool has_method(std::string_view method) const;
        virtual nlohmann::json invoke(ContractStore &store, const CallContext &ctx, std::string_view method,
                                      const nlohmann::json &payload, std::vector<EventKind> &events) const;
    };

    class WineDataContractV1 : public WineDataContract
    {
    public:
        std::string_view version() const noexcept override { return kVersionV1; }
    };

    // Adds getWineHistory; storage layout unchanged.
    class WineDataContractV2 : public WineDataContractV1
    {
    public:
        std::string_view version() const noexcept override { return kVersionV2; }
        bool has_method(std::string_view method) const override;
        nlohmann::json invoke(ContractStore &store, const CallContext &ctx, std::string_view method,
                              const nlohmann::json &payload, std::vector<EventKind> &events) const override;
    };

    /// Executes contract calls natively. `execute` mutates the store in place
    /// and throws dnas::Error on revert; callers that need all-or-nothing
    /// semantics run it on a copy.
    class Runtime
    {
    public:
        Runtime();

        void register_implementation(std::unique_ptr<WineDataContract> impl);
        bool knows_version(std::string_view version) const;

        CallResult execute(ContractStore &store, const CallContext &ctx, std::string_view target,
                           std::string_view method, const nlohmann::json &payload) const;

        // Read-only call against a snapshot; never mutates the caller's store.
        nlohmann::json call(const ContractStore &store, const Address &caller, std::string_view target,
                            std::string_view method, const nlohmann::json &payload) const;

    private:
        nlohmann::json proxy(ContractStore &store, const CallContext &ctx, std::string_view method,
                             const nlohmann::json &payload, std::vector<EventKind> &events) const;

        std::map<std::string, std::unique_ptr<WineDataContract>, std::less<>> m_impls;
    };

    // Registry contract entry point; exposed for direct unit testing.
    nlohmann::json invoke_registry(ContractStore &store, const CallContext &ctx, std::string_view method,
                                   const nlohmann::json &payload, std::vector<EventKind> &events);
} // namespace dnas::contract
