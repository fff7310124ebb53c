#include "dnas/contract/runtime.hpp"

namespace dnas::contract
{
    using nlohmann::json;

    Runtime::Runtime()
    {
        register_implementation(std::make_unique<WineDataContractV1>());
        register_implementation(std::make_unique<WineDataContractV2>());
    }

    void Runtime::register_implementation(std::unique_ptr<WineDataContract> impl)
    {
        const std::string key(impl->version());
        m_impls[key] = std::move(impl);
    }

    bool Runtime::knows_version(std::string_view version) const { return m_impls.find(version) != m_impls.end(); }

    json Runtime::proxy(ContractStore &store, const CallContext &ctx, std::string_view method, const json &payload,
                        std::vector<EventKind> &events) const
    {
        if (method == "upgradeTo")
        {
            if (ctx.sender != store.proxy.owner)
                throw Error(Errc::Authorization, "only the proxy owner may upgrade");
            const auto version = payload.at("version").get<std::string>();
            if (!knows_version(version))
                throw Error(Errc::InvalidArgument, "unknown implementation " + version);
            auto &counter = store.proxy.initialize_counter[version];
            if (counter != 0)
                throw Error(Errc::AlreadyInitialized, version + " was already initialized");
            counter = 1;
            store.proxy.current_implementation = version;
            events.emplace_back(Upgraded{version});
            return json{{"result", true}, {"version", version}};
        }
        if (method == "implementation")
            return json{{"version", store.proxy.current_implementation ? json(*store.proxy.current_implementation)
                                                                       : json(nullptr)}};

        if (!store.proxy.current_implementation)
            throw Error(Errc::Uninitialized, "proxy has no implementation");
        const auto &impl = *m_impls.find(*store.proxy.current_implementation)->second;
        if (!impl.has_method(method))
            throw Error(Errc::NotFound, std::string(impl.version()) + " has no method " + std::string(method));
        // Delegate with the original sender and the proxy's storage.
        return impl.invoke(store, ctx, method, payload, events);
    }

    CallResult Runtime::execute(ContractStore &store, const CallContext &ctx, std::string_view target,
                                std::string_view method, const json &payload) const
    {
        std::vector<EventKind> kinds;
        json output;
        try
        {
            if (target == kProxyTarget)
                output = proxy(store, ctx, method, payload, kinds);
            else if (target == kRegistryTarget)
                output = invoke_registry(store, ctx, method, payload, kinds);
            else
                throw Error(Errc::NotFound, "no contract at " + std::string(target));
        }
        catch (const json::exception &e)
        {
            throw Error(Errc::Decode, std::string("malformed call payload: ") + e.what());
        }

        CallResult result{std::move(output), {}};
        for (auto &k : kinds)
            result.events.push_back(ContractEvent{std::move(k), ctx.block_number, ctx.tx_hash});
        return result;
    }

    json Runtime::call(const ContractStore &store, const Address &caller, std::string_view target,
                       std::string_view method, const json &payload) const
    {
        ContractStore scratch = store;
        return execute(scratch, CallContext{caller, 0, 0, {}}, target, method, payload).output;
    }
} // namespace dnas::contract
