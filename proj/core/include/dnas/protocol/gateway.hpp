#pragma once

#include "dnas/ledger/chain.hpp"
#include "dnas/records/nfc_tag.hpp"

#include <functional>
#include <map>
#include <string>

namespace dnas::protocol
{
    /// A service's handle on its own chain node. Submissions are signed with
    /// the node account and gossiped; awaiting lets simulated time pass.
    class LedgerGateway
    {
    public:
        virtual ~LedgerGateway() = default;

        virtual crypto::Address address() const = 0;
        virtual SimTime now() const = 0;

        virtual Hash32 submit(std::string_view target, std::string_view method, const nlohmann::json &payload) = 0;
        // Throws Error(Errc::Timeout) if the receipt does not show up in time.
        virtual ledger::Receipt await_receipt(const Hash32 &tx_hash) = 0;
        // True once `condition` holds; false if `timeout` elapses first.
        virtual bool await(const std::function<bool()> &condition, SimTime timeout) = 0;

        virtual nlohmann::json call(std::string_view target, std::string_view method,
                                    const nlohmann::json &payload) const = 0;
        virtual ledger::ValidatorSet validators() const = 0;
        // Throws Error(Errc::Authorization) if this node is not a validator.
        virtual void propose_validator(const crypto::Address &candidate, bool add) = 0;
        virtual void on_block(ledger::BlockListener listener) = 0;

        ledger::Receipt transact(std::string_view target, std::string_view method, const nlohmann::json &payload)
        {
            return await_receipt(submit(target, method, payload));
        }
    };

    /// Service-to-service requests. Delivery is asynchronous and at-least-once.
    class Transport
    {
    public:
        virtual ~Transport() = default;
        virtual void send(const std::string &from, const std::string &to, const std::string &endpoint,
                          nlohmann::json payload) = 0;
    };

    /// The physical tags in circulation, by UID.
    class TagRegistry
    {
    public:
        records::NfcTag &add(records::NfcTag tag);
        records::NfcTag &at(const records::TagUid &uid);
        const records::NfcTag &at(const records::TagUid &uid) const;
        bool contains(const records::TagUid &uid) const { return m_tags.count(uid) != 0; }
        std::size_t size() const noexcept { return m_tags.size(); }

    private:
        std::map<records::TagUid, records::NfcTag> m_tags;
    };
} // namespace dnas::protocol
