#pragma once

#include "dnas/contract/types.hpp"
#include "dnas/records/wine_record.hpp"

#include <functional>
#include <map>
#include <shared_mutex>

namespace dnas::records
{
    using FlagListener = std::function<void(const WineRecord &, const ValidationFailure &)>;

    /// Embedded ordered key-value store of wine records keyed by wine id,
    /// with a secondary index by tag UID. Readers run concurrently, writers
    /// are serialized.
    class RecordDb
    {
    public:
        // CRUD with role checks: only winemakers create, update or delete.
        void create(contract::PeerRole caller, WineRecord record);
        WineRecord get(const std::string &wine_id) const;
        std::optional<WineRecord> find(const std::string &wine_id) const;
        std::optional<WineRecord> find_by_uid(const TagUid &uid) const;
        void update(contract::PeerRole caller, WineRecord record);
        void remove(contract::PeerRole caller, const std::string &wine_id);

        // Mutation path used by the blockchain service on behalf of any member
        // (custody transfers, counter mirrors). Same invariants as update().
        WineRecord mutate(const std::string &wine_id, const std::function<void(WineRecord &)> &change);

        // Appends a failure, flags the record and notifies listeners.
        WineRecord log_unsuccessful_validation(const std::string &wine_id, const ValidationFailure &failure);
        void on_flag(FlagListener listener);

        std::size_t size() const;
        std::vector<std::string> wine_ids() const;
        nlohmann::json export_json() const;
        void import_json(const nlohmann::json &j);

    private:
        static void check_transition(const WineRecord &before, const WineRecord &after);
        void put_locked(WineRecord record);

        mutable std::shared_mutex m_mutex;
        std::map<std::string, WineRecord> m_records;
        std::map<TagUid, std::string> m_by_uid;
        std::vector<FlagListener> m_listeners;
    };
} // namespace dnas::records
