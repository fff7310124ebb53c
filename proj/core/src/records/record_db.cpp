#include "dnas/records/record_db.hpp"

#include <mutex>

namespace dnas::records
{
    using nlohmann::json;

    namespace
    {
        void require_winemaker(contract::PeerRole caller, std::string_view what)
        {
            if (caller != contract::PeerRole::Winemaker)
                throw Error(Errc::Authorization, "only winemakers may " + std::string(what) + " wine records");
        }

        template <class T>
        bool is_prefix(const std::vector<T> &before, const std::vector<T> &after)
        {
            return after.size() >= before.size() && std::equal(before.begin(), before.end(), after.begin());
        }
    } // namespace

    void RecordDb::check_transition(const WineRecord &before, const WineRecord &after)
    {
        if (before.wine_id != after.wine_id)
            throw Error(Errc::InvalidArgument, "wine id is immutable");
        if (before.tag.uid != after.tag.uid)
            throw Error(Errc::InvalidArgument, "tag binding is immutable");
        if (!is_prefix(before.transaction_data, after.transaction_data))
            throw Error(Errc::InvalidArgument, "transaction data is append-only");
        if (!is_prefix(before.unsuccessful_validation_data, after.unsuccessful_validation_data))
            throw Error(Errc::InvalidArgument, "unsuccessful validation data is append-only");
        if (before.wine_status == WineStatus::Flagged && after.wine_status == WineStatus::Sold)
            throw Error(Errc::Rejected, "flagged record " + before.wine_id + " cannot be sold");
    }

    void RecordDb::put_locked(WineRecord record)
    {
        m_by_uid[record.tag.uid] = record.wine_id;
        const std::string key = record.wine_id;
        m_records.insert_or_assign(key, std::move(record));
    }

    void RecordDb::create(contract::PeerRole caller, WineRecord record)
    {
        require_winemaker(caller, "create");
        if (record.wine_id.empty())
            throw Error(Errc::InvalidArgument, "empty wine id");
        std::unique_lock lock(m_mutex);
        if (m_records.count(record.wine_id))
            throw Error(Errc::Duplicate, "wine record exists: " + record.wine_id);
        if (m_by_uid.count(record.tag.uid))
            throw Error(Errc::Duplicate, "tag already bound to " + m_by_uid.at(record.tag.uid));
        put_locked(std::move(record));
    }

    std::optional<WineRecord> RecordDb::find(const std::string &wine_id) const
    {
        std::shared_lock lock(m_mutex);
        const auto it = m_records.find(wine_id);
        if (it == m_records.end())
            return std::nullopt;
        return it->second;
    }

    WineRecord RecordDb::get(const std::string &wine_id) const
    {
        auto r = find(wine_id);
        if (!r)
            throw Error(Errc::NotFound, "no wine record " + wine_id);
        return std::move(*r);
    }

    std::optional<WineRecord> RecordDb::find_by_uid(const TagUid &uid) const
    {
        std::shared_lock lock(m_mutex);
        const auto it = m_by_uid.find(uid);
        if (it == m_by_uid.end())
            return std::nullopt;
        return m_records.at(it->second);
    }

    void RecordDb::update(contract::PeerRole caller, WineRecord record)
    {
        require_winemaker(caller, "update");
        std::unique_lock lock(m_mutex);
        const auto it = m_records.find(record.wine_id);
        if (it == m_records.end())
            throw Error(Errc::NotFound, "no wine record " + record.wine_id);
        check_transition(it->second, record);
        put_locked(std::move(record));
    }

    void RecordDb::remove(contract::PeerRole caller, const std::string &wine_id)
    {
        require_winemaker(caller, "delete");
        std::unique_lock lock(m_mutex);
        const auto it = m_records.find(wine_id);
        if (it == m_records.end())
            throw Error(Errc::NotFound, "no wine record " + wine_id);
        m_by_uid.erase(it->second.tag.uid);
        m_records.erase(it);
    }

    WineRecord RecordDb::mutate(const std::string &wine_id, const std::function<void(WineRecord &)> &change)
    {
        std::unique_lock lock(m_mutex);
        const auto it = m_records.find(wine_id);
        if (it == m_records.end())
            throw Error(Errc::NotFound, "no wine record " + wine_id);
        WineRecord next = it->second;
        change(next);
        check_transition(it->second, next);
        it->second = next;
        return next;
    }

    WineRecord RecordDb::log_unsuccessful_validation(const std::string &wine_id, const ValidationFailure &failure)
    {
        const WineRecord updated = mutate(wine_id, [&](WineRecord &r) {
            r.unsuccessful_validation_data.push_back(failure);
            r.wine_status = WineStatus::Flagged;
        });
        std::vector<FlagListener> listeners;
        {
            std::shared_lock lock(m_mutex);
            listeners = m_listeners;
        }
        for (const auto &l : listeners)
            l(updated, failure);
        return updated;
    }

    void RecordDb::on_flag(FlagListener listener)
    {
        std::unique_lock lock(m_mutex);
        m_listeners.push_back(std::move(listener));
    }

    std::size_t RecordDb::size() const
    {
        std::shared_lock lock(m_mutex);
        return m_records.size();
    }

    std::vector<std::string> RecordDb::wine_ids() const
    {
        std::shared_lock lock(m_mutex);
        std::vector<std::string> out;
        for (const auto &[id, r] : m_records)
            out.push_back(id);
        return out;
    }

    json RecordDb::export_json() const
    {
        std::shared_lock lock(m_mutex);
        json out = json::array();
        for (const auto &[id, r] : m_records)
            out.push_back(r.to_json());
        return out;
    }

    void RecordDb::import_json(const json &j)
    {
        std::unique_lock lock(m_mutex);
        m_records.clear();
        m_by_uid.clear();
        for (const auto &r : j)
            put_locked(WineRecord::from_json(r));
    }
} // namespace dnas::records
