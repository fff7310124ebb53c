#include "dnas/records/wine_record.hpp"

namespace dnas::records
{
    using nlohmann::json;

    namespace
    {
        template <class E, std::size_t N>
        E parse_enum(std::string_view text, const std::array<std::pair<E, std::string_view>, N> &names,
                     const char *what)
        {
            for (const auto &[value, name] : names)
                if (name == text)
                    return value;
            throw Error(Errc::Decode, std::string("unknown ") + what + ": " + std::string(text));
        }

        constexpr std::array<std::pair<WineStatus, std::string_view>, 6> kStatusNames{{
            {WineStatus::Created, "created"},
            {WineStatus::InTransit, "in_transit"},
            {WineStatus::Accepted, "accepted"},
            {WineStatus::Sold, "sold"},
            {WineStatus::Flagged, "flagged"},
            {WineStatus::Error, "error"},
        }};
        constexpr std::array<std::pair<AttackClass, std::string_view>, 3> kAttackNames{{
            {AttackClass::Modification, "Modification"},
            {AttackClass::Cloning, "Cloning"},
            {AttackClass::Reapplication, "Reapplication"},
        }};
        constexpr std::array<std::pair<ValidationLayer, std::string_view>, 3> kLayerNames{{
            {ValidationLayer::OffChainDb, "OffChainDb"},
            {ValidationLayer::OnChain, "OnChain"},
            {ValidationLayer::ContentStore, "ContentStore"},
        }};

        template <class E, std::size_t N>
        std::string_view name_of(E value, const std::array<std::pair<E, std::string_view>, N> &names) noexcept
        {
            for (const auto &[v, name] : names)
                if (v == value)
                    return name;
            return "?";
        }
    } // namespace

    std::string_view to_string(WineStatus s) noexcept { return name_of(s, kStatusNames); }
    std::string_view to_string(AttackClass c) noexcept { return name_of(c, kAttackNames); }
    std::string_view to_string(ValidationLayer l) noexcept { return name_of(l, kLayerNames); }
    WineStatus wine_status_from_string(std::string_view s) { return parse_enum(s, kStatusNames, "wine status"); }
    AttackClass attack_class_from_string(std::string_view s) { return parse_enum(s, kAttackNames, "attack class"); }
    ValidationLayer validation_layer_from_string(std::string_view s)
    {
        return parse_enum(s, kLayerNames, "validation layer");
    }

    json to_json(const SupplyChainEntry &e)
    {
        return json{{"member", e.member},
                    {"custodian", e.custodian},
                    {"action", e.action},
                    {"timestamp", e.timestamp},
                    {"write_count", e.write_count}};
    }

    json WineRecord::to_json() const
    {
        json txs = json::array();
        for (const auto &t : transaction_data)
            txs.push_back(json{{"tx_hash", t.tx_hash},
                               {"block_number", t.block_number},
                               {"actor", t.actor},
                               {"timestamp", t.timestamp},
                               {"method", t.method}});
        json chain = json::array();
        for (const auto &e : supply_chain_data)
            chain.push_back(records::to_json(e));
        json failures = json::array();
        for (const auto &f : unsuccessful_validation_data)
            failures.push_back(json{{"attack_class", to_string(f.attack_class)},
                                    {"layer", to_string(f.layer)},
                                    {"timestamp", f.timestamp},
                                    {"details", f.details}});
        json binding{{"uid", to_hex(tag.uid)},
                     {"device_id", tag.device_id},
                     {"signature", tag.signature},
                     {"password", tag.password ? json(to_hex(*tag.password)) : json(nullptr)}};
        return json{{"wine_id", wine_id},
                    {"owner_member", owner_member},
                    {"pedigree_data", pedigree_data},
                    {"transaction_data", std::move(txs)},
                    {"supply_chain_data", std::move(chain)},
                    {"unsuccessful_validation_data", std::move(failures)},
                    {"wine_status", to_string(wine_status)},
                    {"write_count", write_count},
                    {"read_count", read_count},
                    {"custodian", custodian},
                    {"content_id", content_id},
                    {"tag", std::move(binding)}};
    }

    WineRecord WineRecord::from_json(const json &j)
    {
        WineRecord r;
        r.wine_id = j.at("wine_id").get<std::string>();
        r.owner_member = j.value("owner_member", std::string{});
        r.pedigree_data = j.value("pedigree_data", json::object());
        for (const auto &t : j.value("transaction_data", json::array()))
            r.transaction_data.push_back(TransactionEntry{t.at("tx_hash").get<std::string>(),
                                                          t.at("block_number").get<std::uint64_t>(),
                                                          t.at("actor").get<Address>(), t.at("timestamp").get<SimTime>(),
                                                          t.at("method").get<std::string>()});
        for (const auto &e : j.value("supply_chain_data", json::array()))
            r.supply_chain_data.push_back(SupplyChainEntry{e.at("member").get<std::string>(),
                                                           e.at("custodian").get<Address>(),
                                                           e.at("action").get<std::string>(),
                                                           e.at("timestamp").get<SimTime>(),
                                                           e.at("write_count").get<std::uint64_t>()});
        for (const auto &f : j.value("unsuccessful_validation_data", json::array()))
            r.unsuccessful_validation_data.push_back(
                ValidationFailure{attack_class_from_string(f.at("attack_class").get<std::string>()),
                                  validation_layer_from_string(f.at("layer").get<std::string>()),
                                  f.at("timestamp").get<SimTime>(), f.at("details").get<std::string>()});
        r.wine_status = wine_status_from_string(j.value("wine_status", std::string("created")));
        r.write_count = j.value("write_count", std::uint64_t{0});
        r.read_count = j.value("read_count", std::uint64_t{0});
        if (j.contains("custodian"))
            r.custodian = j.at("custodian").get<Address>();
        r.content_id = j.value("content_id", std::string{});
        if (j.contains("tag"))
        {
            const auto &t = j.at("tag");
            r.tag.uid = fixed_from_hex<kTagUidSize>(t.at("uid").get<std::string>());
            r.tag.device_id = t.at("device_id").get<std::string>();
            r.tag.signature = t.at("signature").get<crypto::Signature>();
            if (!t.at("password").is_null())
                r.tag.password = fixed_from_hex<kTagPasswordSize>(t.at("password").get<std::string>());
        }
        return r;
    }

    std::string derive_subset(const WineRecord &record)
    {
        json chain = json::array();
        for (const auto &e : record.supply_chain_data)
            chain.push_back(to_json(e));
        const json subset{{"wine_id", record.wine_id},
                          {"pedigree_data", record.pedigree_data},
                          {"wine_status", to_string(record.wine_status)},
                          {"supply_chain_data", std::move(chain)},
                          {"subset_version", record.write_count}};
        return subset.dump();
    }
} // namespace dnas::records
