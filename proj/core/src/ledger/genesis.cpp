#include "dnas/ledger/genesis.hpp"

#include <algorithm>
#include <set>

namespace dnas::ledger
{
    using nlohmann::json;

    void GenesisConfig::validate() const
    {
        if (initial_validators.empty())
            throw Error(Errc::Config, "genesis needs at least one validator");
        if (std::set<Address>(initial_validators.begin(), initial_validators.end()).size() != initial_validators.size())
            throw Error(Errc::Config, "duplicate validator in genesis");
        if (period < 1)
            throw Error(Errc::Config, "period must be at least 1 second");
        if (gas_floor > gas_ceiling)
            throw Error(Errc::Config, "gas floor exceeds gas ceiling");
        if (gas_limit < gas_floor || gas_limit > gas_ceiling)
            throw Error(Errc::Config, "gas limit outside [floor, ceiling]");
        if (bootstrap_count < 1)
            throw Error(Errc::Config, "bootstrap count must be at least 1");
    }

    Bytes GenesisConfig::extra_data() const
    {
        Bytes out(kExtraVanity, 0);
        for (const auto &v : initial_validators)
            out.insert(out.end(), v.bytes().begin(), v.bytes().end());
        out.resize(out.size() + kExtraSeal, 0);
        return out;
    }

    std::vector<Address> GenesisConfig::validators_from_extra_data(ByteView extra)
    {
        if (extra.size() < kExtraVanity + kExtraSeal || (extra.size() - kExtraVanity - kExtraSeal) % crypto::kAddressSize)
            throw Error(Errc::Config, "malformed extraData");
        std::vector<Address> out;
        for (std::size_t off = kExtraVanity; off + kExtraSeal < extra.size(); off += crypto::kAddressSize)
        {
            Address::Storage raw{};
            std::copy_n(extra.begin() + static_cast<std::ptrdiff_t>(off), crypto::kAddressSize, raw.begin());
            out.emplace_back(raw);
        }
        return out;
    }

    json GenesisConfig::to_json() const
    {
        json balances = json::object();
        for (const auto &[addr, gwei] : alloc)
            balances[addr.hex()] = json{{"balance", gwei}};
        return json{{"chainId", chain_id},
                    {"period", period},
                    {"extraData", to_hex(extra_data(), true)},
                    {"alloc", std::move(balances)},
                    {"gasLimit", gas_limit},
                    {"gasFloor", gas_floor},
                    {"gasCeiling", gas_ceiling},
                    {"administrator", administrator},
                    {"bootstrapCount", bootstrap_count}};
    }

    GenesisConfig GenesisConfig::from_json(const json &j)
    {
        try
        {
            GenesisConfig g;
            g.chain_id = j.value("chainId", g.chain_id);
            g.period = j.value("period", g.period);
            g.initial_validators = validators_from_extra_data(from_hex(j.at("extraData").get<std::string>()));
            if (j.contains("alloc"))
                for (const auto &[addr, entry] : j.at("alloc").items())
                    g.alloc[Address::from_hex(addr)] = entry.at("balance").get<std::uint64_t>();
            g.gas_limit = j.value("gasLimit", g.gas_limit);
            g.gas_floor = j.value("gasFloor", g.gas_floor);
            g.gas_ceiling = j.value("gasCeiling", g.gas_ceiling);
            if (j.contains("administrator"))
                g.administrator = j.at("administrator").get<Address>();
            g.bootstrap_count = j.value("bootstrapCount", g.bootstrap_count);
            g.validate();
            return g;
        }
        catch (const json::exception &e)
        {
            throw Error(Errc::Config, std::string("malformed genesis: ") + e.what());
        }
    }

    std::uint64_t next_gas_limit(std::uint64_t parent_gas_limit, std::uint64_t parent_gas_used, std::uint64_t floor,
                                 std::uint64_t ceiling)
    {
        constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t half_up = parent_gas_used / 2 + parent_gas_used % 2;
        const std::uint64_t target = parent_gas_used > kMax - half_up ? kMax : parent_gas_used + half_up;
        const std::uint64_t step = parent_gas_limit / 1024;
        std::uint64_t next = parent_gas_limit;
        if (target > parent_gas_limit)
            next += std::min(target - parent_gas_limit, step);
        else
            next -= std::min(parent_gas_limit - target, step);
        return std::min(std::max(next, floor), ceiling);
    }
} // namespace dnas::ledger
