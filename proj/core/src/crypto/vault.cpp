#include "dnas/crypto/vault.hpp"

#include <algorithm>

namespace dnas::crypto
{
    std::string member_secret_path(std::string_view member_id, std::string_view name)
    {
        return std::string(kVaultPrefixKey) + std::string(member_id) + "/" + std::string(name);
    }

    std::string deployment_secret_path(const Address &proxy)
    {
        return std::string(kVaultPrefixKey) + "SCDeploymentSecret/" + proxy.hex();
    }

    std::string member_policy(std::string_view member_id)
    {
        return std::string(kVaultPrefixKey) + std::string(member_id) + "/";
    }

    Vault::Vault(Clock clock, std::uint64_t seed, SimTime default_lease)
        : m_clock(std::move(clock)), m_default_lease(default_lease), m_rng(seed)
    {
        if (!m_clock)
            throw Error(Errc::InvalidArgument, "vault requires a clock");
        if (default_lease <= 0)
            throw Error(Errc::InvalidArgument, "lease must be positive");
    }

    std::string Vault::random_token(std::string_view prefix)
    {
        std::array<std::uint8_t, 16> raw{};
        for (std::size_t i = 0; i < raw.size(); i += 8)
        {
            const std::uint64_t v = m_rng();
            for (std::size_t j = 0; j < 8; ++j)
                raw[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
        }
        return std::string(prefix) + to_hex(raw);
    }

    std::string Vault::issue_token(std::vector<std::string> policies, std::optional<SimTime> lease)
    {
        std::unique_lock lock(m_mutex);
        std::string token = random_token("s.");
        m_tokens[token] = TokenEntry{std::move(policies), m_clock() + lease.value_or(m_default_lease)};
        return token;
    }

    std::string Vault::create_approle(const std::string &role_id, std::vector<std::string> policies)
    {
        std::unique_lock lock(m_mutex);
        std::string secret_id = random_token("");
        m_approles[role_id] = AppRole{secret_id, std::move(policies)};
        return secret_id;
    }

    VaultSession Vault::login(const VaultAuthMethod &method)
    {
        std::unique_lock lock(m_mutex);
        const SimTime now = m_clock();
        switch (method.kind)
        {
        case VaultAuthMethod::Kind::Token:
        {
            const auto it = m_tokens.find(method.token);
            if (it == m_tokens.end())
                throw Error(Errc::Auth, "unknown token");
            if (it->second.expiry <= now)
                throw Error(Errc::Auth, "token lease expired; reauthenticate");
            return VaultSession{method.token, it->second.expiry};
        }
        case VaultAuthMethod::Kind::AppRole:
        {
            const auto it = m_approles.find(method.role_id);
            if (it == m_approles.end())
                throw Error(Errc::Auth, "unknown role_id");
            if (it->second.secret_id != method.secret_id)
                throw Error(Errc::Auth, "secret_id does not match role");
            std::string token = random_token("s.");
            const SimTime expiry = now + m_default_lease;
            m_tokens[token] = TokenEntry{it->second.policies, expiry};
            return VaultSession{std::move(token), expiry};
        }
        }
        throw Error(Errc::Auth, "unsupported auth method");
    }

    const Vault::TokenEntry &Vault::authorize(const VaultSession &session, std::string_view key) const
    {
        const auto it = m_tokens.find(session.token);
        if (it == m_tokens.end())
            throw Error(Errc::Auth, "unauthenticated session");
        if (it->second.expiry <= m_clock())
            throw Error(Errc::Auth, "token lease expired; reauthenticate");
        const auto &policies = it->second.policies;
        const bool allowed = std::any_of(policies.begin(), policies.end(),
                                         [&](const std::string &prefix) { return key.starts_with(prefix); });
        if (!allowed)
            throw Error(Errc::Auth, "token policy does not cover " + std::string(key));
        return it->second;
    }

    std::uint64_t Vault::put(const VaultSession &session, std::string_view key, std::string value)
    {
        std::unique_lock lock(m_mutex);
        authorize(session, key);
        auto it = m_secrets.find(key);
        if (it == m_secrets.end())
            it = m_secrets.emplace(std::string(key), std::vector<std::string>{}).first;
        it->second.push_back(std::move(value));
        return it->second.size();
    }

    VaultSecret Vault::get(const VaultSession &session, std::string_view key, std::optional<std::uint64_t> version) const
    {
        std::shared_lock lock(m_mutex);
        authorize(session, key);
        const auto it = m_secrets.find(key);
        if (it == m_secrets.end())
            throw Error(Errc::NotFound, "no secret at " + std::string(key));
        const auto &versions = it->second;
        const std::uint64_t v = version.value_or(versions.size());
        if (v == 0 || v > versions.size())
            throw Error(Errc::NotFound, "no version " + std::to_string(v) + " of " + std::string(key));
        return VaultSecret{it->first, versions[v - 1], v};
    }
} // namespace dnas::crypto
