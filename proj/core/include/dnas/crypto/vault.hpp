#pragma once

#include "dnas/common/bytes.hpp"
#include "dnas/crypto/keys.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

namespace dnas::crypto
{
    inline constexpr std::string_view kVaultPrefixKey = "dnas/";

    // dnas/<member>/<name>
    std::string member_secret_path(std::string_view member_id, std::string_view name);
    // dnas/SCDeploymentSecret/<proxy address>
    std::string deployment_secret_path(const Address &proxy);
    // Policy prefix that covers every secret of one member.
    std::string member_policy(std::string_view member_id);

    struct VaultAuthMethod
    {
        enum class Kind
        {
            Token,
            AppRole
        };

        Kind kind = Kind::Token;
        std::string token;
        std::string role_id;
        std::string secret_id;

        static VaultAuthMethod with_token(std::string token) { return {Kind::Token, std::move(token), {}, {}}; }
        static VaultAuthMethod with_approle(std::string role_id, std::string secret_id)
        {
            return {Kind::AppRole, {}, std::move(role_id), std::move(secret_id)};
        }
    };

    struct VaultSession
    {
        std::string token;
        SimTime lease_expiry = 0;
    };

    struct VaultSecret
    {
        std::string key;
        std::string value;
        std::uint64_t version = 0;
    };

    /// In-process secret store with versioned keys, prefix policies, leased
    /// tokens and AppRole login. Reads take a shared lock, writes an exclusive one.
    class Vault
    {
    public:
        using Clock = std::function<SimTime()>;

        Vault(Clock clock, std::uint64_t seed, SimTime default_lease = 3600);

        // Root operations used while provisioning a member's instance.
        std::string issue_token(std::vector<std::string> policies, std::optional<SimTime> lease = std::nullopt);
        std::string create_approle(const std::string &role_id, std::vector<std::string> policies);

        VaultSession login(const VaultAuthMethod &method);

        std::uint64_t put(const VaultSession &session, std::string_view key, std::string value);
        VaultSecret get(const VaultSession &session, std::string_view key,
                        std::optional<std::uint64_t> version = std::nullopt) const;

        SimTime default_lease() const noexcept { return m_default_lease; }

    private:
        struct TokenEntry
        {
            std::vector<std::string> policies;
            SimTime expiry = 0;
        };
        struct AppRole
        {
            std::string secret_id;
            std::vector<std::string> policies;
        };

        const TokenEntry &authorize(const VaultSession &session, std::string_view key) const;
        std::string random_token(std::string_view prefix);

        Clock m_clock;
        SimTime m_default_lease;
        std::mt19937_64 m_rng;

        mutable std::shared_mutex m_mutex;
        std::map<std::string, TokenEntry> m_tokens;
        std::map<std::string, AppRole> m_approles;
        std::map<std::string, std::vector<std::string>, std::less<>> m_secrets; // key -> versions 1..n
    };
} // namespace dnas::crypto
