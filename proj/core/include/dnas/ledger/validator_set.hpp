#pragma once

#include "dnas/crypto/keys.hpp"

#include <map>
#include <set>
#include <vector>

namespace dnas::ledger
{
    using crypto::Address;

    struct TallyResult
    {
        std::size_t tally = 0;
        std::size_t threshold = 0;
        bool applied = false;
    };

    /// Sealer set with in-header voting. A proposal passes once
    /// floor(N/2)+1 distinct current validators back it; every membership
    /// change clears all open tallies.
    class ValidatorSet
    {
    public:
        explicit ValidatorSet(std::vector<Address> validators);

        const std::vector<Address> &list() const noexcept { return m_validators; }
        std::size_t size() const noexcept { return m_validators.size(); }
        bool contains(const Address &a) const;
        std::size_t threshold() const noexcept { return m_validators.size() / 2 + 1; }

        Address in_turn(std::uint64_t height) const;
        // Distance of `sealer` behind the in-turn validator for `height`; 0 when in turn.
        std::size_t turn_offset(const Address &sealer, std::uint64_t height) const;

        // Throws Error(Errc::Authorization) for a non-validator voter.
        TallyResult propose(const Address &voter, const Address &candidate, bool add);
        // Whether a vote would change anything (candidate not already in the target state).
        bool is_actionable(const Address &candidate, bool add) const;
        std::size_t tally(const Address &candidate, bool add) const;
        bool has_voted(const Address &voter, const Address &candidate, bool add) const;

    private:
        std::vector<Address> m_validators; // sorted
        std::map<std::pair<Address, bool>, std::set<Address>> m_tallies;
    };
} // namespace dnas::ledger
