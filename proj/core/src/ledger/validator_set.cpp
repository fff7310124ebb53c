#include "dnas/ledger/validator_set.hpp"

#include <algorithm>

namespace dnas::ledger
{
    ValidatorSet::ValidatorSet(std::vector<Address> validators) : m_validators(std::move(validators))
    {
        std::sort(m_validators.begin(), m_validators.end());
        m_validators.erase(std::unique(m_validators.begin(), m_validators.end()), m_validators.end());
        if (m_validators.empty())
            throw Error(Errc::Config, "validator set cannot be empty");
    }

    bool ValidatorSet::contains(const Address &a) const
    {
        return std::binary_search(m_validators.begin(), m_validators.end(), a);
    }

    Address ValidatorSet::in_turn(std::uint64_t height) const { return m_validators[height % m_validators.size()]; }

    std::size_t ValidatorSet::turn_offset(const Address &sealer, std::uint64_t height) const
    {
        const auto it = std::lower_bound(m_validators.begin(), m_validators.end(), sealer);
        if (it == m_validators.end() || *it != sealer)
            throw Error(Errc::Authorization, sealer.hex() + " is not a validator");
        const std::size_t n = m_validators.size();
        const auto idx = static_cast<std::size_t>(it - m_validators.begin());
        return (idx + n - height % n) % n;
    }

    bool ValidatorSet::is_actionable(const Address &candidate, bool add) const
    {
        if (add)
            return !contains(candidate);
        return contains(candidate) && m_validators.size() > 1;
    }

    std::size_t ValidatorSet::tally(const Address &candidate, bool add) const
    {
        const auto it = m_tallies.find({candidate, add});
        return it == m_tallies.end() ? 0 : it->second.size();
    }

    bool ValidatorSet::has_voted(const Address &voter, const Address &candidate, bool add) const
    {
        const auto it = m_tallies.find({candidate, add});
        return it != m_tallies.end() && it->second.count(voter) > 0;
    }

    TallyResult ValidatorSet::propose(const Address &voter, const Address &candidate, bool add)
    {
        if (!contains(voter))
            throw Error(Errc::Authorization, voter.hex() + " is not a validator");
        if (!is_actionable(candidate, add))
            return TallyResult{0, threshold(), false};

        auto &voters = m_tallies[{candidate, add}];
        voters.insert(voter);
        TallyResult result{voters.size(), threshold(), false};
        if (voters.size() < result.threshold)
            return result;

        if (add)
        {
            m_validators.insert(std::lower_bound(m_validators.begin(), m_validators.end(), candidate), candidate);
        }
        else
        {
            m_validators.erase(std::lower_bound(m_validators.begin(), m_validators.end(), candidate));
        }
        m_tallies.clear();
        result.applied = true;
        return result;
    }
} // namespace dnas::ledger
