#include "dnas/sim/bus.hpp"

#include "dnas/common/error.hpp"
#include "dnas/crypto/hash.hpp"

namespace dnas::sim
{
    void SimClock::advance_to(SimTime t)
    {
        if (t < m_now)
            throw Error(Errc::State, "clock cannot go back from " + std::to_string(m_now) + " to " + std::to_string(t));
        m_now = t;
    }

    void MessageBus::post(SimTime deliver_at, std::string from, std::string to, std::string kind,
                          std::function<std::string()> deliver)
    {
        const std::uint64_t seq = m_next_seq++;
        m_queue.emplace(std::pair{deliver_at, seq},
                        Envelope{deliver_at, seq, std::move(from), std::move(to), std::move(kind), std::move(deliver)});
    }

    std::optional<Envelope> MessageBus::pop_due(SimTime now)
    {
        if (m_queue.empty() || m_queue.begin()->first.first > now)
            return std::nullopt;
        auto node = m_queue.extract(m_queue.begin());
        return std::move(node.mapped());
    }

    void MessageBus::record(SimTime at, const Envelope &e, std::string_view outcome)
    {
        m_transcript.push_back(std::to_string(at) + " #" + std::to_string(e.seq) + " " + e.from + "->" + e.to + " " +
                               e.kind + " " + std::string(outcome));
    }

    Hash32 MessageBus::transcript_digest() const
    {
        std::string all;
        for (const auto &line : m_transcript)
        {
            all += line;
            all += '\n';
        }
        return crypto::keccak256(as_bytes(all));
    }
} // namespace dnas::sim
