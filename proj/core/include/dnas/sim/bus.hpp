#pragma once

#include "dnas/common/bytes.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dnas::sim
{
    /// Monotone simulated clock.
    class SimClock
    {
    public:
        SimTime now() const noexcept { return m_now; }
        // Throws Error(Errc::State) on regression.
        void advance_to(SimTime t);

    private:
        SimTime m_now = 0;
    };

    struct Envelope
    {
        SimTime deliver_at = 0;
        std::uint64_t seq = 0;
        std::string from;
        std::string to;
        std::string kind;
        std::function<std::string()> deliver;
    };

    /// Pending messages ordered by (delivery time, sequence number). Every
    /// delivery is appended to the transcript.
    class MessageBus
    {
    public:
        void post(SimTime deliver_at, std::string from, std::string to, std::string kind, std::function<std::string()> deliver);
        // Next message due at or before `now`, in order.
        std::optional<Envelope> pop_due(SimTime now);
        std::size_t pending() const noexcept { return m_queue.size(); }

        void record(SimTime at, const Envelope &e, std::string_view outcome);
        const std::vector<std::string> &transcript() const noexcept { return m_transcript; }
        Hash32 transcript_digest() const;

    private:
        std::map<std::pair<SimTime, std::uint64_t>, Envelope> m_queue;
        std::uint64_t m_next_seq = 0;
        std::vector<std::string> m_transcript;
    };
} // namespace dnas::sim
