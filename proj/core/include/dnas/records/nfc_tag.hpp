#pragma once

#include "dnas/crypto/keys.hpp"

#include <optional>
#include <random>

namespace dnas::records
{
    inline constexpr std::size_t kTagUidSize = 7;
    inline constexpr std::size_t kTagMemorySize = 888;
    inline constexpr std::size_t kTagPasswordSize = 4;

    using TagUid = std::array<std::uint8_t, kTagUidSize>;
    using TagPassword = std::array<std::uint8_t, kTagPasswordSize>;

    // NXP manufacturer byte leads every generated UID.
    TagUid random_uid(std::mt19937_64 &rng);

    /// What the tag stores: wine id, the custodian's signature and a copy of
    /// the write counter at the time of writing.
    struct TagPayload
    {
        std::string wine_id;
        crypto::Signature signature;
        std::uint64_t write_counter = 0;

        Bytes encode() const;
        // Throws Error(Errc::Decode).
        static TagPayload decode(ByteView bytes);

        friend bool operator==(const TagPayload &, const TagPayload &) = default;
    };

    struct TagReading
    {
        TagUid uid{};
        std::optional<TagPayload> payload; // empty for blank or undecodable memory
        std::uint64_t write_counter = 0;
        std::uint64_t read_counter = 0;
    };

    /// NTAG 216-like tag: 7-byte UID, 888 bytes of user memory, optional
    /// 4-byte password lock, monotone write and read counters.
    class NfcTag
    {
    public:
        explicit NfcTag(const TagUid &uid) : m_uid(uid) {}

        const TagUid &uid() const noexcept { return m_uid; }
        bool protection_enabled() const noexcept { return m_password.has_value(); }
        std::uint64_t write_counter() const noexcept { return m_write_counter; }
        std::uint64_t read_counter() const noexcept { return m_read_counter; }
        const Bytes &memory() const noexcept { return m_memory; }

        // Throws Error(Errc::Locked) or Error(Errc::Capacity); the tag is unchanged on error.
        void write(const TagPayload &payload, const std::optional<TagPassword> &password = std::nullopt);
        // Throws Error(Errc::Locked) without counting the read.
        TagReading read(const std::optional<TagPassword> &password = std::nullopt);
        // Throws Error(Errc::State) if already protected.
        TagPassword enable_protection(std::mt19937_64 &rng);

        // Fault injection for attack scenarios. These bypass the lock.
        NfcTag clone_onto(const TagUid &blank_uid) const;
        void tamper_payload(const TagPayload &payload);
        void bump_write_counter() noexcept { ++m_write_counter; }

    private:
        void check_password(const std::optional<TagPassword> &password) const;

        TagUid m_uid;
        Bytes m_memory;
        std::optional<TagPassword> m_password;
        std::uint64_t m_write_counter = 0;
        std::uint64_t m_read_counter = 0;
    };
} // namespace dnas::records
