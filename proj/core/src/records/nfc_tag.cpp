#include "dnas/records/nfc_tag.hpp"

namespace dnas::records
{
    namespace
    {
        constexpr std::uint8_t kPayloadFormat = 1;
        constexpr std::uint8_t kNxpManufacturer = 0x04;
    } // namespace

    TagUid random_uid(std::mt19937_64 &rng)
    {
        TagUid uid{};
        uid[0] = kNxpManufacturer;
        for (std::size_t i = 1; i < uid.size(); ++i)
            uid[i] = static_cast<std::uint8_t>(rng());
        return uid;
    }

    Bytes TagPayload::encode() const
    {
        ByteWriter w;
        w.u8(kPayloadFormat).field(wine_id).raw(signature.to_bytes()).u64(write_counter);
        return w.take();
    }

    TagPayload TagPayload::decode(ByteView bytes)
    {
        auto need = [&](std::size_t at, std::size_t n) {
            if (bytes.size() < at + n)
                throw Error(Errc::Decode, "truncated tag payload");
        };
        need(0, 5);
        if (bytes[0] != kPayloadFormat)
            throw Error(Errc::Decode, "unknown tag payload format");
        const std::size_t len = (std::size_t{bytes[1]} << 24) | (std::size_t{bytes[2]} << 16) |
                                (std::size_t{bytes[3]} << 8) | std::size_t{bytes[4]};
        need(5, len + 65 + 8);
        if (bytes.size() != 5 + len + 65 + 8)
            throw Error(Errc::Decode, "trailing bytes in tag payload");

        TagPayload p;
        p.wine_id.assign(reinterpret_cast<const char *>(bytes.data() + 5), len);
        p.signature = crypto::Signature::from_bytes(bytes.subspan(5 + len, 65));
        for (std::size_t i = 0; i < 8; ++i)
            p.write_counter = (p.write_counter << 8) | bytes[5 + len + 65 + i];
        return p;
    }

    void NfcTag::check_password(const std::optional<TagPassword> &password) const
    {
        if (m_password && (!password || *password != *m_password))
            throw Error(Errc::Locked, "tag is password protected");
    }

    void NfcTag::write(const TagPayload &payload, const std::optional<TagPassword> &password)
    {
        check_password(password);
        Bytes encoded = payload.encode();
        if (encoded.size() > kTagMemorySize)
            throw Error(Errc::Capacity, "payload of " + std::to_string(encoded.size()) + " bytes exceeds " +
                                            std::to_string(kTagMemorySize));
        m_memory = std::move(encoded);
        m_write_counter = std::max(m_write_counter, payload.write_counter);
    }

    TagReading NfcTag::read(const std::optional<TagPassword> &password)
    {
        check_password(password);
        ++m_read_counter;
        TagReading r;
        r.uid = m_uid;
        r.write_counter = m_write_counter;
        r.read_counter = m_read_counter;
        if (!m_memory.empty())
        {
            try
            {
                r.payload = TagPayload::decode(m_memory);
            }
            catch (const Error &)
            {
                r.payload.reset();
            }
        }
        return r;
    }

    TagPassword NfcTag::enable_protection(std::mt19937_64 &rng)
    {
        if (m_password)
            throw Error(Errc::State, "tag protection already enabled");
        TagPassword pw{};
        for (auto &b : pw)
            b = static_cast<std::uint8_t>(rng());
        m_password = pw;
        return pw;
    }

    NfcTag NfcTag::clone_onto(const TagUid &blank_uid) const
    {
        NfcTag copy(blank_uid);
        if (!m_memory.empty())
            copy.write(TagPayload::decode(m_memory));
        return copy;
    }

    void NfcTag::tamper_payload(const TagPayload &payload) { m_memory = payload.encode(); }
} // namespace dnas::records
