#include "dnas/common/bytes.hpp"

namespace dnas
{
    namespace
    {
        int nibble(char c)
        {
            if (c >= '0' && c <= '9')
                return c - '0';
            if (c >= 'a' && c <= 'f')
                return c - 'a' + 10;
            if (c >= 'A' && c <= 'F')
                return c - 'A' + 10;
            return -1;
        }
    } // namespace

    std::string to_hex(ByteView bytes, bool prefix)
    {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(bytes.size() * 2 + (prefix ? 2 : 0));
        if (prefix)
            out += "0x";
        for (const auto b : bytes)
        {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0x0f]);
        }
        return out;
    }

    Bytes from_hex(std::string_view hex)
    {
        if (hex.starts_with("0x") || hex.starts_with("0X"))
            hex.remove_prefix(2);
        if (hex.size() % 2 != 0)
            throw Error(Errc::Decode, "hex string has odd length");
        Bytes out(hex.size() / 2);
        for (std::size_t i = 0; i < out.size(); ++i)
        {
            const int hi = nibble(hex[2 * i]);
            const int lo = nibble(hex[2 * i + 1]);
            if (hi < 0 || lo < 0)
                throw Error(Errc::Decode, "invalid hex digit");
            out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
        }
        return out;
    }

    ByteWriter &ByteWriter::u8(std::uint8_t v)
    {
        m_out.push_back(v);
        return *this;
    }

    ByteWriter &ByteWriter::u32(std::uint32_t v)
    {
        for (int shift = 24; shift >= 0; shift -= 8)
            m_out.push_back(static_cast<std::uint8_t>(v >> shift));
        return *this;
    }

    ByteWriter &ByteWriter::u64(std::uint64_t v)
    {
        for (int shift = 56; shift >= 0; shift -= 8)
            m_out.push_back(static_cast<std::uint8_t>(v >> shift));
        return *this;
    }

    ByteWriter &ByteWriter::raw(ByteView v)
    {
        m_out.insert(m_out.end(), v.begin(), v.end());
        return *this;
    }

    ByteWriter &ByteWriter::field(ByteView v)
    {
        u32(static_cast<std::uint32_t>(v.size()));
        return raw(v);
    }
} // namespace dnas
