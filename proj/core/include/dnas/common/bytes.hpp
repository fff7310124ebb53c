#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dnas
{
    using Bytes = std::vector<std::uint8_t>;
    using ByteView = std::span<const std::uint8_t>;
    using Hash32 = std::array<std::uint8_t, 32>;

    // Simulated wall clock, in whole seconds.
    using SimTime = std::int64_t;

    inline ByteView as_bytes(std::string_view s) noexcept
    {
        return {reinterpret_cast<const std::uint8_t *>(s.data()), s.size()};
    }

    std::string to_hex(ByteView bytes, bool prefix = false);

    template <std::size_t N>
    std::string to_hex(const std::array<std::uint8_t, N> &bytes, bool prefix = false)
    {
        return to_hex(ByteView{bytes.data(), bytes.size()}, prefix);
    }

    // Accepts an optional "0x" prefix. Throws Error(Errc::Decode) on odd length or bad digits.
    Bytes from_hex(std::string_view hex);

    template <std::size_t N>
    std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex);

    // Length-prefixed binary writer used for hashing and signing preimages.
    class ByteWriter
    {
    public:
        ByteWriter &u8(std::uint8_t v);
        ByteWriter &u32(std::uint32_t v);
        ByteWriter &u64(std::uint64_t v);
        ByteWriter &raw(ByteView v);
        // u32 big-endian length followed by the bytes.
        ByteWriter &field(ByteView v);
        ByteWriter &field(std::string_view v) { return field(as_bytes(v)); }

        const Bytes &bytes() const noexcept { return m_out; }
        Bytes take() noexcept { return std::move(m_out); }

    private:
        Bytes m_out;
    };
} // namespace dnas

#include "dnas/common/error.hpp"

namespace dnas
{
    template <std::size_t N>
    std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex)
    {
        const Bytes raw = from_hex(hex);
        if (raw.size() != N)
        {
            throw Error(Errc::Decode, "expected " + std::to_string(N) + " bytes, got " + std::to_string(raw.size()));
        }
        std::array<std::uint8_t, N> out{};
        std::copy(raw.begin(), raw.end(), out.begin());
        return out;
    }
} // namespace dnas
