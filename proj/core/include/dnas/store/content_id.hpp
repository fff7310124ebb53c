#pragma once

#include "dnas/common/bytes.hpp"

#include <compare>
#include <functional>
#include <string>

namespace dnas::store
{
    inline constexpr std::uint8_t kMultihashSha256 = 0x12;
    inline constexpr std::uint8_t kMultihashLength = 0x20;
    inline constexpr std::size_t kContentIdChars = 46;

    /// CIDv0-style identifier: base58btc(0x12 || 0x20 || sha256(content)).
    /// Always 46 characters and starts with "Qm".
    class ContentId
    {
    public:
        static ContentId of(ByteView content);
        static ContentId of(std::string_view content) { return of(as_bytes(content)); }

        // Throws Error(Errc::Decode) unless the text is a well-formed sha2-256 multihash.
        static ContentId parse(std::string_view text);

        const std::string &str() const noexcept { return m_text; }
        Hash32 digest() const;
        bool matches(ByteView content) const;

        friend auto operator<=>(const ContentId &, const ContentId &) = default;

    private:
        explicit ContentId(std::string text) : m_text(std::move(text)) {}
        std::string m_text;
    };
} // namespace dnas::store

template <>
struct std::hash<dnas::store::ContentId>
{
    std::size_t operator()(const dnas::store::ContentId &id) const noexcept
    {
        return std::hash<std::string>{}(id.str());
    }
};
