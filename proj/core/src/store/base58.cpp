#include "dnas/store/base58.hpp"

#include <algorithm>

namespace dnas::store
{
    namespace
    {
        constexpr std::string_view kAlphabet = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

        int digit_value(char c)
        {
            const auto pos = kAlphabet.find(c);
            return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
        }
    } // namespace

    std::string base58_encode(ByteView data)
    {
        std::size_t zeros = 0;
        while (zeros < data.size() && data[zeros] == 0)
            ++zeros;

        // Little-endian base-58 digits, grown by repeated multiply-add.
        std::vector<std::uint8_t> digits;
        digits.reserve(data.size() * 138 / 100 + 1);
        for (std::size_t i = zeros; i < data.size(); ++i)
        {
            int carry = data[i];
            for (auto &d : digits)
            {
                carry += d << 8;
                d = static_cast<std::uint8_t>(carry % 58);
                carry /= 58;
            }
            while (carry > 0)
            {
                digits.push_back(static_cast<std::uint8_t>(carry % 58));
                carry /= 58;
            }
        }

        std::string out(zeros, '1');
        for (auto it = digits.rbegin(); it != digits.rend(); ++it)
            out.push_back(kAlphabet[*it]);
        return out;
    }

    Bytes base58_decode(std::string_view text)
    {
        std::size_t ones = 0;
        while (ones < text.size() && text[ones] == '1')
            ++ones;

        std::vector<std::uint8_t> bytes; // little-endian base-256
        for (std::size_t i = ones; i < text.size(); ++i)
        {
            int carry = digit_value(text[i]);
            if (carry < 0)
                throw Error(Errc::Decode, "invalid base58 character");
            for (auto &b : bytes)
            {
                carry += b * 58;
                b = static_cast<std::uint8_t>(carry & 0xff);
                carry >>= 8;
            }
            while (carry > 0)
            {
                bytes.push_back(static_cast<std::uint8_t>(carry & 0xff));
                carry >>= 8;
            }
        }

        Bytes out(ones, 0);
        out.insert(out.end(), bytes.rbegin(), bytes.rend());
        return out;
    }
} // namespace dnas::store
