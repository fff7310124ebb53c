#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dnas
{
    enum class Errc
    {
        InvalidArgument,
        Decode,
        Encoding,
        RejectedSeed,
        InvalidKey,
        Recovery,
        Mac,
        Auth,
        NotFound,
        Membership,
        Authorization,
        Config,
        PoolRejected,
        SealRejected,
        InvalidBlock,
        ContractReverted,
        Role,
        Duplicate,
        Uninitialized,
        AlreadyInitialized,
        Locked,
        Capacity,
        State,
        Sequencing,
        Rejected,
        Routing,
        Timeout,
        Parse,
    };

    std::string_view to_string(Errc code) noexcept;

    class Error : public std::runtime_error
    {
    public:
        Error(Errc code, const std::string &message)
            : std::runtime_error(message), m_code(code)
        {
        }

        Errc code() const noexcept { return m_code; }

    private:
        Errc m_code;
    };
} // namespace dnas
