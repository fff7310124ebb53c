#include "dnas/common/error.hpp"

namespace dnas
{
    std::string_view to_string(Errc code) noexcept
    {
        switch (code)
        {
        case Errc::InvalidArgument: return "invalid-argument";
        case Errc::Decode: return "decode";
        case Errc::Encoding: return "encoding";
        case Errc::RejectedSeed: return "rejected-seed";
        case Errc::InvalidKey: return "invalid-key";
        case Errc::Recovery: return "recovery";
        case Errc::Mac: return "mac";
        case Errc::Auth: return "auth";
        case Errc::NotFound: return "not-found";
        case Errc::Membership: return "membership";
        case Errc::Authorization: return "authorization";
        case Errc::Config: return "config";
        case Errc::PoolRejected: return "pool-rejected";
        case Errc::SealRejected: return "seal-rejected";
        case Errc::InvalidBlock: return "invalid-block";
        case Errc::ContractReverted: return "contract-reverted";
        case Errc::Role: return "role";
        case Errc::Duplicate: return "duplicate";
        case Errc::Uninitialized: return "uninitialized-proxy";
        case Errc::AlreadyInitialized: return "already-initialized";
        case Errc::Locked: return "locked";
        case Errc::Capacity: return "capacity";
        case Errc::State: return "state";
        case Errc::Sequencing: return "sequencing";
        case Errc::Rejected: return "rejected";
        case Errc::Routing: return "routing";
        case Errc::Timeout: return "timeout";
        case Errc::Parse: return "parse";
        }
        return "unknown";
    }
} // namespace dnas
