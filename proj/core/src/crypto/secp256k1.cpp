#include "dnas/crypto/hash.hpp"
#include "dnas/crypto/keys.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>
#include <openssl/rand.h>

#include <algorithm>
#include <memory>

namespace dnas::crypto
{
    namespace
    {
        struct BnFree
        {
            void operator()(BIGNUM *b) const noexcept { BN_clear_free(b); }
        };
        struct CtxFree
        {
            void operator()(BN_CTX *c) const noexcept { BN_CTX_free(c); }
        };
        struct PointFree
        {
            void operator()(EC_POINT *p) const noexcept { EC_POINT_clear_free(p); }
        };
        using Bn = std::unique_ptr<BIGNUM, BnFree>;
        using Ctx = std::unique_ptr<BN_CTX, CtxFree>;
        using Point = std::unique_ptr<EC_POINT, PointFree>;

        struct Curve
        {
            EC_GROUP *group = nullptr;
            BIGNUM *order = nullptr;
            BIGNUM *half_order = nullptr;
            Hash32 order_bytes{};

            Curve()
            {
                group = EC_GROUP_new_by_curve_name(NID_secp256k1);
                order = BN_new();
                half_order = BN_new();
                if (group == nullptr || order == nullptr || half_order == nullptr ||
                    EC_GROUP_get_order(group, order, nullptr) != 1 || BN_rshift1(half_order, order) != 1)
                    throw Error(Errc::InvalidKey, "secp256k1 unavailable in libcrypto");
                BN_bn2binpad(order, order_bytes.data(), static_cast<int>(order_bytes.size()));
            }
        };

        // Read-only after construction; EC_GROUP is safe to share across threads.
        const Curve &curve()
        {
            static const Curve c;
            return c;
        }

        Bn bn() { return Bn(BN_new()); }

        Bn bn_from(ByteView bytes)
        {
            return Bn(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
        }

        Hash32 bn_to32(const BIGNUM *v)
        {
            Hash32 out{};
            BN_bn2binpad(v, out.data(), static_cast<int>(out.size()));
            return out;
        }

        bool in_scalar_range(const BIGNUM *v) { return !BN_is_zero(v) && BN_cmp(v, curve().order) < 0; }

        Point point() { return Point(EC_POINT_new(curve().group)); }

        PublicKey encode_point(const EC_POINT *p, BN_CTX *ctx)
        {
            std::array<std::uint8_t, 65> raw{};
            if (EC_POINT_point2oct(curve().group, p, POINT_CONVERSION_UNCOMPRESSED, raw.data(), raw.size(), ctx) != raw.size())
                throw Error(Errc::InvalidKey, "cannot encode curve point");
            PublicKey pk;
            std::copy(raw.begin() + 1, raw.end(), pk.xy.begin());
            return pk;
        }

        Point decode_point(const PublicKey &pk, BN_CTX *ctx)
        {
            std::array<std::uint8_t, 65> raw{};
            raw[0] = 0x04;
            std::copy(pk.xy.begin(), pk.xy.end(), raw.begin() + 1);
            auto p = point();
            // oct2point rejects coordinates that are not on the curve.
            if (EC_POINT_oct2point(curve().group, p.get(), raw.data(), raw.size(), ctx) != 1 ||
                EC_POINT_is_on_curve(curve().group, p.get(), ctx) != 1)
                throw Error(Errc::InvalidKey, "public key is not a point on secp256k1");
            return p;
        }

        // RFC 6979 section 3.2 with HMAC-SHA256 and qlen = hlen = 256.
        class NonceGenerator
        {
        public:
            NonceGenerator(const Hash32 &secret, const Hash32 &digest_mod_n)
            {
                m_v.fill(0x01);
                m_k.fill(0x00);
                reseed(0x00, secret, digest_mod_n);
                m_v = hmac(m_v);
                reseed(0x01, secret, digest_mod_n);
                m_v = hmac(m_v);
            }

            Hash32 next()
            {
                if (m_started)
                {
                    Bytes data(m_v.begin(), m_v.end());
                    data.push_back(0x00);
                    m_k = hmac_sha256(m_k, data);
                    m_v = hmac(m_v);
                }
                m_started = true;
                m_v = hmac(m_v);
                return m_v;
            }

        private:
            Hash32 hmac(const Hash32 &data) const { return hmac_sha256(m_k, data); }

            void reseed(std::uint8_t tag, const Hash32 &secret, const Hash32 &digest)
            {
                Bytes data(m_v.begin(), m_v.end());
                data.push_back(tag);
                data.insert(data.end(), secret.begin(), secret.end());
                data.insert(data.end(), digest.begin(), digest.end());
                m_k = hmac_sha256(m_k, data);
            }

            Hash32 m_v{};
            Hash32 m_k{};
            bool m_started = false;
        };
    } // namespace

    Address Address::from_hex(std::string_view hex)
    {
        return Address(fixed_from_hex<kAddressSize>(hex));
    }

    bool Address::is_zero() const noexcept
    {
        return std::all_of(m_bytes.begin(), m_bytes.end(), [](std::uint8_t b) { return b == 0; });
    }

    SecretKey::SecretKey(const Hash32 &scalar) : m_scalar(scalar)
    {
        const Bn v = bn_from(scalar);
        if (!in_scalar_range(v.get()))
            throw Error(Errc::RejectedSeed, "secret key scalar must lie in [1, n-1]");
    }

    SecretKey::~SecretKey()
    {
        OPENSSL_cleanse(m_scalar.data(), m_scalar.size());
    }

    Address KeyPair::address() const { return derive_address(public_key); }

    std::array<std::uint8_t, 65> Signature::to_bytes() const
    {
        std::array<std::uint8_t, 65> out{};
        std::copy(r.begin(), r.end(), out.begin());
        std::copy(s.begin(), s.end(), out.begin() + 32);
        out[64] = v;
        return out;
    }

    Signature Signature::from_bytes(ByteView bytes65)
    {
        if (bytes65.size() != 65)
            throw Error(Errc::Decode, "signature must be 65 bytes");
        Signature sig;
        std::copy(bytes65.begin(), bytes65.begin() + 32, sig.r.begin());
        std::copy(bytes65.begin() + 32, bytes65.begin() + 64, sig.s.begin());
        sig.v = bytes65[64];
        return sig;
    }

    Signature Signature::from_hex(std::string_view hex)
    {
        const Bytes raw = dnas::from_hex(hex);
        return from_bytes(raw);
    }

    const Hash32 &curve_order() noexcept { return curve().order_bytes; }

    KeyPair keypair_from_secret(const SecretKey &secret)
    {
        Ctx ctx(BN_CTX_new());
        const Bn d = bn_from(secret.bytes());
        auto pub = point();
        if (EC_POINT_mul(curve().group, pub.get(), d.get(), nullptr, nullptr, ctx.get()) != 1)
            throw Error(Errc::InvalidKey, "scalar multiplication failed");
        return KeyPair{secret, encode_point(pub.get(), ctx.get())};
    }

    KeyPair generate_keypair(std::optional<Hash32> seed)
    {
        if (seed)
            return keypair_from_secret(SecretKey(*seed));

        for (;;)
        {
            Hash32 candidate{};
            if (RAND_bytes(candidate.data(), static_cast<int>(candidate.size())) != 1)
                throw Error(Errc::InvalidKey, "CSPRNG failure");
            const Bn v = bn_from(candidate);
            if (in_scalar_range(v.get()))
                return keypair_from_secret(SecretKey(candidate));
        }
    }

    Address derive_address(const PublicKey &public_key)
    {
        Ctx ctx(BN_CTX_new());
        (void)decode_point(public_key, ctx.get());
        const Hash32 h = keccak256(public_key.xy);
        Address::Storage out{};
        std::copy(h.end() - kAddressSize, h.end(), out.begin());
        return Address(out);
    }

    Signature sign_digest(const Hash32 &digest, const KeyPair &key)
    {
        const Curve &c = curve();
        Ctx ctx(BN_CTX_new());

        const Bn d = bn_from(key.secret_key.bytes());
        Bn e = bn_from(digest);
        BN_nnmod(e.get(), e.get(), c.order, ctx.get());

        NonceGenerator nonces(key.secret_key.bytes(), bn_to32(e.get()));
        for (;;)
        {
            const Bn k = bn_from(nonces.next());
            if (!in_scalar_range(k.get()))
                continue;

            auto rp = point();
            Bn x = bn(), y = bn();
            EC_POINT_mul(c.group, rp.get(), k.get(), nullptr, nullptr, ctx.get());
            EC_POINT_get_affine_coordinates(c.group, rp.get(), x.get(), y.get(), ctx.get());

            // x >= n would need recovery ids 2/3; the odds are ~2^-128, so treat it as a retry.
            if (BN_cmp(x.get(), c.order) >= 0)
                continue;
            Bn r = bn();
            BN_copy(r.get(), x.get());
            if (BN_is_zero(r.get()))
                continue;

            // s = k^-1 (e + r d) mod n
            Bn s = bn(), kinv = bn(), rd = bn();
            BN_mod_inverse(kinv.get(), k.get(), c.order, ctx.get());
            BN_mod_mul(rd.get(), r.get(), d.get(), c.order, ctx.get());
            BN_mod_add(s.get(), e.get(), rd.get(), c.order, ctx.get());
            BN_mod_mul(s.get(), s.get(), kinv.get(), c.order, ctx.get());
            if (BN_is_zero(s.get()))
                continue;

            int recid = BN_is_odd(y.get()) ? 1 : 0;
            if (BN_cmp(s.get(), c.half_order) > 0)
            {
                BN_sub(s.get(), c.order, s.get());
                recid ^= 1;
            }

            Signature sig;
            sig.r = bn_to32(r.get());
            sig.s = bn_to32(s.get());
            sig.v = static_cast<std::uint8_t>(27 + recid);
            return sig;
        }
    }

    PublicKey recover_public_key(const Hash32 &digest, const Signature &sig)
    {
        const Curve &c = curve();
        int recid = 0;
        if (sig.v == 0 || sig.v == 1)
            recid = sig.v;
        else if (sig.v == 27 || sig.v == 28)
            recid = sig.v - 27;
        else
            throw Error(Errc::Recovery, "invalid recovery id");

        Ctx ctx(BN_CTX_new());
        const Bn r = bn_from(sig.r);
        const Bn s = bn_from(sig.s);
        if (!in_scalar_range(r.get()) || !in_scalar_range(s.get()))
            throw Error(Errc::Recovery, "signature scalar out of range");
        if (BN_cmp(s.get(), c.half_order) > 0)
            throw Error(Errc::Recovery, "non-canonical signature (high s)");

        // R = (r, y) with y parity from recid.
        std::array<std::uint8_t, 33> compressed{};
        compressed[0] = static_cast<std::uint8_t>(0x02 | recid);
        std::copy(sig.r.begin(), sig.r.end(), compressed.begin() + 1);
        auto rp = point();
        if (EC_POINT_oct2point(c.group, rp.get(), compressed.data(), compressed.size(), ctx.get()) != 1)
            throw Error(Errc::Recovery, "r is not the x coordinate of a curve point");

        // Q = r^-1 (s R - e G) = (-e r^-1) G + (s r^-1) R
        Bn e = bn_from(digest);
        BN_nnmod(e.get(), e.get(), c.order, ctx.get());
        Bn rinv = bn(), u1 = bn(), u2 = bn();
        BN_mod_inverse(rinv.get(), r.get(), c.order, ctx.get());
        BN_mod_mul(u1.get(), e.get(), rinv.get(), c.order, ctx.get());
        BN_mod_sub(u1.get(), c.order, u1.get(), c.order, ctx.get());
        BN_mod_mul(u2.get(), s.get(), rinv.get(), c.order, ctx.get());

        auto q = point();
        if (EC_POINT_mul(c.group, q.get(), u1.get(), rp.get(), u2.get(), ctx.get()) != 1)
            throw Error(Errc::Recovery, "point arithmetic failed");
        if (EC_POINT_is_at_infinity(c.group, q.get()) == 1)
            throw Error(Errc::Recovery, "recovered point at infinity");
        return encode_point(q.get(), ctx.get());
    }

    Address recover_signer(const Hash32 &digest, const Signature &sig)
    {
        return derive_address(recover_public_key(digest, sig));
    }
} // namespace dnas::crypto
