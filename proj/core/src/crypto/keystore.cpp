#include "dnas/crypto/keystore.hpp"

#include "dnas/crypto/hash.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <memory>

namespace dnas::crypto
{
    namespace
    {
        Bytes random_bytes(std::size_t n)
        {
            Bytes out(n);
            if (RAND_bytes(out.data(), static_cast<int>(n)) != 1)
                throw Error(Errc::InvalidKey, "CSPRNG failure");
            return out;
        }

        Bytes derive_key(std::string_view password, const KdfParams &kdf)
        {
            Bytes dk(kdf.dklen);
            // 128 * r * N bytes of scratch, plus headroom.
            const std::uint64_t maxmem = 128ull * kdf.r * kdf.n * 2 + (1u << 20);
            if (EVP_PBE_scrypt(password.data(), password.size(), kdf.salt.data(), kdf.salt.size(), kdf.n, kdf.r, kdf.p,
                               maxmem, dk.data(), dk.size()) != 1)
                throw Error(Errc::InvalidArgument, "scrypt key derivation failed");
            return dk;
        }

        Bytes aes128_ctr(ByteView key16, ByteView iv, ByteView input)
        {
            std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
            Bytes out(input.size());
            int len = 0;
            if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ctr(), nullptr, key16.data(), iv.data()) != 1 ||
                EVP_EncryptUpdate(ctx.get(), out.data(), &len, input.data(), static_cast<int>(input.size())) != 1)
                throw Error(Errc::InvalidArgument, "aes-128-ctr failed");
            return out;
        }

        Hash32 compute_mac(ByteView dk, ByteView ciphertext)
        {
            return keccak256(ByteWriter{}.raw(dk.subspan(16, 16)).raw(ciphertext).take());
        }
    } // namespace

    nlohmann::json Keystore::to_json() const
    {
        return {
            {"address", to_hex(address.bytes())},
            {"ciphertext", to_hex(ciphertext)},
            {"kdf_params",
             {{"kdf", "scrypt"},
              {"n", kdf_params.n},
              {"r", kdf_params.r},
              {"p", kdf_params.p},
              {"dklen", kdf_params.dklen},
              {"salt", to_hex(kdf_params.salt)},
              {"iv", to_hex(kdf_params.iv)}}},
            {"mac", to_hex(mac)},
        };
    }

    Keystore Keystore::from_json(const nlohmann::json &j)
    {
        try
        {
            Keystore ks;
            ks.address = Address::from_hex(j.at("address").get<std::string>());
            ks.ciphertext = from_hex(j.at("ciphertext").get<std::string>());
            const auto &k = j.at("kdf_params");
            if (k.value("kdf", "scrypt") != "scrypt")
                throw Error(Errc::Parse, "unsupported kdf");
            ks.kdf_params.n = k.at("n").get<std::uint64_t>();
            ks.kdf_params.r = k.at("r").get<std::uint32_t>();
            ks.kdf_params.p = k.at("p").get<std::uint32_t>();
            ks.kdf_params.dklen = k.at("dklen").get<std::uint32_t>();
            ks.kdf_params.salt = from_hex(k.at("salt").get<std::string>());
            ks.kdf_params.iv = from_hex(k.at("iv").get<std::string>());
            ks.mac = fixed_from_hex<32>(j.at("mac").get<std::string>());
            return ks;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(Errc::Parse, std::string("malformed keystore: ") + e.what());
        }
    }

    Keystore encrypt_keystore(const KeyPair &key, std::string_view password, std::optional<Bytes> salt,
                              std::optional<Bytes> iv, std::uint64_t work_factor)
    {
        Keystore ks;
        ks.address = key.address();
        ks.kdf_params.n = work_factor;
        ks.kdf_params.salt = salt ? std::move(*salt) : random_bytes(32);
        ks.kdf_params.iv = iv ? std::move(*iv) : random_bytes(16);
        if (ks.kdf_params.iv.size() != 16)
            throw Error(Errc::InvalidArgument, "iv must be 16 bytes");

        Bytes dk = derive_key(password, ks.kdf_params);
        ks.ciphertext = aes128_ctr(ByteView(dk).first(16), ks.kdf_params.iv, key.secret_key.bytes());
        ks.mac = compute_mac(dk, ks.ciphertext);
        OPENSSL_cleanse(dk.data(), dk.size());
        return ks;
    }

    KeyPair decrypt_keystore(const Keystore &ks, std::string_view password)
    {
        if (ks.kdf_params.dklen < 32 || ks.kdf_params.iv.size() != 16)
            throw Error(Errc::Parse, "unsupported keystore parameters");
        Bytes dk = derive_key(password, ks.kdf_params);
        const Hash32 mac = compute_mac(dk, ks.ciphertext);
        if (CRYPTO_memcmp(mac.data(), ks.mac.data(), mac.size()) != 0)
        {
            OPENSSL_cleanse(dk.data(), dk.size());
            throw Error(Errc::Mac, "keystore MAC mismatch (wrong password or corrupted file)");
        }
        Bytes plain = aes128_ctr(ByteView(dk).first(16), ks.kdf_params.iv, ks.ciphertext);
        OPENSSL_cleanse(dk.data(), dk.size());
        if (plain.size() != 32)
            throw Error(Errc::Parse, "keystore ciphertext has wrong length");
        Hash32 scalar{};
        std::copy(plain.begin(), plain.end(), scalar.begin());
        OPENSSL_cleanse(plain.data(), plain.size());

        KeyPair kp = keypair_from_secret(SecretKey(scalar));
        if (kp.address() != ks.address)
            throw Error(Errc::Mac, "decrypted key does not match keystore address");
        return kp;
    }
} // namespace dnas::crypto
