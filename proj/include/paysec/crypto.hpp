// Copyright 2026 The paysec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Primitive layer: SHA-256 / HMAC-SHA-256 (via OpenSSL), AES-256-GCM AEAD,
// big-integer RSA with deterministic key generation, hash-then-sign
// signatures, a seeded-mask key wrap, a hybrid public-key envelope, and a
// minimal one-level certificate authority.
//
// All values are immutable after construction; operations are pure
// functions plus an explicit Rng where randomness is needed.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "paysec/bigint.hpp"
#include "paysec/bytes.hpp"
#include "paysec/errors.hpp"
#include "paysec/rng.hpp"

namespace paysec::crypto {

using Digest = std::array<std::uint8_t, 32>;

constexpr std::size_t kSymKeyLen = 32;
constexpr std::size_t kNonceLen = 12;
constexpr std::size_t kTagLen = 16;

// Plaintext lengths are hidden up to this granularity inside the hybrid
// envelope.
constexpr std::size_t kEnvelopePadBlock = 256;

inline Bytes digest_bytes(const Digest& d) {
    return Bytes(d.begin(), d.end());
}

inline Digest bytes_to_digest(const Bytes& b) {
    if (b.size() != std::tuple_size<Digest>::value)
        throw ParseError("digest field has wrong length");
    Digest out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
}

inline Digest sha256(const std::uint8_t* data, std::size_t len) {
    Digest out{};
    unsigned int outlen = 0;
    if (EVP_Digest(data, len, out.data(), &outlen, EVP_sha256(), nullptr) != 1 ||
        outlen != out.size())
        throw Error("sha256 failed");
    return out;
}

inline Digest sha256(const Bytes& data) {
    return sha256(data.data(), data.size());
}

// h_K(key, .): HMAC-SHA-256. Keys shorter than 16 bytes are rejected.
inline Digest keyed_hash(const Bytes& key, const Bytes& data) {
    if (key.size() < 16)
        throw InvalidParameter("keyed_hash: key must be at least 16 bytes");
    Digest out{};
    unsigned int outlen = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
             data.data(), data.size(), out.data(), &outlen) == nullptr ||
        outlen != out.size())
        throw Error("hmac failed");
    return out;
}

namespace detail {

struct CipherCtx {
    EVP_CIPHER_CTX* ctx;
    CipherCtx() : ctx(EVP_CIPHER_CTX_new()) {
        if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
    }
    ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
    CipherCtx(const CipherCtx&) = delete;
    CipherCtx& operator=(const CipherCtx&) = delete;
};

} // namespace detail

// AES-256-GCM; returns ciphertext || 16-byte tag. Deterministic for a fixed
// (key, nonce, plaintext); nonces must be unique per key.
inline Bytes sym_encrypt(const Bytes& key, const Bytes& nonce, const Bytes& plaintext) {
    if (key.size() != kSymKeyLen)
        throw InvalidParameter("sym_encrypt: key must be 32 bytes");
    if (nonce.size() != kNonceLen)
        throw InvalidParameter("sym_encrypt: nonce must be 12 bytes");
    detail::CipherCtx c;
    if (EVP_EncryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1)
        throw Error("gcm init failed");
    Bytes out(plaintext.size() + kTagLen);
    int len = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(c.ctx, out.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
        throw Error("gcm encrypt failed");
    int fin = 0;
    if (EVP_EncryptFinal_ex(c.ctx, out.data() + len, &fin) != 1)
        throw Error("gcm finalize failed");
    if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, kTagLen,
                            out.data() + plaintext.size()) != 1)
        throw Error("gcm tag failed");
    return out;
}

inline Bytes sym_decrypt(const Bytes& key, const Bytes& nonce, const Bytes& ciphertext) {
    if (key.size() != kSymKeyLen)
        throw InvalidParameter("sym_decrypt: key must be 32 bytes");
    if (nonce.size() != kNonceLen)
        throw InvalidParameter("sym_decrypt: nonce must be 12 bytes");
    if (ciphertext.size() < kTagLen)
        throw IntegrityError("sym_decrypt: ciphertext too short");
    detail::CipherCtx c;
    if (EVP_DecryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1)
        throw Error("gcm init failed");
    std::size_t body = ciphertext.size() - kTagLen;
    Bytes tag(ciphertext.end() - kTagLen, ciphertext.end());
    if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, kTagLen, tag.data()) != 1)
        throw Error("gcm tag set failed");
    Bytes out(body);
    int len = 0;
    if (body > 0 &&
        EVP_DecryptUpdate(c.ctx, out.data(), &len, ciphertext.data(),
                          static_cast<int>(body)) != 1)
        throw IntegrityError("sym_decrypt: authentication failed");
    int fin = 0;
    if (EVP_DecryptFinal_ex(c.ctx, out.data() + len, &fin) != 1)
        throw IntegrityError("sym_decrypt: authentication failed");
    return out;
}

// MGF1 over SHA-256.
inline Bytes mgf1(const Bytes& seed, std::size_t len) {
    Bytes out;
    out.reserve(len + 32);
    for (std::uint32_t counter = 0; out.size() < len; ++counter) {
        Bytes block = seed;
        block.push_back(static_cast<std::uint8_t>(counter >> 24));
        block.push_back(static_cast<std::uint8_t>(counter >> 16));
        block.push_back(static_cast<std::uint8_t>(counter >> 8));
        block.push_back(static_cast<std::uint8_t>(counter));
        Digest d = sha256(block);
        out.insert(out.end(), d.begin(), d.end());
    }
    out.resize(len);
    return out;
}

struct RsaPublicKey {
    BigInt n;
    BigInt e;

    bool operator==(const RsaPublicKey&) const = default;
};

struct RsaKeyPair {
    BigInt n;
    BigInt e;
    BigInt d;
    unsigned bits = 0;

    RsaPublicKey public_key() const { return {n, e}; }
    bool has_private() const { return d != 0; }

    // Test construction from known primes. d is the textbook inverse of e
    // mod (p-1)(q-1); it also satisfies e*d = 1 mod lcm(p-1, q-1).
    static RsaKeyPair from_primes(const BigInt& p, const BigInt& q, const BigInt& e) {
        if (p == q) throw InvalidParameter("from_primes: p and q must differ");
        BigInt n = p * q;
        BigInt phi = (p - 1) * (q - 1);
        if (big_gcd(e, phi) != 1)
            throw InvalidParameter("from_primes: e not invertible mod (p-1)(q-1)");
        RsaKeyPair kp;
        kp.n = n;
        kp.e = e;
        kp.d = mod_inverse(e, phi);
        kp.bits = static_cast<unsigned>(bit_length(n));
        return kp;
    }
};

// Deterministic: the same (bits, seed) always yields the same keypair.
// Desk-scale keys down to 64 bits are allowed for tests.
inline RsaKeyPair generate_keypair(unsigned bits, std::uint64_t rng_seed) {
    if (bits < 64)
        throw InvalidParameter("generate_keypair: need at least 64 bits");
    Rng rng(rng_seed);
    const BigInt e = 65537;
    for (;;) {
        std::size_t p_bits = (bits + 1) / 2;
        std::size_t q_bits = bits / 2;
        BigInt p = random_prime(p_bits, rng);
        BigInt q = random_prime(q_bits, rng);
        if (p == q) continue;
        BigInt phi = (p - 1) * (q - 1);
        if (big_gcd(e, phi) != 1) continue;
        RsaKeyPair kp;
        kp.n = p * q;
        kp.e = e;
        kp.d = mod_inverse(e, phi);
        kp.bits = bits;
        return kp;
    }
}

// Deterministic padded-digest encoding of a message as an integer below n.
// For moduli of at least 35 bytes this is a PKCS#1-style block
// 00 01 FF..FF 00 || SHA-256(msg); tiny desk-scale moduli reduce the digest
// instead.
inline BigInt message_to_integer(const Bytes& message, const BigInt& n) {
    Digest d = sha256(message);
    std::size_t k = byte_length(n);
    if (k >= 35) {
        Bytes em;
        em.reserve(k);
        em.push_back(0x00);
        em.push_back(0x01);
        em.insert(em.end(), k - 35, 0xff);
        em.push_back(0x00);
        em.insert(em.end(), d.begin(), d.end());
        return bytes_to_bigint(em);
    }
    return bytes_to_bigint(digest_bytes(d)) % n;
}

// Hash-then-sign: the padded digest raised to the private exponent.
inline BigInt sign(const RsaKeyPair& kp, const Bytes& message) {
    if (!kp.has_private())
        throw InvalidParameter("sign: private exponent missing");
    return mod_pow(message_to_integer(message, kp.n), kp.d, kp.n);
}

inline bool verify(const RsaPublicKey& pub, const Bytes& message, const BigInt& sig) {
    if (sig < 0 || sig >= pub.n) return false;
    return mod_pow(sig, pub.e, pub.n) == message_to_integer(message, pub.n);
}

// ---------------------------------------------------------------------------
// Key wrap: a 32-byte symmetric key under RSA with seeded-MGF1 masking
// (OAEP-style; the full RFC construction does not fit desk-scale moduli).
// Layout of the encryption block, always byte_length(n) bytes:
//   00 02 || maskedSeed(16) || maskedDB(k-18),  DB = key || 00..00
// The leading zero byte keeps the block below n.

constexpr std::size_t kWrapMinModulusBytes = 50;

inline Bytes rsa_wrap_key(const RsaPublicKey& pub, const Bytes& key, Rng& rng) {
    if (key.size() != kSymKeyLen)
        throw InvalidParameter("rsa_wrap_key: key must be 32 bytes");
    std::size_t k = byte_length(pub.n);
    if (k < kWrapMinModulusBytes)
        throw InvalidParameter("rsa_wrap_key: modulus too small for key wrap");
    Bytes seed = rng.bytes(16);
    Bytes db(k - 18, 0);
    std::copy(key.begin(), key.end(), db.begin());
    Bytes db_mask = mgf1(seed, db.size());
    for (std::size_t i = 0; i < db.size(); ++i) db[i] ^= db_mask[i];
    Bytes seed_mask = mgf1(db, 16);
    for (std::size_t i = 0; i < 16; ++i) seed[i] ^= seed_mask[i];
    Bytes em;
    em.reserve(k);
    em.push_back(0x00);
    em.push_back(0x02);
    em.insert(em.end(), seed.begin(), seed.end());
    em.insert(em.end(), db.begin(), db.end());
    BigInt c = mod_pow(bytes_to_bigint(em), pub.e, pub.n);
    return bigint_to_bytes_padded(c, k);
}

inline Bytes rsa_unwrap_key(const RsaKeyPair& kp, const Bytes& block) {
    std::size_t k = byte_length(kp.n);
    if (block.size() != k)
        throw InvalidParameter("rsa_unwrap_key: wrong block size");
    BigInt c = bytes_to_bigint(block);
    if (c >= kp.n)
        throw IntegrityError("rsa_unwrap_key: block out of range");
    Bytes em = bigint_to_bytes_padded(mod_pow(c, kp.d, kp.n), k);
    if (em[0] != 0x00 || em[1] != 0x02)
        throw IntegrityError("rsa_unwrap_key: bad padding marker");
    Bytes seed(em.begin() + 2, em.begin() + 18);
    Bytes db(em.begin() + 18, em.end());
    Bytes seed_mask = mgf1(db, 16);
    for (std::size_t i = 0; i < 16; ++i) seed[i] ^= seed_mask[i];
    Bytes db_mask = mgf1(seed, db.size());
    for (std::size_t i = 0; i < db.size(); ++i) db[i] ^= db_mask[i];
    for (std::size_t i = kSymKeyLen; i < db.size(); ++i)
        if (db[i] != 0) throw IntegrityError("rsa_unwrap_key: bad padding filler");
    return Bytes(db.begin(), db.begin() + kSymKeyLen);
}

// ---------------------------------------------------------------------------
// Hybrid envelope: fresh AEAD key wrapped under RSA, payload padded to a
// block multiple so only the padded length is visible.

struct HybridEnvelope {
    Bytes wrapped_key;
    Bytes nonce;
    Bytes ct;

    Bytes serialize() const {
        return Encoder().bytes(wrapped_key).bytes(nonce).bytes(ct).take();
    }
    static HybridEnvelope parse(const Bytes& in) {
        Decoder dec(in);
        HybridEnvelope env;
        env.wrapped_key = dec.bytes();
        env.nonce = dec.bytes();
        env.ct = dec.bytes();
        dec.expect_done();
        return env;
    }
};

inline HybridEnvelope pk_encrypt(const RsaPublicKey& pub, const Bytes& plaintext, Rng& rng) {
    Bytes key = rng.bytes(kSymKeyLen);
    HybridEnvelope env;
    env.wrapped_key = rsa_wrap_key(pub, key, rng);
    env.nonce = rng.bytes(kNonceLen);
    Bytes inner;
    inner.reserve(plaintext.size() + kEnvelopePadBlock);
    std::uint32_t len = static_cast<std::uint32_t>(plaintext.size());
    inner.push_back(static_cast<std::uint8_t>(len >> 24));
    inner.push_back(static_cast<std::uint8_t>(len >> 16));
    inner.push_back(static_cast<std::uint8_t>(len >> 8));
    inner.push_back(static_cast<std::uint8_t>(len));
    inner.insert(inner.end(), plaintext.begin(), plaintext.end());
    std::size_t padded = (inner.size() + kEnvelopePadBlock - 1) / kEnvelopePadBlock * kEnvelopePadBlock;
    inner.resize(padded, 0);
    env.ct = sym_encrypt(key, env.nonce, inner);
    return env;
}

inline Bytes pk_decrypt(const RsaKeyPair& kp, const HybridEnvelope& env) {
    Bytes key = rsa_unwrap_key(kp, env.wrapped_key);
    if (env.nonce.size() != kNonceLen)
        throw IntegrityError("pk_decrypt: bad nonce length");
    Bytes inner = sym_decrypt(key, env.nonce, env.ct);
    if (inner.size() < 4)
        throw IntegrityError("pk_decrypt: truncated payload frame");
    std::uint32_t len = static_cast<std::uint32_t>(inner[0]) << 24 |
                        static_cast<std::uint32_t>(inner[1]) << 16 |
                        static_cast<std::uint32_t>(inner[2]) << 8 |
                        static_cast<std::uint32_t>(inner[3]);
    if (4 + static_cast<std::size_t>(len) > inner.size())
        throw IntegrityError("pk_decrypt: bad payload length");
    return Bytes(inner.begin() + 4, inner.begin() + 4 + len);
}

// ---------------------------------------------------------------------------
// Minimal certificate authority: one level, no chains or revocation lists.

struct Certificate {
    std::string subject_id;
    RsaPublicKey subject_key;
    std::string issuer_id;
    BigInt signature;

    Bytes signed_fields() const {
        return Encoder()
            .str(subject_id)
            .bytes(bigint_to_bytes(subject_key.n))
            .bytes(bigint_to_bytes(subject_key.e))
            .str(issuer_id)
            .take();
    }
};

inline Certificate ca_issue(const RsaKeyPair& ca_keys, const std::string& ca_id,
                            const std::string& subject_id, const RsaPublicKey& subject_key) {
    Certificate cert;
    cert.subject_id = subject_id;
    cert.subject_key = subject_key;
    cert.issuer_id = ca_id;
    cert.signature = sign(ca_keys, cert.signed_fields());
    return cert;
}

inline bool ca_verify(const RsaPublicKey& ca_pub, const Certificate& cert) {
    return verify(ca_pub, cert.signed_fields(), cert.signature);
}

inline Bytes encode_certificate(const Certificate& cert) {
    return Encoder().bytes(cert.signed_fields()).bytes(bigint_to_bytes(cert.signature)).take();
}

inline Certificate decode_certificate(const Bytes& data) {
    Decoder dec(data);
    Bytes fields = dec.bytes();
    Certificate cert;
    cert.signature = bytes_to_bigint(dec.bytes());
    dec.expect_done();
    Decoder f(fields);
    cert.subject_id = f.str();
    cert.subject_key.n = bytes_to_bigint(f.bytes());
    cert.subject_key.e = bytes_to_bigint(f.bytes());
    cert.issuer_id = f.str();
    f.expect_done();
    return cert;
}

// Public directory certificates are retrieved from by id.
class CertificateRegistry {
public:
    void add(const Certificate& cert) { by_id_[cert.subject_id] = cert; }
    const Certificate* find(const std::string& subject_id) const {
        auto it = by_id_.find(subject_id);
        return it == by_id_.end() ? nullptr : &it->second;
    }

private:
    std::map<std::string, Certificate> by_id_;
};

// ---------------------------------------------------------------------------
// Key and certificate files: decimal big integers, one `field=value` per
// line, `#` comments allowed. Signatures are base16.

namespace detail {

inline std::map<std::string, std::string> parse_kv_lines(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        std::size_t eq = line.find('=', start);
        if (eq == std::string::npos)
            throw ParseError("key file: expected field=value line");
        std::string key = line.substr(start, eq - start);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::size_t vstart = value.find_first_not_of(" \t");
        std::size_t vend = value.find_last_not_of(" \t\r");
        value = vstart == std::string::npos ? "" : value.substr(vstart, vend - vstart + 1);
        kv[key] = value;
    }
    return kv;
}

inline BigInt parse_decimal(const std::string& s) {
    if (s.empty()) throw ParseError("key file: empty integer field");
    for (char c : s)
        if (c < '0' || c > '9') throw ParseError("key file: non-decimal integer field");
    return BigInt(s);
}

} // namespace detail

inline void save_keypair(std::ostream& out, const RsaKeyPair& kp, bool include_private = true) {
    out << "# paysec RSA key (" << kp.bits << " bits)\n";
    out << "n=" << kp.n << "\n";
    out << "e=" << kp.e << "\n";
    if (include_private && kp.has_private())
        out << "d=" << kp.d << "\n";
}

inline RsaKeyPair load_keypair(std::istream& in) {
    auto kv = detail::parse_kv_lines(in);
    if (!kv.count("n") || !kv.count("e"))
        throw ParseError("key file: missing n or e");
    RsaKeyPair kp;
    kp.n = detail::parse_decimal(kv.at("n"));
    kp.e = detail::parse_decimal(kv.at("e"));
    kp.d = kv.count("d") ? detail::parse_decimal(kv.at("d")) : 0;
    kp.bits = static_cast<unsigned>(bit_length(kp.n));
    return kp;
}

inline void save_keypair_file(const std::string& path, const RsaKeyPair& kp,
                              bool include_private = true) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write key file: " + path);
    save_keypair(out, kp, include_private);
}

inline RsaKeyPair load_keypair_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read key file: " + path);
    return load_keypair(in);
}

inline void save_certificate(std::ostream& out, const Certificate& cert) {
    out << "# paysec certificate\n";
    out << "subject=" << cert.subject_id << "\n";
    out << "n=" << cert.subject_key.n << "\n";
    out << "e=" << cert.subject_key.e << "\n";
    out << "issuer=" << cert.issuer_id << "\n";
    out << "sig=" << to_hex(bigint_to_bytes(cert.signature)) << "\n";
}

inline Certificate load_certificate(std::istream& in) {
    auto kv = detail::parse_kv_lines(in);
    for (const char* field : {"subject", "n", "e", "issuer", "sig"})
        if (!kv.count(field))
            throw ParseError(std::string("certificate file: missing ") + field);
    Certificate cert;
    cert.subject_id = kv.at("subject");
    cert.subject_key.n = detail::parse_decimal(kv.at("n"));
    cert.subject_key.e = detail::parse_decimal(kv.at("e"));
    cert.issuer_id = kv.at("issuer");
    cert.signature = bytes_to_bigint(from_hex(kv.at("sig")));
    return cert;
}

inline void save_certificate_file(const std::string& path, const Certificate& cert) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write certificate file: " + path);
    save_certificate(out, cert);
}

inline Certificate load_certificate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read certificate file: " + path);
    return load_certificate(in);
}

} // namespace paysec::crypto
