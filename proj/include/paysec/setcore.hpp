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

// Dual-signature payment requests: the customer binds order information
// and payment instruction with one signature while the merchant never
// sees card data and the gateway never sees the order.
//
// Request wire form, length-prefixed fields in order:
//   1. order information record (description, price, merchant id)
//   2. h(PI): digest of the canonical payment instruction
//   3. DS:    signature over canonical(h(PI), h(OI))
//   4. wrapped symmetric key under the gateway public key
//   5. canonical(nonce, ciphertext) of the PI envelope, whose plaintext
//      is canonical(gateway id, PI record, h(OI))

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "paysec/crypto.hpp"

namespace paysec::setcore {

struct PaymentInstruction {
    std::string pan;         // digit string
    std::string card_expiry; // "MM-YYYY"
    Bytes pan_secret;        // 20 bytes, shared with the gateway at setup
    Bytes ex_nonce;          // 20 bytes, fresh per transaction
    std::int64_t amount = 0; // minor currency units
};

struct OrderInformation {
    Bytes description;
    std::int64_t price = 0;
    std::string merchant_id;
};

constexpr std::size_t kPanSecretLen = 20;
constexpr std::size_t kExNonceLen = 20;

inline void check_pi(const PaymentInstruction& pi) {
    if (pi.pan_secret.size() != kPanSecretLen)
        throw InvalidParameter("pan_secret must be 20 bytes");
    if (pi.ex_nonce.size() != kExNonceLen)
        throw InvalidParameter("ex_nonce must be 20 bytes");
}

inline Bytes encode_pi(const PaymentInstruction& pi) {
    check_pi(pi);
    return Encoder()
        .str(pi.pan)
        .str(pi.card_expiry)
        .bytes(pi.pan_secret)
        .bytes(pi.ex_nonce)
        .i64(pi.amount)
        .take();
}

inline PaymentInstruction decode_pi(const Bytes& data) {
    Decoder dec(data);
    PaymentInstruction pi;
    pi.pan = dec.str();
    pi.card_expiry = dec.str();
    pi.pan_secret = dec.bytes();
    pi.ex_nonce = dec.bytes();
    pi.amount = dec.i64();
    dec.expect_done();
    check_pi(pi);
    return pi;
}

inline Bytes encode_oi(const OrderInformation& oi) {
    if (oi.price < 0) throw InvalidParameter("price must be non-negative");
    return Encoder().bytes(oi.description).i64(oi.price).str(oi.merchant_id).take();
}

inline OrderInformation decode_oi(const Bytes& data) {
    Decoder dec(data);
    OrderInformation oi;
    oi.description = dec.bytes();
    oi.price = dec.i64();
    oi.merchant_id = dec.str();
    dec.expect_done();
    return oi;
}

inline crypto::Digest pi_digest(const PaymentInstruction& pi) {
    return crypto::sha256(encode_pi(pi));
}

inline crypto::Digest oi_digest(const OrderInformation& oi) {
    return crypto::sha256(encode_oi(oi));
}

// Card-identity fingerprint whose fresh nonce keeps two payments with the
// same PAN unlinkable at the merchant.
inline crypto::Digest randomized_pi_hash(const PaymentInstruction& pi) {
    check_pi(pi);
    return crypto::sha256(Encoder()
                              .str(pi.pan)
                              .str(pi.card_expiry)
                              .bytes(pi.pan_secret)
                              .bytes(pi.ex_nonce)
                              .take());
}

inline Bytes dual_signature_message(const crypto::Digest& pi_hash,
                                    const crypto::Digest& oi_hash) {
    return Encoder()
        .bytes(crypto::digest_bytes(pi_hash))
        .bytes(crypto::digest_bytes(oi_hash))
        .take();
}

inline BigInt compute_dual_signature(const crypto::RsaKeyPair& customer,
                                     const PaymentInstruction& pi,
                                     const OrderInformation& oi) {
    return crypto::sign(customer, dual_signature_message(pi_digest(pi), oi_digest(oi)));
}

struct DualSignedRequest {
    OrderInformation oi;
    crypto::Digest pi_hash{};
    BigInt ds;
    crypto::HybridEnvelope pi_envelope;

    Bytes encode() const {
        return Encoder()
            .bytes(encode_oi(oi))
            .bytes(crypto::digest_bytes(pi_hash))
            .bytes(bigint_to_bytes(ds))
            .bytes(pi_envelope.wrapped_key)
            .bytes(Encoder().bytes(pi_envelope.nonce).bytes(pi_envelope.ct).take())
            .take();
    }

    static DualSignedRequest decode(const Bytes& data) {
        Decoder dec(data);
        DualSignedRequest req;
        req.oi = decode_oi(dec.bytes());
        req.pi_hash = crypto::bytes_to_digest(dec.bytes());
        req.ds = bytes_to_bigint(dec.bytes());
        req.pi_envelope.wrapped_key = dec.bytes();
        Bytes env_record = dec.bytes();
        Decoder env(env_record);
        req.pi_envelope.nonce = env.bytes();
        req.pi_envelope.ct = env.bytes();
        env.expect_done();
        dec.expect_done();
        return req;
    }
};

inline DualSignedRequest build_request(const crypto::RsaKeyPair& customer,
                                       const crypto::RsaPublicKey& gateway_key,
                                       const std::string& gateway_id,
                                       const PaymentInstruction& pi,
                                       const OrderInformation& oi, Rng& rng) {
    DualSignedRequest req;
    req.oi = oi;
    req.pi_hash = pi_digest(pi);
    crypto::Digest oi_h = oi_digest(oi);
    req.ds = crypto::sign(customer, dual_signature_message(req.pi_hash, oi_h));
    Bytes envelope_plain = Encoder()
                               .str(gateway_id)
                               .bytes(encode_pi(pi))
                               .bytes(crypto::digest_bytes(oi_h))
                               .take();
    req.pi_envelope = crypto::pk_encrypt(gateway_key, envelope_plain, rng);
    return req;
}

// The merchant checks the dual signature against the order it can read
// and the PI digest it was handed; the card data stays opaque.
inline bool merchant_verify(const DualSignedRequest& req,
                            const crypto::RsaPublicKey& customer) {
    return crypto::verify(customer, dual_signature_message(req.pi_hash, oi_digest(req.oi)),
                          req.ds);
}

// What the merchant forwards to the gateway: everything except the order
// plaintext, plus its own view of h(OI).
struct GatewayForward {
    crypto::Digest pi_hash{};
    BigInt ds;
    crypto::HybridEnvelope pi_envelope;
    crypto::Digest merchant_oi_hash{};

    Bytes encode() const {
        return Encoder()
            .bytes(crypto::digest_bytes(pi_hash))
            .bytes(bigint_to_bytes(ds))
            .bytes(pi_envelope.wrapped_key)
            .bytes(Encoder().bytes(pi_envelope.nonce).bytes(pi_envelope.ct).take())
            .bytes(crypto::digest_bytes(merchant_oi_hash))
            .take();
    }

    static GatewayForward decode(const Bytes& data) {
        Decoder dec(data);
        GatewayForward fwd;
        fwd.pi_hash = crypto::bytes_to_digest(dec.bytes());
        fwd.ds = bytes_to_bigint(dec.bytes());
        fwd.pi_envelope.wrapped_key = dec.bytes();
        Bytes env_record = dec.bytes();
        Decoder env(env_record);
        fwd.pi_envelope.nonce = env.bytes();
        fwd.pi_envelope.ct = env.bytes();
        env.expect_done();
        fwd.merchant_oi_hash = crypto::bytes_to_digest(dec.bytes());
        dec.expect_done();
        return fwd;
    }
};

inline GatewayForward merchant_forward(const DualSignedRequest& req) {
    return {req.pi_hash, req.ds, req.pi_envelope, oi_digest(req.oi)};
}

enum class GatewayResult {
    Approved,
    Declined,
    RejectLinkMismatch,
    RejectBadSignature,
    RejectEnvelope,
};

inline const char* to_string(GatewayResult r) {
    switch (r) {
    case GatewayResult::Approved: return "yes";
    case GatewayResult::Declined: return "no";
    case GatewayResult::RejectLinkMismatch: return "reject-link-mismatch";
    case GatewayResult::RejectBadSignature: return "reject-bad-signature";
    case GatewayResult::RejectEnvelope: return "reject-envelope";
    }
    return "unknown";
}

struct GatewayConfig {
    std::string gateway_id;
    std::int64_t amount_limit = 0;
    std::set<std::string> pan_registry;
};

struct GatewayResponse {
    GatewayResult result = GatewayResult::RejectEnvelope;
    BigInt signature; // over canonical(result, h(PI), merchant h(OI))
};

inline Bytes gateway_response_message(GatewayResult result, const crypto::Digest& pi_hash,
                                      const crypto::Digest& merchant_oi_hash) {
    return Encoder()
        .str(to_string(result))
        .bytes(crypto::digest_bytes(pi_hash))
        .bytes(crypto::digest_bytes(merchant_oi_hash))
        .take();
}

inline GatewayResponse gateway_verify(const GatewayForward& fwd,
                                      const crypto::RsaKeyPair& gateway,
                                      const crypto::RsaPublicKey& customer,
                                      const GatewayConfig& config) {
    auto finish = [&](GatewayResult result) {
        GatewayResponse resp;
        resp.result = result;
        resp.signature = crypto::sign(
            gateway, gateway_response_message(result, fwd.pi_hash, fwd.merchant_oi_hash));
        return resp;
    };

    Bytes plain;
    try {
        plain = crypto::pk_decrypt(gateway, fwd.pi_envelope);
    } catch (const Error&) {
        return finish(GatewayResult::RejectEnvelope);
    }

    std::string envelope_gateway_id;
    PaymentInstruction pi;
    crypto::Digest envelope_oi_hash{};
    try {
        Decoder dec(plain);
        envelope_gateway_id = dec.str();
        pi = decode_pi(dec.bytes());
        envelope_oi_hash = crypto::bytes_to_digest(dec.bytes());
        dec.expect_done();
    } catch (const Error&) {
        return finish(GatewayResult::RejectEnvelope);
    }
    if (envelope_gateway_id != config.gateway_id)
        return finish(GatewayResult::RejectEnvelope);

    if (envelope_oi_hash != fwd.merchant_oi_hash)
        return finish(GatewayResult::RejectLinkMismatch);

    crypto::Digest recomputed_pi_hash = pi_digest(pi);
    if (recomputed_pi_hash != fwd.pi_hash)
        return finish(GatewayResult::RejectBadSignature);
    if (!crypto::verify(customer,
                        dual_signature_message(recomputed_pi_hash, fwd.merchant_oi_hash),
                        fwd.ds))
        return finish(GatewayResult::RejectBadSignature);

    bool approved = config.pan_registry.count(pi.pan) == 1 &&
                    pi.amount <= config.amount_limit;
    return finish(approved ? GatewayResult::Approved : GatewayResult::Declined);
}

inline bool verify_gateway_response(const GatewayResponse& resp,
                                    const crypto::Digest& pi_hash,
                                    const crypto::Digest& merchant_oi_hash,
                                    const crypto::RsaPublicKey& gateway) {
    return crypto::verify(gateway,
                          gateway_response_message(resp.result, pi_hash, merchant_oi_hash),
                          resp.signature);
}

// Agreement countersignatures. No flow here consumes them; they exist so
// a deployment can have the merchant endorse OI and the gateway endorse
// PI after verification.
inline BigInt countersign_oi(const crypto::RsaKeyPair& merchant, const OrderInformation& oi) {
    return crypto::sign(merchant, encode_oi(oi));
}

inline bool verify_oi_countersignature(const crypto::RsaPublicKey& merchant,
                                       const OrderInformation& oi, const BigInt& sig) {
    return crypto::verify(merchant, encode_oi(oi), sig);
}

inline BigInt countersign_pi(const crypto::RsaKeyPair& gateway, const PaymentInstruction& pi) {
    return crypto::sign(gateway, encode_pi(pi));
}

inline bool verify_pi_countersignature(const crypto::RsaPublicKey& gateway,
                                       const PaymentInstruction& pi, const BigInt& sig) {
    return crypto::verify(gateway, encode_pi(pi), sig);
}

// Fresh per-transaction payment instruction for a card on file.
inline PaymentInstruction make_payment_instruction(const std::string& pan,
                                                   const std::string& card_expiry,
                                                   const Bytes& pan_secret,
                                                   std::int64_t amount, Rng& rng) {
    PaymentInstruction pi;
    pi.pan = pan;
    pi.card_expiry = card_expiry;
    pi.pan_secret = pan_secret;
    pi.ex_nonce = rng.bytes(kExNonceLen);
    pi.amount = amount;
    check_pi(pi);
    return pi;
}

} // namespace paysec::setcore
