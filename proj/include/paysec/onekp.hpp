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

// Lightweight card-payment protocol with three roles. A transaction is
// pinned by five per-transaction values (TID_M, DATE, NONCE_M from the
// merchant; SALT_C, R_C from the customer) and by the fingerprint
//
//   COM = h(canonical(PRICE, ID_M, TR_M, ID_C, h_SALT_C(DESC)))
//
// with TR_M = (TID_M, DATE, NONCE_M). The customer pays under a one-time
// pseudonym ID_C; the acquirer sees the card data but never DESC, the
// merchant sees DESC but never the card data.
//
// Message flow and wire forms (canonical length-prefixed records):
//   Initiate     customer -> merchant: (ID_C, SALT_C)
//   Invoice      merchant -> customer: (ID_M, TR_M)
//   Payment      customer -> merchant: (TID_M, envelope) where envelope =
//                pk_encrypt(E_A, canonical(PRICE, PI, R_C, COM))
//   AuthRequest  merchant -> acquirer: (ID_M, TR_M, ID_C, PRICE,
//                h_SALT_C(DESC), Payment)
//   AuthResponse acquirer -> merchant -> customer: (decision, COM, TR_M,
//                signature, CERT_A), signature over
//                canonical(decision, COM, TR_M)

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "paysec/crypto.hpp"
#include "paysec/setcore.hpp"

namespace paysec::onekp {

using setcore::PaymentInstruction;

constexpr std::size_t kTidLen = 8;
constexpr std::size_t kNonceMLen = 16;
constexpr std::size_t kSaltLen = 16;
constexpr std::size_t kRcLen = 16;
constexpr std::int64_t kDefaultFreshnessWindow = 3600; // seconds

struct TrM {
    Bytes tid_m;          // kTidLen bytes
    std::int64_t date = 0; // seconds, scenario clock
    Bytes nonce_m;        // kNonceMLen bytes

    Bytes encode() const {
        return Encoder().bytes(tid_m).i64(date).bytes(nonce_m).take();
    }
    static TrM decode(const Bytes& data) {
        Decoder dec(data);
        TrM tr;
        tr.tid_m = dec.bytes();
        tr.date = dec.i64();
        tr.nonce_m = dec.bytes();
        dec.expect_done();
        if (tr.tid_m.size() != kTidLen || tr.nonce_m.size() != kNonceMLen)
            throw ParseError("bad TR_M field lengths");
        return tr;
    }
    bool operator==(const TrM& o) const {
        return tid_m == o.tid_m && date == o.date && nonce_m == o.nonce_m;
    }
};

inline crypto::Digest desc_commitment(const Bytes& salt_c, const Bytes& desc) {
    return crypto::keyed_hash(salt_c, desc);
}

inline crypto::Digest compute_com(std::int64_t price, const std::string& id_m,
                                  const TrM& tr_m, const std::string& id_c,
                                  const crypto::Digest& desc_mac) {
    return crypto::sha256(Encoder()
                              .i64(price)
                              .str(id_m)
                              .bytes(tr_m.encode())
                              .str(id_c)
                              .bytes(crypto::digest_bytes(desc_mac))
                              .take());
}

// ---------------------------------------------------------------------------
// Messages

struct Initiate {
    std::string id_c;
    Bytes salt_c;

    Bytes encode() const { return Encoder().str(id_c).bytes(salt_c).take(); }
    static Initiate decode(const Bytes& data) {
        Decoder dec(data);
        Initiate m{dec.str(), dec.bytes()};
        dec.expect_done();
        return m;
    }
};

struct Invoice {
    std::string id_m;
    TrM tr_m;

    Bytes encode() const { return Encoder().str(id_m).bytes(tr_m.encode()).take(); }
    static Invoice decode(const Bytes& data) {
        Decoder dec(data);
        Invoice m;
        m.id_m = dec.str();
        m.tr_m = TrM::decode(dec.bytes());
        dec.expect_done();
        return m;
    }
};

struct Payment {
    Bytes tid_m; // clear routing tag; already public via the invoice
    crypto::HybridEnvelope envelope;

    Bytes encode() const {
        return Encoder().bytes(tid_m).bytes(envelope.serialize()).take();
    }
    static Payment decode(const Bytes& data) {
        Decoder dec(data);
        Payment m;
        m.tid_m = dec.bytes();
        m.envelope = crypto::HybridEnvelope::parse(dec.bytes());
        dec.expect_done();
        return m;
    }
};

struct AuthRequest {
    std::string id_m;
    TrM tr_m;
    std::string id_c;
    std::int64_t price = 0;
    crypto::Digest desc_mac{}; // h_SALT_C(DESC)
    Payment payment;

    Bytes encode() const {
        return Encoder()
            .str(id_m)
            .bytes(tr_m.encode())
            .str(id_c)
            .i64(price)
            .bytes(crypto::digest_bytes(desc_mac))
            .bytes(payment.encode())
            .take();
    }
    static AuthRequest decode(const Bytes& data) {
        Decoder dec(data);
        AuthRequest m;
        m.id_m = dec.str();
        m.tr_m = TrM::decode(dec.bytes());
        m.id_c = dec.str();
        m.price = dec.i64();
        m.desc_mac = crypto::bytes_to_digest(dec.bytes());
        m.payment = Payment::decode(dec.bytes());
        dec.expect_done();
        return m;
    }
};

enum class Decision {
    Yes,
    No,
    RejectReplay,
    RejectLink,
    RejectEnvelope,
    RejectStale,
};

inline const char* to_string(Decision d) {
    switch (d) {
    case Decision::Yes: return "yes";
    case Decision::No: return "no";
    case Decision::RejectReplay: return "reject-replay";
    case Decision::RejectLink: return "reject-link";
    case Decision::RejectEnvelope: return "reject-envelope";
    case Decision::RejectStale: return "reject-stale";
    }
    return "unknown";
}

inline Decision decision_from_string(const std::string& s) {
    if (s == "yes") return Decision::Yes;
    if (s == "no") return Decision::No;
    if (s == "reject-replay") return Decision::RejectReplay;
    if (s == "reject-link") return Decision::RejectLink;
    if (s == "reject-envelope") return Decision::RejectEnvelope;
    if (s == "reject-stale") return Decision::RejectStale;
    throw ParseError("unknown decision: " + s);
}

struct AuthResponse {
    Decision decision = Decision::RejectEnvelope;
    crypto::Digest com{};
    TrM tr_m;
    BigInt signature; // over canonical(decision, COM, TR_M)
    crypto::Certificate cert_a;

    Bytes encode() const {
        return Encoder()
            .str(to_string(decision))
            .bytes(crypto::digest_bytes(com))
            .bytes(tr_m.encode())
            .bytes(bigint_to_bytes(signature))
            .bytes(crypto::encode_certificate(cert_a))
            .take();
    }
    static AuthResponse decode(const Bytes& data) {
        Decoder dec(data);
        AuthResponse m;
        m.decision = decision_from_string(dec.str());
        m.com = crypto::bytes_to_digest(dec.bytes());
        m.tr_m = TrM::decode(dec.bytes());
        m.signature = bytes_to_bigint(dec.bytes());
        m.cert_a = crypto::decode_certificate(dec.bytes());
        dec.expect_done();
        return m;
    }
};

inline Bytes auth_response_message(Decision decision, const crypto::Digest& com,
                                   const TrM& tr_m) {
    return Encoder()
        .str(to_string(decision))
        .bytes(crypto::digest_bytes(com))
        .bytes(tr_m.encode())
        .take();
}

// Checks the acquirer certificate against the directory CA and the
// response signature against the echoed fields.
inline bool verify_auth_response(const AuthResponse& resp,
                                 const crypto::RsaPublicKey& ca_key,
                                 const std::string& acquirer_id) {
    if (resp.cert_a.subject_id != acquirer_id) return false;
    if (!crypto::ca_verify(ca_key, resp.cert_a)) return false;
    return crypto::verify(resp.cert_a.subject_key,
                          auth_response_message(resp.decision, resp.com, resp.tr_m),
                          resp.signature);
}

// ---------------------------------------------------------------------------
// Role state machines

enum class Stage { Init, Initiated, Invoiced, Paid, Forwarded, Done };

class CustomerSession {
public:
    // PRICE and DESC are negotiated before the first message.
    CustomerSession(std::int64_t price, Bytes desc, PaymentInstruction pi, Rng& rng)
        : price_(price), desc_(std::move(desc)), pi_(std::move(pi)),
          id_c_("c-" + to_hex(rng.bytes(8))), salt_c_(rng.bytes(kSaltLen)),
          r_c_(rng.bytes(kRcLen)) {}

    Initiate initiate() {
        if (stage_ != Stage::Init) throw StateError("initiate: not in Init");
        stage_ = Stage::Initiated;
        return {id_c_, salt_c_};
    }

    Payment on_invoice(const Invoice& invoice, const crypto::RsaPublicKey& acquirer_key,
                       Rng& rng) {
        if (stage_ != Stage::Initiated) throw StateError("on_invoice: not Initiated");
        com_ = compute_com(price_, invoice.id_m, invoice.tr_m, id_c_,
                           desc_commitment(salt_c_, desc_));
        tr_m_ = invoice.tr_m;
        Bytes plain = Encoder()
                          .i64(price_)
                          .bytes(setcore::encode_pi(pi_))
                          .bytes(r_c_)
                          .bytes(crypto::digest_bytes(com_))
                          .take();
        Payment pay;
        pay.tid_m = invoice.tr_m.tid_m;
        pay.envelope = crypto::pk_encrypt(acquirer_key, plain, rng);
        stage_ = Stage::Paid;
        return pay;
    }

    Decision on_auth_response(const AuthResponse& resp, const crypto::RsaPublicKey& ca_key,
                              const std::string& acquirer_id) {
        if (stage_ != Stage::Paid) throw StateError("on_auth_response: not Paid");
        if (resp.com != com_ || !(resp.tr_m == tr_m_))
            throw IntegrityError("auth response echoes a different transaction");
        if (!verify_auth_response(resp, ca_key, acquirer_id))
            throw IntegrityError("auth response signature invalid");
        stage_ = Stage::Done;
        return resp.decision;
    }

    const std::string& id_c() const { return id_c_; }
    const Bytes& salt_c() const { return salt_c_; }
    const Bytes& r_c() const { return r_c_; }
    const crypto::Digest& com() const { return com_; }
    Stage stage() const { return stage_; }

private:
    std::int64_t price_;
    Bytes desc_;
    PaymentInstruction pi_;
    std::string id_c_;
    Bytes salt_c_;
    Bytes r_c_;
    crypto::Digest com_{};
    TrM tr_m_;
    Stage stage_ = Stage::Init;
};

class Merchant {
public:
    struct Txn {
        std::string id_c;
        Bytes salt_c;
        TrM tr_m;
        crypto::Digest desc_mac{};
        crypto::Digest com{};
        Stage stage = Stage::Invoiced;
    };

    Merchant(std::string id_m, std::int64_t price, Bytes desc)
        : id_m_(std::move(id_m)), price_(price), desc_(std::move(desc)) {}

    // A replayed Initiate simply opens another transaction with a fresh
    // TID_M; freshness guarantees start with the invoice.
    Invoice on_initiate(const Initiate& init, std::int64_t now, Rng& rng) {
        Txn txn;
        txn.id_c = init.id_c;
        txn.salt_c = init.salt_c;
        do {
            txn.tr_m.tid_m = rng.bytes(kTidLen);
        } while (txns_.count(to_hex(txn.tr_m.tid_m)) != 0);
        txn.tr_m.date = now;
        txn.tr_m.nonce_m = rng.bytes(kNonceMLen);
        txn.desc_mac = desc_commitment(init.salt_c, desc_);
        txn.com = compute_com(price_, id_m_, txn.tr_m, init.id_c, txn.desc_mac);
        issued_.insert(to_hex(txn.tr_m.tid_m) + ":" + to_hex(txn.tr_m.nonce_m));
        txns_[to_hex(txn.tr_m.tid_m)] = txn;
        return {id_m_, txn.tr_m};
    }

    // The merchant cannot open the envelope; it forwards every payment it
    // can route and leaves replay policing to the acquirer.
    AuthRequest on_payment(const Payment& pay) {
        Txn& txn = txn_mut(pay.tid_m);
        if (txn.stage != Stage::Invoiced && txn.stage != Stage::Forwarded)
            throw StateError("on_payment: transaction closed");
        txn.stage = Stage::Forwarded;
        AuthRequest req;
        req.id_m = id_m_;
        req.tr_m = txn.tr_m;
        req.id_c = txn.id_c;
        req.price = price_;
        req.desc_mac = txn.desc_mac;
        req.payment = pay;
        return req;
    }

    // Pass-through to the customer; the merchant records the outcome.
    AuthResponse on_auth_response(const AuthResponse& resp) {
        Txn& txn = txn_mut(resp.tr_m.tid_m);
        if (txn.stage != Stage::Forwarded)
            throw StateError("on_auth_response: nothing forwarded");
        txn.stage = Stage::Done;
        return resp;
    }

    const Txn& txn(const Bytes& tid_m) const {
        auto it = txns_.find(to_hex(tid_m));
        if (it == txns_.end()) throw StateError("unknown transaction id");
        return it->second;
    }
    const std::string& id() const { return id_m_; }
    std::size_t issued_count() const { return issued_.size(); }

private:
    Txn& txn_mut(const Bytes& tid_m) {
        auto it = txns_.find(to_hex(tid_m));
        if (it == txns_.end()) throw StateError("unknown transaction id");
        return it->second;
    }

    std::string id_m_;
    std::int64_t price_;
    Bytes desc_;
    std::map<std::string, Txn> txns_;
    std::set<std::string> issued_; // (TID_M, NONCE_M) pairs handed out
};

struct AcquirerConfig {
    std::string id;
    std::int64_t amount_limit = 0;
    std::set<std::string> pan_registry;
    std::int64_t freshness_window = kDefaultFreshnessWindow;
};

class Acquirer {
public:
    enum class Freshness { Fresh, Replayed, Stale };

    Acquirer(crypto::RsaKeyPair keys, AcquirerConfig config, crypto::Certificate cert)
        : keys_(std::move(keys)), config_(std::move(config)), cert_(std::move(cert)) {}

    // Check-and-record over the merchant transaction triple; recording
    // happens only on the Fresh path.
    Freshness replay_cache_check(const std::string& id_m, const TrM& tr_m,
                                 std::int64_t now) {
        std::string key = merchant_key(id_m, tr_m);
        if (seen_merchant_.count(key) != 0) return Freshness::Replayed;
        std::int64_t age = now >= tr_m.date ? now - tr_m.date : tr_m.date - now;
        if (age > config_.freshness_window) return Freshness::Stale;
        seen_merchant_.insert(key);
        return Freshness::Fresh;
    }

    AuthResponse handle(const AuthRequest& req, std::int64_t now) {
        Bytes plain;
        try {
            plain = crypto::pk_decrypt(keys_, req.payment.envelope);
        } catch (const Error&) {
            return respond(Decision::RejectEnvelope, crypto::Digest{}, req.tr_m);
        }

        std::int64_t envelope_price = 0;
        PaymentInstruction pi;
        Bytes r_c;
        crypto::Digest envelope_com{};
        try {
            Decoder dec(plain);
            envelope_price = dec.i64();
            pi = setcore::decode_pi(dec.bytes());
            r_c = dec.bytes();
            envelope_com = crypto::bytes_to_digest(dec.bytes());
            dec.expect_done();
            if (r_c.size() != kRcLen) throw ParseError("bad R_C length");
        } catch (const Error&) {
            return respond(Decision::RejectEnvelope, crypto::Digest{}, req.tr_m);
        }

        // Both sides must have fingerprinted the same transaction data.
        crypto::Digest recomputed =
            compute_com(req.price, req.id_m, req.tr_m, req.id_c, req.desc_mac);
        if (recomputed != envelope_com || envelope_price != req.price)
            return respond(Decision::RejectLink, envelope_com, req.tr_m);

        // Single atomic freshness gate over both the merchant triple and
        // the customer (ID_C, R_C) binding.
        std::string m_key = merchant_key(req.id_m, req.tr_m);
        std::string c_key = req.id_c + ":" + to_hex(r_c);
        if (seen_merchant_.count(m_key) != 0 || seen_customer_.count(c_key) != 0)
            return respond(Decision::RejectReplay, envelope_com, req.tr_m);
        std::int64_t age =
            now >= req.tr_m.date ? now - req.tr_m.date : req.tr_m.date - now;
        if (age > config_.freshness_window)
            return respond(Decision::RejectStale, envelope_com, req.tr_m);
        seen_merchant_.insert(m_key);
        seen_customer_.insert(c_key);

        bool ok = config_.pan_registry.count(pi.pan) == 1 &&
                  envelope_price <= config_.amount_limit;
        return respond(ok ? Decision::Yes : Decision::No, envelope_com, req.tr_m);
    }

    const crypto::Certificate& certificate() const { return cert_; }
    crypto::RsaPublicKey public_key() const { return keys_.public_key(); }

private:
    static std::string merchant_key(const std::string& id_m, const TrM& tr_m) {
        return id_m + ":" + to_hex(tr_m.tid_m) + ":" + to_hex(tr_m.nonce_m);
    }

    AuthResponse respond(Decision decision, const crypto::Digest& com, const TrM& tr_m) {
        AuthResponse resp;
        resp.decision = decision;
        resp.com = com;
        resp.tr_m = tr_m;
        resp.signature = crypto::sign(keys_, auth_response_message(decision, com, tr_m));
        resp.cert_a = cert_;
        return resp;
    }

    crypto::RsaKeyPair keys_;
    AcquirerConfig config_;
    crypto::Certificate cert_;
    std::set<std::string> seen_merchant_;
    std::set<std::string> seen_customer_;
};

} // namespace paysec::onekp
