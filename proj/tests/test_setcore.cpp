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

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "paysec/setcore.hpp"
#include "test_util.hpp"

using namespace paysec;
using namespace paysec::setcore;

namespace {

const std::string kPan = "4485292937263852";
const std::string kExpiry = "09-2028";

struct Parties {
    crypto::RsaKeyPair customer = crypto::generate_keypair(512, 21001);
    crypto::RsaKeyPair gateway = crypto::generate_keypair(512, 21002);
    GatewayConfig config{"gw-1", 500000, {kPan}};
};

PaymentInstruction sample_pi(Rng& rng, std::int64_t amount = 4599) {
    return make_payment_instruction(kPan, kExpiry, Bytes(kPanSecretLen, 0x5a), amount, rng);
}

OrderInformation sample_oi() {
    return {to_bytes("deluxe widget gift box, next day delivery"), 4599, "merchant-77"};
}

} // namespace

TEST_CASE("dual signature binds order and payment instruction", "[setcore]") {
    Parties p;
    Rng rng(101);
    PaymentInstruction pi = sample_pi(rng);
    OrderInformation oi = sample_oi();

    BigInt ds = compute_dual_signature(p.customer, pi, oi);
    Bytes msg = dual_signature_message(pi_digest(pi), oi_digest(oi));
    REQUIRE(crypto::verify(p.customer.public_key(), msg, ds));

    // Raw RSA relation checked with an independent modular exponentiation.
    BigInt expected = crypto::message_to_integer(msg, p.customer.n);
    REQUIRE(testutil::naive_mod_pow(ds, p.customer.e, p.customer.n) == expected);

    REQUIRE(compute_dual_signature(p.customer, pi, oi) == ds);

    OrderInformation oi2 = oi;
    oi2.description[0] ^= 0x01;
    REQUIRE(compute_dual_signature(p.customer, pi, oi2) != ds);
}

TEST_CASE("request accepted by merchant and opened only by gateway", "[setcore]") {
    Parties p;
    Rng rng(103);
    PaymentInstruction pi = sample_pi(rng);
    OrderInformation oi = sample_oi();

    DualSignedRequest req =
        build_request(p.customer, p.gateway.public_key(), "gw-1", pi, oi, rng);
    REQUIRE(merchant_verify(req, p.customer.public_key()));

    // Fresh symmetric key per request.
    DualSignedRequest req2 =
        build_request(p.customer, p.gateway.public_key(), "gw-1", pi, oi, rng);
    REQUIRE(req.pi_envelope.wrapped_key != req2.pi_envelope.wrapped_key);

    // Envelope contents checked by direct decryption, not via gateway_verify.
    Bytes plain = crypto::pk_decrypt(p.gateway, req.pi_envelope);
    Decoder dec(plain);
    REQUIRE(dec.str() == "gw-1");
    PaymentInstruction recovered = decode_pi(dec.bytes());
    REQUIRE(recovered.pan == pi.pan);
    REQUIRE(recovered.ex_nonce == pi.ex_nonce);
    REQUIRE(recovered.amount == pi.amount);
    REQUIRE(dec.bytes() == crypto::digest_bytes(oi_digest(oi)));
    dec.expect_done();

    // A party without the gateway private key cannot open it.
    REQUIRE_THROWS_AS(crypto::pk_decrypt(p.customer, req.pi_envelope), Error);
}

TEST_CASE("merchant rejects any tamper within its view", "[setcore]") {
    Parties p;
    Rng rng(107);
    PaymentInstruction pi = sample_pi(rng);
    OrderInformation oi = sample_oi();
    DualSignedRequest req =
        build_request(p.customer, p.gateway.public_key(), "gw-1", pi, oi, rng);

    SECTION("specific fields") {
        DualSignedRequest t = req;
        t.oi.description[3] ^= 0x10;
        REQUIRE_FALSE(merchant_verify(t, p.customer.public_key()));

        t = req;
        t.pi_hash[0] ^= 0x01;
        REQUIRE_FALSE(merchant_verify(t, p.customer.public_key()));

        t = req;
        t.oi.price += 1;
        REQUIRE_FALSE(merchant_verify(t, p.customer.public_key()));
    }

    SECTION("100 random single-field tamperings") {
        Rng trng(1700);
        for (int i = 0; i < 100; ++i) {
            DualSignedRequest t = req;
            switch (trng.below(5)) {
            case 0:
                t.oi.description[trng.below(t.oi.description.size())] ^=
                    static_cast<std::uint8_t>(1 + trng.below(255));
                break;
            case 1: t.oi.price += 1 + static_cast<std::int64_t>(trng.below(1000)); break;
            case 2: t.oi.merchant_id += static_cast<char>('a' + trng.below(26)); break;
            case 3: t.pi_hash[trng.below(32)] ^= static_cast<std::uint8_t>(1 + trng.below(255)); break;
            default: t.ds += 1 + trng.below(1000); break;
            }
            REQUIRE_FALSE(merchant_verify(t, p.customer.public_key()));
        }
    }
}

TEST_CASE("gateway verifies linkage, signature, and envelope", "[setcore]") {
    Parties p;
    Rng rng(109);
    PaymentInstruction pi = sample_pi(rng);
    OrderInformation oi = sample_oi();
    DualSignedRequest req =
        build_request(p.customer, p.gateway.public_key(), "gw-1", pi, oi, rng);
    GatewayForward honest = merchant_forward(req);

    SECTION("honest request approved and response signed") {
        GatewayResponse resp =
            gateway_verify(honest, p.gateway, p.customer.public_key(), p.config);
        REQUIRE(resp.result == GatewayResult::Approved);
        REQUIRE(verify_gateway_response(resp, honest.pi_hash, honest.merchant_oi_hash,
                                        p.gateway.public_key()));
        // A forged decision fails the response check.
        GatewayResponse forged = resp;
        forged.result = GatewayResult::Declined;
        REQUIRE_FALSE(verify_gateway_response(forged, honest.pi_hash,
                                              honest.merchant_oi_hash,
                                              p.gateway.public_key()));
    }

    SECTION("merchant substitutes a different order hash") {
        GatewayForward t = honest;
        OrderInformation other = oi;
        other.price = 99;
        t.merchant_oi_hash = oi_digest(other);
        REQUIRE(gateway_verify(t, p.gateway, p.customer.public_key(), p.config).result ==
                GatewayResult::RejectLinkMismatch);
    }

    SECTION("envelope addressed to another gateway id") {
        DualSignedRequest wrong_id =
            build_request(p.customer, p.gateway.public_key(), "gw-2", pi, oi, rng);
        GatewayForward t = merchant_forward(wrong_id);
        REQUIRE(gateway_verify(t, p.gateway, p.customer.public_key(), p.config).result ==
                GatewayResult::RejectEnvelope);
    }

    SECTION("tampered dual signature") {
        GatewayForward t = honest;
        t.ds += 1;
        REQUIRE(gateway_verify(t, p.gateway, p.customer.public_key(), p.config).result ==
                GatewayResult::RejectBadSignature);
    }

    SECTION("100 random single-field tamperings never approved") {
        Rng trng(1900);
        for (int i = 0; i < 100; ++i) {
            GatewayForward t = honest;
            switch (trng.below(5)) {
            case 0: t.pi_hash[trng.below(32)] ^= static_cast<std::uint8_t>(1 + trng.below(255)); break;
            case 1: t.ds += 1 + trng.below(1000); break;
            case 2:
                t.pi_envelope.wrapped_key[trng.below(t.pi_envelope.wrapped_key.size())] ^=
                    static_cast<std::uint8_t>(1 + trng.below(255));
                break;
            case 3:
                t.pi_envelope.ct[trng.below(t.pi_envelope.ct.size())] ^=
                    static_cast<std::uint8_t>(1 + trng.below(255));
                break;
            default:
                t.merchant_oi_hash[trng.below(32)] ^=
                    static_cast<std::uint8_t>(1 + trng.below(255));
                break;
            }
            GatewayResponse resp =
                gateway_verify(t, p.gateway, p.customer.public_key(), p.config);
            REQUIRE(resp.result != GatewayResult::Approved);
        }
    }
}

TEST_CASE("authorization rule applies limit and registry", "[setcore]") {
    Parties p;
    Rng rng(113);
    OrderInformation oi = sample_oi();

    PaymentInstruction over = sample_pi(rng, p.config.amount_limit + 1);
    GatewayForward fwd = merchant_forward(
        build_request(p.customer, p.gateway.public_key(), "gw-1", over, oi, rng));
    REQUIRE(gateway_verify(fwd, p.gateway, p.customer.public_key(), p.config).result ==
            GatewayResult::Declined);

    PaymentInstruction unknown =
        make_payment_instruction("5598000011112222", kExpiry, Bytes(kPanSecretLen, 0x5a),
                                 100, rng);
    fwd = merchant_forward(
        build_request(p.customer, p.gateway.public_key(), "gw-1", unknown, oi, rng));
    REQUIRE(gateway_verify(fwd, p.gateway, p.customer.public_key(), p.config).result ==
            GatewayResult::Declined);

    PaymentInstruction exact = sample_pi(rng, p.config.amount_limit);
    fwd = merchant_forward(
        build_request(p.customer, p.gateway.public_key(), "gw-1", exact, oi, rng));
    REQUIRE(gateway_verify(fwd, p.gateway, p.customer.public_key(), p.config).result ==
            GatewayResult::Approved);
}

TEST_CASE("randomized card fingerprint is unlinkable across payments", "[setcore]") {
    Rng rng(127);
    PaymentInstruction a = sample_pi(rng);
    PaymentInstruction b = sample_pi(rng);
    REQUIRE(a.pan == b.pan);
    REQUIRE(randomized_pi_hash(a) != randomized_pi_hash(b));
    REQUIRE(randomized_pi_hash(a) == randomized_pi_hash(a));

    std::set<crypto::Digest> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(randomized_pi_hash(sample_pi(rng)));
    REQUIRE(seen.size() == 1000);
}

TEST_CASE("visibility split keeps card and order data apart", "[setcore]") {
    Parties p;
    Rng rng(131);
    OrderInformation oi = sample_oi();
    REQUIRE(oi.description.size() >= 8);

    PaymentInstruction pi1 = sample_pi(rng);
    PaymentInstruction pi2 = sample_pi(rng);
    DualSignedRequest r1 =
        build_request(p.customer, p.gateway.public_key(), "gw-1", pi1, oi, rng);
    DualSignedRequest r2 =
        build_request(p.customer, p.gateway.public_key(), "gw-1", pi2, oi, rng);

    Bytes merchant_view = r1.encode();
    REQUIRE_FALSE(contains_subsequence(merchant_view, to_bytes(kPan)));
    REQUIRE(contains_subsequence(merchant_view, oi.description));

    Bytes gateway_view = merchant_forward(r1).encode();
    REQUIRE_FALSE(contains_subsequence(gateway_view, oi.description));

    // Two same-PAN purchases expose no shared digest at the merchant.
    REQUIRE(r1.pi_hash != r2.pi_hash);
}

TEST_CASE("request and forward wire forms round trip", "[setcore]") {
    Parties p;
    Rng rng(137);
    DualSignedRequest req = build_request(p.customer, p.gateway.public_key(), "gw-1",
                                          sample_pi(rng), sample_oi(), rng);

    Bytes wire = req.encode();
    DualSignedRequest back = DualSignedRequest::decode(wire);
    REQUIRE(back.encode() == wire);
    REQUIRE(merchant_verify(back, p.customer.public_key()));

    GatewayForward fwd = merchant_forward(req);
    Bytes fwire = fwd.encode();
    GatewayForward fback = GatewayForward::decode(fwire);
    REQUIRE(fback.encode() == fwire);
    REQUIRE(gateway_verify(fback, p.gateway, p.customer.public_key(), p.config).result ==
            GatewayResult::Approved);

    Bytes truncated(wire.begin(), wire.end() - 5);
    REQUIRE_THROWS_AS(DualSignedRequest::decode(truncated), ParseError);
}

TEST_CASE("countersignatures verify but bind only their own record", "[setcore]") {
    Parties p;
    crypto::RsaKeyPair merchant = crypto::generate_keypair(512, 21003);
    Rng rng(139);
    PaymentInstruction pi = sample_pi(rng);
    OrderInformation oi = sample_oi();

    BigInt oi_sig = countersign_oi(merchant, oi);
    REQUIRE(verify_oi_countersignature(merchant.public_key(), oi, oi_sig));
    OrderInformation other = oi;
    other.price += 5;
    REQUIRE_FALSE(verify_oi_countersignature(merchant.public_key(), other, oi_sig));

    BigInt pi_sig = countersign_pi(p.gateway, pi);
    REQUIRE(verify_pi_countersignature(p.gateway.public_key(), pi, pi_sig));
}
