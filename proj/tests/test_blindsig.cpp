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

#include <cmath>

#include "paysec/blindsig.hpp"
#include "test_util.hpp"

using namespace paysec;
using namespace paysec::blindsig;

namespace {

bool coin_predicate(const Bytes& payload) {
    std::string s = to_string(payload);
    return s.rfind("COIN:", 0) == 0;
}

} // namespace

TEST_CASE("blind with forced factor k=1 leaves the integer unchanged") {
    crypto::RsaKeyPair kp = crypto::generate_keypair(256, 3);
    Bytes msg = to_bytes("COIN:10");
    BlindingSession s = blind_with_factor(msg, kp.public_key(), 1);
    CHECK(s.blinded == s.m_int);
}

TEST_CASE("random factor hides the message integer") {
    crypto::RsaKeyPair kp = crypto::generate_keypair(256, 3);
    Rng rng(21);
    Bytes msg = to_bytes("COIN:10");
    BlindingSession s = blind(msg, kp.public_key(), rng);
    CHECK(s.m_int != 0);
    CHECK(s.blinded != s.m_int);
    CHECK(s.blinded == s.m_int * mod_pow(s.k, kp.e, kp.n) % kp.n);
}

TEST_CASE("blinding factors are invertible: 1000 samples") {
    crypto::RsaKeyPair kp = crypto::generate_keypair(128, 4);
    Rng rng(22);
    for (int i = 0; i < 1000; ++i) {
        BlindingSession s = blind(to_bytes("COIN:1"), kp.public_key(), rng);
        CHECK(testutil::naive_gcd(s.k, kp.n) == 1);
    }
}

TEST_CASE("sign_blinded edge values and oracle") {
    crypto::RsaKeyPair kp = crypto::RsaKeyPair::from_primes(61, 53, 17);
    CHECK(sign_blinded(kp, 0) == 0);
    CHECK(sign_blinded(kp, 1) == 1);
    CHECK(sign_blinded(kp, 65) == testutil::naive_mod_pow(65, 2753, 3233));
    CHECK_THROWS_AS(sign_blinded(kp, kp.n), InvalidParameter);
    CHECK_THROWS_AS(sign_blinded(kp, -1), InvalidParameter);
}

TEST_CASE("unblind") {
    crypto::RsaKeyPair kp = crypto::generate_keypair(256, 5);
    Rng rng(23);
    Bytes msg = to_bytes("COIN:25");

    SECTION("k=1 session: unblinded equals the blind signature") {
        BlindingSession s = blind_with_factor(msg, kp.public_key(), 1);
        s.blind_sig = sign_blinded(kp, s.blinded);
        CHECK(unblind(s) == *s.blind_sig);
    }
    SECTION("full chain equals the direct raw-RSA oracle") {
        BlindingSession s = blind(msg, kp.public_key(), rng);
        s.blind_sig = sign_blinded(kp, s.blinded);
        BigInt direct = testutil::naive_mod_pow(s.m_int, kp.d, kp.n);
        CHECK(unblind(s) == direct);
    }
    SECTION("missing blind signature is a state error") {
        BlindingSession s = blind(msg, kp.public_key(), rng);
        CHECK_THROWS_AS(unblind(s), StateError);
    }
    SECTION("verification exponentiation recovers m_int for 100 messages") {
        for (int i = 0; i < 100; ++i) {
            Bytes m = rng.bytes(24);
            BlindingSession s = blind(m, kp.public_key(), rng);
            s.blind_sig = sign_blinded(kp, s.blinded);
            BigInt sig = unblind(s);
            CHECK(mod_pow(sig, kp.e, kp.n) == s.m_int);
        }
    }
}

TEST_CASE("blindness: the signer's view does not separate messages") {
    // For any two messages there is a factor making their blinded forms
    // equal; solve for it with the private key and check.
    crypto::RsaKeyPair kp = crypto::generate_keypair(256, 6);
    Rng rng(24);
    Bytes msg_a = to_bytes("COIN:5");
    Bytes msg_b = to_bytes("COIN:500");
    BlindingSession a = blind(msg_a, kp.public_key(), rng);
    BigInt b_int = crypto::message_to_integer(msg_b, kp.n);
    REQUIRE(big_gcd(b_int, kp.n) == 1);
    // k2^e = blinded / b_int; extract the e-th root via d.
    BigInt k2 = mod_pow(a.blinded * mod_inverse(b_int, kp.n) % kp.n, kp.d, kp.n);
    BlindingSession b = blind_with_factor(msg_b, kp.public_key(), k2);
    CHECK(b.blinded == a.blinded);
}

TEST_CASE("cut-and-choose accepts honest providers") {
    crypto::RsaKeyPair kp = crypto::generate_keypair(256, 7);
    Rng rng(25);
    std::vector<Bytes> coins;
    for (int i = 0; i < 10; ++i)
        coins.push_back(to_bytes("COIN:" + std::to_string(10 * (i + 1))));
    CutChooseSession session = run_cut_and_choose(coins, coin_predicate, kp, rng);
    CHECK(session.outcome == CutChooseOutcome::Accepted);
    REQUIRE(session.signature.has_value());
    CHECK(session.revealed_indexes.size() == coins.size() - 1);
    CHECK(session.revealed_indexes.count(session.signed_index) == 0);

    // The unblinded remainder verifies as a signature on its payload.
    BlindingSession& chosen = session.candidates[session.signed_index];
    BigInt sig = unblind(chosen);
    CHECK(mod_pow(sig, kp.e, kp.n) == chosen.m_int);
}

TEST_CASE("cut-and-choose detection frequency is (n-1)/n") {
    crypto::RsaKeyPair kp = crypto::generate_keypair(128, 8);
    const int trials = 1000;
    int detected = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(1000 + static_cast<std::uint64_t>(t));
        std::vector<Bytes> coins;
        for (int i = 0; i < 10; ++i)
            coins.push_back(to_bytes("COIN:" + std::to_string(i)));
        std::size_t bad = rng.below(coins.size());
        coins[bad] = to_bytes("BOGUS:" + std::to_string(t));
        CutChooseSession s = run_cut_and_choose(coins, coin_predicate, kp, rng);
        if (s.outcome == CutChooseOutcome::CheatingDetected) ++detected;
    }
    // Expected 0.9; allow 3 standard deviations of Binomial(1000, 0.9).
    double freq = static_cast<double>(detected) / trials;
    double sigma = std::sqrt(0.9 * 0.1 / trials);
    CHECK(freq >= 0.9 - 3 * sigma);
    CHECK(freq <= 0.9 + 3 * sigma);
}

TEST_CASE("revealing a wrong factor is detected") {
    crypto::RsaKeyPair kp = crypto::generate_keypair(256, 9);
    Rng rng(26);
    std::vector<Bytes> coins = {to_bytes("COIN:1"), to_bytes("COIN:2"), to_bytes("COIN:3")};
    auto candidates = prepare_candidates(coins, kp.public_key(), rng);
    std::size_t keep = choose_unrevealed(candidates.size(), rng);

    std::vector<BigInt> submitted;
    for (const auto& c : candidates) submitted.push_back(c.blinded);

    std::vector<Reveal> reveals;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i == keep) continue;
        reveals.push_back({i, candidates[i].message, candidates[i].k});
    }
    REQUIRE(validate_reveals(submitted, reveals, coin_predicate, kp.public_key()));

    reveals[0].k += 1; // lie about one blinding factor
    CHECK_FALSE(validate_reveals(submitted, reveals, coin_predicate, kp.public_key()));
}
