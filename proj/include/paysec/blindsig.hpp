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

// RSA blind signatures. The provider maps a serial-number payload to an
// integer below the modulus, multiplies by k^e, and the signer raises the
// result to d without seeing the payload; dividing out k leaves an ordinary
// signature on the payload integer. Raw (unpadded) RSA is used only here:
// the blinding algebra requires it.
//
// The cut-and-choose game lets the signer open all candidates but one
// before signing, so a provider slipping in one malformed coin among n is
// caught with probability (n-1)/n.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "paysec/crypto.hpp"

namespace paysec::blindsig {

struct BlindingSession {
    Bytes message;
    BigInt m_int;   // padded-digest integer of message
    BigInt k;       // blinding factor, invertible mod n
    BigInt blinded; // m_int * k^e mod n
    std::optional<BigInt> blind_sig;
    std::optional<BigInt> unblinded_sig;
    crypto::RsaPublicKey signer;
};

// Test hook: construct a session with a caller-chosen blinding factor.
inline BlindingSession blind_with_factor(const Bytes& message,
                                         const crypto::RsaPublicKey& signer,
                                         const BigInt& k) {
    if (big_gcd(k, signer.n) != 1)
        throw InvalidParameter("blind: factor not invertible");
    BlindingSession s;
    s.message = message;
    s.m_int = crypto::message_to_integer(message, signer.n);
    s.k = k;
    s.blinded = s.m_int * mod_pow(k, signer.e, signer.n) % signer.n;
    s.signer = signer;
    return s;
}

// k is sampled uniformly among invertible residues; non-invertible draws
// are resampled (negligible probability for RSA moduli, but handled).
inline BlindingSession blind(const Bytes& message, const crypto::RsaPublicKey& signer,
                             Rng& rng) {
    for (;;) {
        BigInt k = 1 + random_below(rng, signer.n - 1);
        if (big_gcd(k, signer.n) != 1) continue;
        return blind_with_factor(message, signer, k);
    }
}

// Raw RSA on the blinded value; the signer cannot see what it signs.
inline BigInt sign_blinded(const crypto::RsaKeyPair& signer, const BigInt& blinded) {
    if (blinded < 0 || blinded >= signer.n)
        throw InvalidParameter("sign_blinded: value out of range");
    return mod_pow(blinded, signer.d, signer.n);
}

// Removes the blinding factor: blind_sig * k^-1 = m_int^d mod n.
inline BigInt unblind(BlindingSession& session) {
    if (!session.blind_sig)
        throw StateError("unblind: no blind signature present");
    BigInt result =
        *session.blind_sig * mod_inverse(session.k, session.signer.n) % session.signer.n;
    session.unblinded_sig = result;
    return result;
}

// ---------------------------------------------------------------------------
// Cut-and-choose validation game.

enum class CutChooseOutcome { Accepted, CheatingDetected };

inline const char* to_string(CutChooseOutcome o) {
    return o == CutChooseOutcome::Accepted ? "accepted" : "cheating-detected";
}

struct CutChooseSession {
    std::vector<BlindingSession> candidates;
    std::set<std::size_t> revealed_indexes; // all but signed_index
    std::size_t signed_index = 0;
    CutChooseOutcome outcome = CutChooseOutcome::CheatingDetected;
    std::optional<BigInt> signature; // blind signature on the remaining candidate
};

// Whether a revealed payload is well-formed (e.g., a known coin
// denomination encoding).
using ValidityPredicate = std::function<bool(const Bytes&)>;

// What the provider hands over for a revealed index.
struct Reveal {
    std::size_t index = 0;
    Bytes message;
    BigInt k;
};

inline std::vector<BlindingSession> prepare_candidates(const std::vector<Bytes>& messages,
                                                       const crypto::RsaPublicKey& signer,
                                                       Rng& rng) {
    std::vector<BlindingSession> out;
    out.reserve(messages.size());
    for (const Bytes& m : messages)
        out.push_back(blind(m, signer, rng));
    return out;
}

// The signer keeps one index unopened, chosen uniformly.
inline std::size_t choose_unrevealed(std::size_t candidate_count, Rng& rng) {
    if (candidate_count < 2)
        throw InvalidParameter("cut-and-choose: need at least 2 candidates");
    return static_cast<std::size_t>(rng.below(candidate_count));
}

// Signer-side check of the n-1 opened candidates: recompute the blinded
// value from each reveal and apply the validity predicate. Any mismatch or
// malformed payload aborts without a signature.
inline bool validate_reveals(const std::vector<BigInt>& submitted_blinded,
                             const std::vector<Reveal>& reveals,
                             const ValidityPredicate& valid,
                             const crypto::RsaPublicKey& signer) {
    for (const Reveal& r : reveals) {
        if (r.index >= submitted_blinded.size()) return false;
        if (big_gcd(r.k, signer.n) != 1) return false;
        BigInt m_int = crypto::message_to_integer(r.message, signer.n);
        BigInt recomputed = m_int * mod_pow(r.k, signer.e, signer.n) % signer.n;
        if (recomputed != submitted_blinded[r.index]) return false;
        if (!valid(r.message)) return false;
    }
    return true;
}

inline CutChooseSession run_cut_and_choose(const std::vector<Bytes>& provider_messages,
                                           const ValidityPredicate& valid,
                                           const crypto::RsaKeyPair& signer_keys,
                                           Rng& rng) {
    CutChooseSession session;
    session.candidates = prepare_candidates(provider_messages, signer_keys.public_key(), rng);
    session.signed_index = choose_unrevealed(session.candidates.size(), rng);

    std::vector<BigInt> submitted;
    submitted.reserve(session.candidates.size());
    for (const auto& c : session.candidates) submitted.push_back(c.blinded);

    std::vector<Reveal> reveals;
    for (std::size_t i = 0; i < session.candidates.size(); ++i) {
        if (i == session.signed_index) continue;
        session.revealed_indexes.insert(i);
        reveals.push_back({i, session.candidates[i].message, session.candidates[i].k});
    }

    if (!validate_reveals(submitted, reveals, valid, signer_keys.public_key())) {
        session.outcome = CutChooseOutcome::CheatingDetected;
        return session;
    }
    session.signature = sign_blinded(signer_keys, submitted[session.signed_index]);
    session.candidates[session.signed_index].blind_sig = session.signature;
    session.outcome = CutChooseOutcome::Accepted;
    return session;
}

} // namespace paysec::blindsig
