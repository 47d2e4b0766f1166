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

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "paysec/bytes.hpp"
#include "paysec/rng.hpp"

namespace paysec {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt mod_pow(const BigInt& base, const BigInt& exp, const BigInt& mod) {
    return boost::multiprecision::powm(base, exp, mod);
}

inline BigInt big_gcd(const BigInt& a, const BigInt& b) {
    return boost::multiprecision::gcd(a, b);
}

inline BigInt big_lcm(const BigInt& a, const BigInt& b) {
    return boost::multiprecision::lcm(a, b);
}

// Modular inverse via extended Euclid; a must be invertible mod m.
inline BigInt mod_inverse(const BigInt& a, const BigInt& m) {
    BigInt r0 = m, r1 = a % m;
    if (r1 < 0) r1 += m;
    BigInt t0 = 0, t1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt r2 = r0 - q * r1;
        r0 = r1; r1 = r2;
        BigInt t2 = t0 - q * t1;
        t0 = t1; t1 = t2;
    }
    if (r0 != 1)
        throw InvalidParameter("mod_inverse: value not invertible");
    if (t0 < 0) t0 += m;
    return t0;
}

inline std::size_t bit_length(const BigInt& x) {
    return x == 0 ? 0 : boost::multiprecision::msb(x) + 1;
}

inline std::size_t byte_length(const BigInt& x) {
    return (bit_length(x) + 7) / 8;
}

// Minimal big-endian magnitude; 0 encodes to the empty sequence.
inline Bytes bigint_to_bytes(const BigInt& x) {
    if (x < 0) throw InvalidParameter("bigint_to_bytes: negative value");
    Bytes out;
    boost::multiprecision::export_bits(x, std::back_inserter(out), 8);
    if (x == 0) out.clear(); // export_bits yields a single 0 byte
    return out;
}

// Big-endian, left padded with zeros to exactly `len` bytes.
inline Bytes bigint_to_bytes_padded(const BigInt& x, std::size_t len) {
    Bytes raw = bigint_to_bytes(x);
    if (raw.size() > len)
        throw InvalidParameter("bigint_to_bytes_padded: value too large");
    Bytes out(len - raw.size(), 0);
    out.insert(out.end(), raw.begin(), raw.end());
    return out;
}

inline BigInt bytes_to_bigint(const Bytes& b) {
    BigInt x = 0;
    for (std::uint8_t byte : b)
        x = (x << 8) | byte;
    return x;
}

// Uniform in [0, bound) by rejection sampling over whole bytes.
inline BigInt random_below(Rng& rng, const BigInt& bound) {
    if (bound <= 0) throw InvalidParameter("random_below: bound must be positive");
    std::size_t bits = bit_length(bound);
    std::size_t nbytes = (bits + 7) / 8;
    unsigned top_mask = bits % 8 == 0 ? 0xff : (1u << (bits % 8)) - 1;
    for (;;) {
        Bytes buf = rng.bytes(nbytes);
        buf[0] &= static_cast<std::uint8_t>(top_mask);
        BigInt v = bytes_to_bigint(buf);
        if (v < bound) return v;
    }
}

inline BigInt random_bits(Rng& rng, std::size_t bits) {
    if (bits == 0) return 0;
    std::size_t nbytes = (bits + 7) / 8;
    Bytes buf = rng.bytes(nbytes);
    unsigned top_mask = bits % 8 == 0 ? 0xff : (1u << (bits % 8)) - 1;
    buf[0] &= static_cast<std::uint8_t>(top_mask);
    return bytes_to_bigint(buf);
}

namespace detail {

inline const std::vector<unsigned>& small_primes() {
    static const std::vector<unsigned> primes = [] {
        std::vector<unsigned> p;
        std::vector<bool> sieve(2000, true);
        for (unsigned i = 2; i < sieve.size(); ++i) {
            if (!sieve[i]) continue;
            p.push_back(i);
            for (unsigned j = i * i; j < sieve.size(); j += i) sieve[j] = false;
        }
        return p;
    }();
    return primes;
}

} // namespace detail

inline bool is_probable_prime(const BigInt& n, Rng& rng, int rounds = 32) {
    if (n < 2) return false;
    for (unsigned p : detail::small_primes()) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    // Miller-Rabin with random bases.
    BigInt d = n - 1;
    std::size_t s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (int i = 0; i < rounds; ++i) {
        BigInt a = 2 + random_below(rng, n - 3);
        BigInt x = mod_pow(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (std::size_t r = 1; r < s; ++r) {
            x = x * x % n;
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

// Random prime of exactly `bits` bits with the top two bits set, so the
// product of two such primes has exactly 2*bits bits.
inline BigInt random_prime(std::size_t bits, Rng& rng) {
    if (bits < 8) throw InvalidParameter("random_prime: need at least 8 bits");
    for (;;) {
        BigInt candidate = random_bits(rng, bits);
        candidate |= BigInt(1) << (bits - 1);
        candidate |= BigInt(1) << (bits - 2);
        candidate |= 1;
        if (is_probable_prime(candidate, rng)) return candidate;
    }
}

} // namespace paysec
