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

#include <cstdint>
#include <random>
#include <string_view>

#include "paysec/bytes.hpp"

namespace paysec {

// Deterministic random source. Everything in the library that needs
// randomness takes one of these explicitly, so a scenario seed fixes every
// transcript byte. std::mt19937_64 output is fully specified by the
// standard; we avoid std distributions because those are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t u64() { return gen_(); }

    std::uint8_t byte() { return static_cast<std::uint8_t>(gen_() & 0xff); }

    void fill(std::uint8_t* data, std::size_t len) {
        std::size_t i = 0;
        while (i < len) {
            std::uint64_t v = gen_();
            for (int j = 0; j < 8 && i < len; ++j, ++i)
                data[i] = static_cast<std::uint8_t>(v >> (8 * j));
        }
    }

    Bytes bytes(std::size_t len) {
        Bytes out(len);
        fill(out.data(), out.size());
        return out;
    }

    // Uniform in [0, bound) by rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw InvalidParameter("Rng::below: zero bound");
        if ((bound & (bound - 1)) == 0) return gen_() & (bound - 1);
        std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        for (;;) {
            std::uint64_t v = gen_();
            if (v < limit) return v % bound;
        }
    }

    // Independent child stream; label keeps streams for different consumers
    // of one scenario seed decorrelated.
    Rng derive(std::string_view label) const {
        std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
        for (char c : label) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 0x100000001b3ull;
        }
        return Rng(h ^ seed_mix());
    }

    static Rng derive_from(std::uint64_t seed, std::string_view label) {
        return Rng(seed).derive(label);
    }

private:
    std::uint64_t seed_mix() const {
        // Snapshot a copy so derive() does not disturb this stream.
        auto copy = gen_;
        std::uint64_t a = copy();
        std::uint64_t b = copy();
        return a * 0x9e3779b97f4a7c15ull ^ b;
    }
    std::mt19937_64 gen_;
};

} // namespace paysec
