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

#include <stdexcept>
#include <string>

namespace paysec {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (bad length, bad range, ...).
struct InvalidParameter : Error {
    using Error::Error;
};

// Ciphertext, signature or padding failed an authenticity check.
struct IntegrityError : Error {
    using Error::Error;
};

// An operation was invoked in a protocol state that does not allow it.
struct StateError : Error {
    using Error::Error;
};

// A serialized record or config file could not be decoded.
struct ParseError : Error {
    using Error::Error;
};

struct PayloadTooLarge : Error {
    using Error::Error;
};

// A simulation exceeded its tick limit.
struct NonTermination : Error {
    using Error::Error;
};

} // namespace paysec
