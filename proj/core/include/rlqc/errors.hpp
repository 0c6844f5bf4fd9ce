// Copyright 2026 The rlqc Authors
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

namespace rlqc {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unknown name (e.g. a gate set that is not built in).
struct NameError : Error {
    using Error::Error;
};

/// Argument outside the domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// Malformed text input. `line` is 1-based, 0 when unknown.
struct ParseError : Error {
    ParseError(const std::string &what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {
    }
    int line;
};

/// Input that parses but violates an invariant (non-unitary matrix, duplicate label, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// Operation not allowed in the current state (stepping a finished episode).
struct StateError : Error {
    using Error::Error;
};

/// Non-finite values encountered during training.
struct NumericsError : Error {
    using Error::Error;
};

/// A search or allocation guard was exceeded.
struct ResourceError : Error {
    using Error::Error;
};

/// Corrupted or truncated persisted data.
struct IntegrityError : Error {
    using Error::Error;
};

/// File system failures.
struct IoError : Error {
    using Error::Error;
};

}  // namespace rlqc
