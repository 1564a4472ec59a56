// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace annealab {

/// Invalid construction parameters or configuration. Messages name the
/// violated constraint, e.g. "wsd: t_warmup (950) must be <= t_constant (900)".
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input files (CSV / JSON / JSONL); message carries file and
/// line context where available.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numeric domain violations (non-positive S, zero observed loss, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Data content errors: non-finite losses, non-monotone steps, diverged runs.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace annealab
