// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace udm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad parameters, malformed input files, incompatible construction/field choices.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Arithmetic misuse: zero inverse, elements from another field.
class FieldError : public Error {
public:
    using Error::Error;
};

/// A collection failed a full-rank certification where one was required.
class CertificationError : public Error {
public:
    using Error::Error;
};

/// The workers cannot deliver enough blocks, or the received system is singular.
class DecodeError : public Error {
public:
    using Error::Error;
};

} // namespace udm
