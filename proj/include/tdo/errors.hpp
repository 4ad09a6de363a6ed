#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdo {

// Base class for every toolkit failure that is thrown. Verification outcomes
// (seal checks, authenticity verdicts, audits) are reported as values and
// never throw; exceptions are for construction, parsing, and I/O.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value violates a type or field rule: duplicate blob names, unregistered
// algorithm tag, broken provenance chaining, and so on.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Bytes are not well-formed markup. offset() is the byte position of the
// first offending byte.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Well-formed markup that is not the canonical encoding of any object:
// re-encoding the decoded value does not reproduce the input bytes, or the
// document does not match the fixed schema.
class CanonicalityError : public Error {
public:
    using Error::Error;
};

class CryptoError : public Error {
public:
    using Error::Error;
};

class StoreError : public Error {
public:
    using Error::Error;
};

class VmError : public Error {
public:
    using Error::Error;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace tdo
