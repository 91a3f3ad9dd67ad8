#ifndef PRIVAUTH_ERRORS_HPP
#define PRIVAUTH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace privauth {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or non-canonical encodings (group elements, scalars).
class DecodeError : public Error {
public:
    explicit DecodeError(const std::string& msg) : Error(msg) {}
};

// Value cannot be represented in the target encoding (fixed-point overflow).
class EncodeError : public Error {
public:
    explicit EncodeError(const std::string& msg) : Error(msg) {}
};

// Framing / message-format violations on the wire.
class WireError : public Error {
public:
    explicit WireError(const std::string& msg) : Error(msg) {}
};

// Invalid numeric or structural parameters (epsilon <= 0, length mismatch, ...).
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& msg) : Error(msg) {}
};

// Credential check failed (the Step 2 equation does not hold).
class AuthRejectedError : public Error {
public:
    explicit AuthRejectedError(const std::string& msg) : Error(msg) {}
};

// A session id was presented twice.
class ReplayError : public Error {
public:
    explicit ReplayError(const std::string& msg) : Error(msg) {}
};

// Message arrived out of order or with an unexpected kind.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& msg) : Error(msg) {}
};

// AEAD authentication failure: wrong key or tampered ciphertext,
// deliberately indistinguishable.
class DecryptError : public Error {
public:
    explicit DecryptError(const std::string& msg) : Error(msg) {}
};

// Lookup miss in the content store or recovery registry.
class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& msg) : Error(msg) {}
};

// Transport-level delivery failure.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error(msg) {}
};

} // namespace privauth

#endif // PRIVAUTH_ERRORS_HPP
