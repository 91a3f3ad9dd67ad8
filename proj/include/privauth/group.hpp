#ifndef PRIVAUTH_GROUP_HPP
#define PRIVAUTH_GROUP_HPP

#include <array>
#include <concepts>
#include <cstdint>
#include <cstring>

#include <sodium.h>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/rng.hpp"

namespace privauth {

// Requirements for a prime-order group backend. Elements and scalars are
// opaque value types with fixed-size canonical byte encodings; every protocol
// above this layer is written against the concept so the production curve and
// the small exhaustively-testable group are interchangeable.
template <typename G>
concept PrimeOrderGroup = requires(const typename G::Element& e,
                                   const typename G::Scalar& s,
                                   ByteView bytes, Rng& rng) {
    requires std::equality_comparable<typename G::Element>;
    requires std::equality_comparable<typename G::Scalar>;
    { G::kElementBytes } -> std::convertible_to<std::size_t>;
    { G::kScalarBytes } -> std::convertible_to<std::size_t>;
    { G::generator() } -> std::same_as<typename G::Element>;
    { G::identity() } -> std::same_as<typename G::Element>;
    { G::is_identity(e) } -> std::same_as<bool>;
    { G::mul(e, e) } -> std::same_as<typename G::Element>;
    { G::inv(e) } -> std::same_as<typename G::Element>;
    { G::exp(e, s) } -> std::same_as<typename G::Element>;
    { G::random_scalar(rng) } -> std::same_as<typename G::Scalar>;
    { G::scalar_add(s, s) } -> std::same_as<typename G::Scalar>;
    { G::scalar_mul(s, s) } -> std::same_as<typename G::Scalar>;
    { G::scalar_negate(s) } -> std::same_as<typename G::Scalar>;
    { G::scalar_invert(s) } -> std::same_as<typename G::Scalar>;
    { G::hash_to_group(bytes) } -> std::same_as<typename G::Element>;
    { G::hash_to_scalar(bytes) } -> std::same_as<typename G::Scalar>;
    { G::encode(e) } -> std::same_as<Bytes>;
    { G::decode(bytes) } -> std::same_as<typename G::Element>;
    { G::encode_scalar(s) } -> std::same_as<Bytes>;
    { G::decode_scalar(bytes) } -> std::same_as<typename G::Scalar>;
};

// Production group: ristretto255 over Curve25519 via libsodium. Elements and
// scalars are stored in their 32-byte canonical encodings; all arithmetic
// goes through the constant-time libsodium primitives.
struct Ristretto255Group {
    static constexpr std::size_t kElementBytes = crypto_core_ristretto255_BYTES;
    static constexpr std::size_t kScalarBytes = crypto_core_ristretto255_SCALARBYTES;

    using Element = std::array<std::uint8_t, kElementBytes>;
    using Scalar = std::array<std::uint8_t, kScalarBytes>;

    static Element generator() {
        ensure_init();
        // Canonically encoded basepoint: scalar 1 times the base.
        Scalar one{};
        one[0] = 1;
        Element g;
        crypto_scalarmult_ristretto255_base(g.data(), one.data());
        return g;
    }

    static Element identity() {
        ensure_init();
        return Element{};
    }

    static bool is_identity(const Element& e) { return e == Element{}; }

    static Element mul(const Element& a, const Element& b) {
        ensure_init();
        Element r;
        if (crypto_core_ristretto255_add(r.data(), a.data(), b.data()) != 0) {
            throw DecodeError("ristretto255: invalid element in mul");
        }
        return r;
    }

    static Element inv(const Element& a) {
        ensure_init();
        Element r;
        const Element id{};
        if (crypto_core_ristretto255_sub(r.data(), id.data(), a.data()) != 0) {
            throw DecodeError("ristretto255: invalid element in inv");
        }
        return r;
    }

    static Element exp(const Element& base, const Scalar& s) {
        ensure_init();
        // crypto_scalarmult_ristretto255 reports the identity result as an
        // error, so the two cases that legitimately produce it (zero scalar,
        // identity base) are resolved here. Canonical scalars are < L, hence
        // a nonzero scalar on a non-identity base never yields the identity.
        if (s == Scalar{} || is_identity(base)) {
            return identity();
        }
        Element r;
        if (crypto_scalarmult_ristretto255(r.data(), s.data(), base.data()) != 0) {
            throw DecodeError("ristretto255: invalid element in exp");
        }
        return r;
    }

    static Scalar random_scalar(Rng& rng) {
        ensure_init();
        Scalar s;
        do {
            std::uint8_t wide[64];
            rng.fill(wide, sizeof wide);
            crypto_core_ristretto255_scalar_reduce(s.data(), wide);
        } while (s == Scalar{});
        return s;
    }

    static Scalar scalar_add(const Scalar& a, const Scalar& b) {
        ensure_init();
        Scalar r;
        crypto_core_ristretto255_scalar_add(r.data(), a.data(), b.data());
        return r;
    }

    static Scalar scalar_mul(const Scalar& a, const Scalar& b) {
        ensure_init();
        Scalar r;
        crypto_core_ristretto255_scalar_mul(r.data(), a.data(), b.data());
        return r;
    }

    static Scalar scalar_negate(const Scalar& a) {
        ensure_init();
        Scalar r;
        crypto_core_ristretto255_scalar_negate(r.data(), a.data());
        return r;
    }

    static Scalar scalar_invert(const Scalar& a) {
        ensure_init();
        Scalar r;
        if (crypto_core_ristretto255_scalar_invert(r.data(), a.data()) != 0) {
            throw ParameterError("ristretto255: cannot invert zero scalar");
        }
        return r;
    }

    static Element hash_to_group(ByteView data) {
        ensure_init();
        // Uniform 64-byte digest into the Elligator-style map. A fresh
        // counter key on retry makes the (astronomically unlikely) identity
        // output recoverable without changing the input contract.
        for (std::uint64_t ctr = 0;; ++ctr) {
            std::uint8_t key[8];
            store_le64(key, ctr);
            std::uint8_t wide[64];
            crypto_generichash(wide, sizeof wide, data.data(), data.size(),
                               key, sizeof key);
            Element e;
            crypto_core_ristretto255_from_hash(e.data(), wide);
            if (!is_identity(e)) {
                return e;
            }
        }
    }

    static Scalar hash_to_scalar(ByteView data) {
        ensure_init();
        std::uint8_t wide[64];
        crypto_generichash(wide, sizeof wide, data.data(), data.size(),
                           nullptr, 0);
        Scalar s;
        crypto_core_ristretto255_scalar_reduce(s.data(), wide);
        return s;
    }

    static Bytes encode(const Element& e) {
        return Bytes(e.begin(), e.end());
    }

    static Element decode(ByteView bytes) {
        ensure_init();
        if (bytes.size() != kElementBytes) {
            throw DecodeError("ristretto255: element must be 32 bytes");
        }
        Element e;
        std::memcpy(e.data(), bytes.data(), kElementBytes);
        if (!is_identity(e) &&
            crypto_core_ristretto255_is_valid_point(e.data()) != 1) {
            throw DecodeError("ristretto255: non-canonical element encoding");
        }
        return e;
    }

    static Bytes encode_scalar(const Scalar& s) {
        return Bytes(s.begin(), s.end());
    }

    static Scalar decode_scalar(ByteView bytes) {
        if (bytes.size() != kScalarBytes) {
            throw DecodeError("ristretto255: scalar must be 32 bytes");
        }
        Scalar s;
        std::memcpy(s.data(), bytes.data(), kScalarBytes);
        if (!scalar_is_canonical(s)) {
            throw DecodeError("ristretto255: scalar not reduced mod group order");
        }
        return s;
    }

private:
    static void ensure_init() {
        static const int rc = sodium_init();
        if (rc < 0) {
            throw Error("libsodium initialization failed");
        }
    }

    static bool scalar_is_canonical(const Scalar& s) {
        // Group order L, little-endian.
        static constexpr std::uint8_t kOrder[32] = {
            0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58,
            0xd6, 0x9c, 0xf7, 0xa2, 0xde, 0xf9, 0xde, 0x14,
            0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
            0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10,
        };
        for (int i = 31; i >= 0; --i) {
            if (s[static_cast<std::size_t>(i)] < kOrder[i]) return true;
            if (s[static_cast<std::size_t>(i)] > kOrder[i]) return false;
        }
        return false;
    }
};

static_assert(PrimeOrderGroup<Ristretto255Group>);

} // namespace privauth

#endif // PRIVAUTH_GROUP_HPP
