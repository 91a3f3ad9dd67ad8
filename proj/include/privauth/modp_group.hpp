#ifndef PRIVAUTH_MODP_GROUP_HPP
#define PRIVAUTH_MODP_GROUP_HPP

#include <array>
#include <cstdint>
#include <cstring>

#include <sodium.h>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/group.hpp"
#include "privauth/rng.hpp"

namespace privauth {

// Multiplicative subgroup of order Q inside Z_P^*, generated by Gen. Small
// enough parameters make every protocol equation checkable by brute force,
// which is what the exhaustive algebra tests rely on. Encodings are padded to
// 32 bytes so wire-format layouts are identical to the production group.
template <std::uint64_t P, std::uint64_t Q, std::uint64_t Gen>
struct ModPGroup {
    static_assert(P > 3 && Q > 1 && Gen > 1 && Gen < P);
    static_assert((P - 1) % Q == 0, "Q must divide P-1");

    static constexpr std::size_t kElementBytes = 32;
    static constexpr std::size_t kScalarBytes = 32;
    static constexpr std::uint64_t kOrder = Q;

    using Element = std::array<std::uint8_t, kElementBytes>;
    using Scalar = std::array<std::uint8_t, kScalarBytes>;

    static Element generator() { return element_from_u64(Gen); }

    static Element identity() { return element_from_u64(1); }

    static bool is_identity(const Element& e) { return element_to_u64(e) == 1; }

    static Element mul(const Element& a, const Element& b) {
        return element_from_u64(mulmod(element_to_u64(a), element_to_u64(b), P));
    }

    static Element inv(const Element& a) {
        return element_from_u64(powmod(element_to_u64(a), P - 2, P));
    }

    static Element exp(const Element& base, const Scalar& s) {
        return element_from_u64(powmod(element_to_u64(base), scalar_to_u64(s), P));
    }

    static Scalar random_scalar(Rng& rng) {
        return scalar_from_u64(1 + rng.uniform(Q - 1));
    }

    static Scalar scalar_add(const Scalar& a, const Scalar& b) {
        return scalar_from_u64((scalar_to_u64(a) + scalar_to_u64(b)) % Q);
    }

    static Scalar scalar_mul(const Scalar& a, const Scalar& b) {
        return scalar_from_u64(mulmod(scalar_to_u64(a), scalar_to_u64(b), Q));
    }

    static Scalar scalar_negate(const Scalar& a) {
        return scalar_from_u64((Q - scalar_to_u64(a)) % Q);
    }

    static Scalar scalar_invert(const Scalar& a) {
        const std::uint64_t v = scalar_to_u64(a);
        if (v == 0) {
            throw ParameterError("modp: cannot invert zero scalar");
        }
        return scalar_from_u64(powmod(v, Q - 2, Q));
    }

    static Element hash_to_group(ByteView data) {
        // Raise a digest-derived unit into the order-Q subgroup via the
        // cofactor map x -> x^((P-1)/Q); retry keyed digests on identity.
        constexpr std::uint64_t cofactor = (P - 1) / Q;
        for (std::uint64_t ctr = 0;; ++ctr) {
            std::uint8_t key[8];
            store_le64(key, ctr);
            std::uint8_t digest[8];
            crypto_generichash(digest, sizeof digest, data.data(), data.size(),
                               key, sizeof key);
            const std::uint64_t x = 2 + load_le64(digest) % (P - 3);
            const std::uint64_t e = powmod(x, cofactor, P);
            if (e != 1) {
                return element_from_u64(e);
            }
        }
    }

    static Scalar hash_to_scalar(ByteView data) {
        std::uint8_t digest[8];
        crypto_generichash(digest, sizeof digest, data.data(), data.size(),
                           nullptr, 0);
        return scalar_from_u64(load_le64(digest) % Q);
    }

    static Bytes encode(const Element& e) { return Bytes(e.begin(), e.end()); }

    static Element decode(ByteView bytes) {
        if (bytes.size() != kElementBytes) {
            throw DecodeError("modp: element must be 32 bytes");
        }
        Element e;
        std::memcpy(e.data(), bytes.data(), kElementBytes);
        for (std::size_t i = 8; i < kElementBytes; ++i) {
            if (e[i] != 0) {
                throw DecodeError("modp: non-canonical element encoding");
            }
        }
        const std::uint64_t v = element_to_u64(e);
        if (v == 0 || v >= P || powmod(v, Q, P) != 1) {
            throw DecodeError("modp: encoding outside the subgroup");
        }
        return e;
    }

    static Bytes encode_scalar(const Scalar& s) { return Bytes(s.begin(), s.end()); }

    static Scalar decode_scalar(ByteView bytes) {
        if (bytes.size() != kScalarBytes) {
            throw DecodeError("modp: scalar must be 32 bytes");
        }
        Scalar s;
        std::memcpy(s.data(), bytes.data(), kScalarBytes);
        for (std::size_t i = 8; i < kScalarBytes; ++i) {
            if (s[i] != 0) {
                throw DecodeError("modp: non-canonical scalar encoding");
            }
        }
        if (scalar_to_u64(s) >= Q) {
            throw DecodeError("modp: scalar not reduced mod group order");
        }
        return s;
    }

    // Direct constructors, used by exhaustive tests to enumerate the group.
    static Element element_from_u64(std::uint64_t v) {
        Element e{};
        store_le64(e.data(), v);
        return e;
    }

    static std::uint64_t element_to_u64(const Element& e) {
        return load_le64(e.data());
    }

    static Scalar scalar_from_u64(std::uint64_t v) {
        Scalar s{};
        store_le64(s.data(), v % Q);
        return s;
    }

    static std::uint64_t scalar_to_u64(const Scalar& s) {
        return load_le64(s.data());
    }

    static std::uint64_t powmod(std::uint64_t base, std::uint64_t e,
                                std::uint64_t mod) {
        std::uint64_t acc = 1 % mod;
        base %= mod;
        while (e != 0) {
            if (e & 1) acc = mulmod(acc, base, mod);
            base = mulmod(base, base, mod);
            e >>= 1;
        }
        return acc;
    }

private:
    static std::uint64_t mulmod(std::uint64_t a, std::uint64_t b,
                                std::uint64_t mod) {
        return static_cast<std::uint64_t>(
            static_cast<unsigned __int128>(a) * b % mod);
    }
};

// Parameters used throughout the test suite: 23 | 46 = 47 - 1 and 4 = 2^2
// generates the index-2 subgroup of quadratic residues mod 47.
using SmallGroup = ModPGroup<47, 23, 4>;

static_assert(PrimeOrderGroup<SmallGroup>);

} // namespace privauth

#endif // PRIVAUTH_MODP_GROUP_HPP
