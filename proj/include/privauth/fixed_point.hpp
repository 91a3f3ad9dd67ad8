#ifndef PRIVAUTH_FIXED_POINT_HPP
#define PRIVAUTH_FIXED_POINT_HPP

#include <array>
#include <cmath>
#include <cstdint>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"

namespace privauth::fixed_point {

// Signed Q128.128: 128 integer bits, 128 fractional bits, two's complement,
// big-endian on the wire. Every finite double with magnitude below 2^127 and
// exponent >= -128 round-trips exactly; smaller tails truncate toward zero.
constexpr std::size_t kValueBytes = 32;

using Encoded = std::array<std::uint8_t, kValueBytes>;

namespace detail {

// 256-bit magnitude as four little-endian 64-bit limbs.
using Limbs = std::array<std::uint64_t, 4>;

inline void negate(Limbs& limbs) {
    unsigned __int128 carry = 1;
    for (auto& limb : limbs) {
        carry += static_cast<unsigned __int128>(~limb);
        limb = static_cast<std::uint64_t>(carry);
        carry >>= 64;
    }
}

} // namespace detail

inline Encoded encode(double x) {
    if (!std::isfinite(x)) {
        throw EncodeError("fixed point: value must be finite");
    }
    const bool negative = x < 0.0;
    const double magnitude = std::abs(x);
    if (magnitude >= 0x1p127) {
        throw EncodeError("fixed point: magnitude exceeds 2^127");
    }

    detail::Limbs limbs{};
    if (magnitude > 0.0) {
        int exp2 = 0;
        const double frac = std::frexp(magnitude, &exp2);
        // frac * 2^53 is an exact 53-bit integer; magnitude = mant * 2^(exp2-53).
        const auto mant = static_cast<std::uint64_t>(std::ldexp(frac, 53));
        // The Q128.128 integer is mant shifted by exp2 + 128 - 53.
        const int shift = exp2 + 75;
        if (shift >= 0) {
            const std::size_t limb = static_cast<std::size_t>(shift) / 64;
            const unsigned bit = static_cast<unsigned>(shift) % 64;
            const unsigned __int128 wide =
                static_cast<unsigned __int128>(mant) << bit;
            limbs[limb] = static_cast<std::uint64_t>(wide);
            if (limb + 1 < limbs.size()) {
                limbs[limb + 1] = static_cast<std::uint64_t>(wide >> 64);
            }
        } else if (shift > -53) {
            limbs[0] = mant >> static_cast<unsigned>(-shift);
        }
        if (negative) {
            detail::negate(limbs);
        }
    }

    Encoded out;
    for (std::size_t i = 0; i < 4; ++i) {
        store_be64(out.data() + 8 * i, limbs[3 - i]);
    }
    return out;
}

inline double decode(const Encoded& in) {
    detail::Limbs limbs;
    for (std::size_t i = 0; i < 4; ++i) {
        limbs[3 - i] = load_be64(in.data() + 8 * i);
    }
    const bool negative = (limbs[3] >> 63) != 0;
    if (negative) {
        detail::negate(limbs);
    }
    double magnitude = 0.0;
    for (int i = 3; i >= 0; --i) {
        magnitude = magnitude * 0x1p64 +
                    static_cast<double>(limbs[static_cast<std::size_t>(i)]);
    }
    magnitude = std::ldexp(magnitude, -128);
    return negative ? -magnitude : magnitude;
}

inline Encoded from_bytes(ByteView bytes) {
    if (bytes.size() != kValueBytes) {
        throw DecodeError("fixed point: value must be 32 bytes");
    }
    Encoded out;
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

} // namespace privauth::fixed_point

#endif // PRIVAUTH_FIXED_POINT_HPP
