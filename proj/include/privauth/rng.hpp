#ifndef PRIVAUTH_RNG_HPP
#define PRIVAUTH_RNG_HPP

#include <cstdint>
#include <cstring>
#include <string_view>

#include <sodium.h>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"

namespace privauth {

// Deterministic random generator used everywhere reproducibility matters:
// simulation, benchmarks, tests. The stream is ChaCha20 keyed by
// BLAKE2b(seed_le64 || label); each fill() call uses a fresh 8-byte
// little-endian nonce taken from a per-instance counter, so the output is a
// pure function of (seed, label, call sequence).
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::string_view label = "") {
        if (sodium_init() < 0) {
            throw Error("libsodium initialization failed");
        }
        Bytes material(8);
        store_le64(material.data(), seed);
        append(material, to_bytes(label));
        crypto_generichash(key_, sizeof key_, material.data(), material.size(),
                           nullptr, 0);
    }

    void fill(std::uint8_t* out, std::size_t len) {
        std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES];
        store_le64(nonce, counter_++);
        crypto_stream_chacha20(out, len, nonce, key_);
    }

    void fill(Bytes& out) { fill(out.data(), out.size()); }

    Bytes bytes(std::size_t len) {
        Bytes out(len);
        fill(out);
        return out;
    }

    std::uint64_t next_u64() {
        std::uint8_t buf[8];
        fill(buf, sizeof buf);
        std::uint64_t v;
        std::memcpy(&v, buf, sizeof v);
        return v;
    }

    // Uniform in [0, bound). Rejection sampling keeps the draw unbiased.
    std::uint64_t uniform(std::uint64_t bound) {
        if (bound == 0) {
            throw ParameterError("uniform: bound must be positive");
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint8_t key_[crypto_stream_chacha20_KEYBYTES];
    std::uint64_t counter_ = 0;
};

} // namespace privauth

#endif // PRIVAUTH_RNG_HPP
