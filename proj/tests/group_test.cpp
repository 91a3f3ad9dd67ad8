#include <gtest/gtest.h>

#include <cstdint>
#include <set>
#include <vector>

#include "privauth/group.hpp"
#include "privauth/modp_group.hpp"
#include "privauth/rng.hpp"

namespace privauth {
namespace {

// Repeated-multiplication oracle, independent of the fast-exponentiation
// path inside ModPGroup.
std::uint64_t naive_pow(std::uint64_t base, std::uint64_t e, std::uint64_t p) {
    std::uint64_t acc = 1;
    for (std::uint64_t i = 0; i < e; ++i) {
        acc = acc * base % p;
    }
    return acc;
}

TEST(Rng, DeterministicPerSeed) {
    Rng a(42), b(42);
    EXPECT_EQ(a.bytes(64), b.bytes(64));
    EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, LabelsSeparateStreams) {
    Rng a(42, "alpha"), b(42, "beta"), c(42, "alpha");
    const Bytes ba = a.bytes(32);
    EXPECT_NE(ba, b.bytes(32));
    EXPECT_EQ(ba, c.bytes(32));
}

TEST(Rng, SeedsSeparateStreams) {
    Rng a(1), b(2);
    EXPECT_NE(a.bytes(32), b.bytes(32));
}

TEST(Rng, UniformStaysInRange) {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_LT(rng.uniform(10), 10u);
        const double d = rng.uniform_double();
        EXPECT_GE(d, 0.0);
        EXPECT_LT(d, 1.0);
    }
}

TEST(Rng, UniformRejectsZeroBound) {
    Rng rng(7);
    EXPECT_THROW(rng.uniform(0), ParameterError);
}

TEST(SmallGroup, GeneratorHasFullOrder) {
    auto e = SmallGroup::generator();
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 1; i < SmallGroup::kOrder; ++i) {
        seen.insert(SmallGroup::element_to_u64(e));
        e = SmallGroup::mul(e, SmallGroup::generator());
    }
    EXPECT_TRUE(SmallGroup::is_identity(e));
    EXPECT_EQ(seen.size(), SmallGroup::kOrder - 1);
}

TEST(SmallGroup, ExpMatchesNaiveOracleExhaustively) {
    std::vector<SmallGroup::Element> elements;
    auto e = SmallGroup::identity();
    for (std::uint64_t i = 0; i < SmallGroup::kOrder; ++i) {
        elements.push_back(e);
        e = SmallGroup::mul(e, SmallGroup::generator());
    }
    for (const auto& base : elements) {
        for (std::uint64_t k = 0; k < SmallGroup::kOrder; ++k) {
            const auto got = SmallGroup::exp(base, SmallGroup::scalar_from_u64(k));
            EXPECT_EQ(SmallGroup::element_to_u64(got),
                      naive_pow(SmallGroup::element_to_u64(base), k, 47));
        }
    }
}

TEST(SmallGroup, InverseCancelsEveryElement) {
    auto e = SmallGroup::generator();
    for (std::uint64_t i = 0; i < SmallGroup::kOrder; ++i) {
        EXPECT_TRUE(SmallGroup::is_identity(SmallGroup::mul(e, SmallGroup::inv(e))));
        e = SmallGroup::mul(e, SmallGroup::generator());
    }
}

TEST(SmallGroup, ScalarFieldArithmetic) {
    for (std::uint64_t a = 0; a < SmallGroup::kOrder; ++a) {
        for (std::uint64_t b = 0; b < SmallGroup::kOrder; ++b) {
            const auto sa = SmallGroup::scalar_from_u64(a);
            const auto sb = SmallGroup::scalar_from_u64(b);
            EXPECT_EQ(SmallGroup::scalar_to_u64(SmallGroup::scalar_add(sa, sb)),
                      (a + b) % 23);
            EXPECT_EQ(SmallGroup::scalar_to_u64(SmallGroup::scalar_mul(sa, sb)),
                      a * b % 23);
        }
        const auto sa = SmallGroup::scalar_from_u64(a);
        EXPECT_EQ((a + SmallGroup::scalar_to_u64(SmallGroup::scalar_negate(sa))) % 23,
                  0u);
        if (a != 0) {
            const auto inv = SmallGroup::scalar_invert(sa);
            EXPECT_EQ(a * SmallGroup::scalar_to_u64(inv) % 23, 1u);
        }
    }
    EXPECT_THROW(SmallGroup::scalar_invert(SmallGroup::scalar_from_u64(0)),
                 ParameterError);
}

TEST(SmallGroup, DecodeAcceptsOnlySubgroupEncodings) {
    auto e = SmallGroup::generator();
    for (std::uint64_t i = 0; i < SmallGroup::kOrder; ++i) {
        EXPECT_EQ(SmallGroup::decode(SmallGroup::encode(e)), e);
        e = SmallGroup::mul(e, SmallGroup::generator());
    }
    EXPECT_THROW(SmallGroup::decode(SmallGroup::encode(SmallGroup::element_from_u64(0))),
                 DecodeError);
    // 5 is a quadratic non-residue mod 47, hence outside the subgroup.
    EXPECT_THROW(SmallGroup::decode(SmallGroup::encode(SmallGroup::element_from_u64(5))),
                 DecodeError);
    EXPECT_THROW(SmallGroup::decode(SmallGroup::encode(SmallGroup::element_from_u64(47))),
                 DecodeError);
    Bytes junk = SmallGroup::encode(SmallGroup::generator());
    junk[20] = 1;
    EXPECT_THROW(SmallGroup::decode(junk), DecodeError);
    EXPECT_THROW(SmallGroup::decode(Bytes(31)), DecodeError);
}

TEST(SmallGroup, ScalarDecodeRejectsUnreduced) {
    EXPECT_EQ(SmallGroup::scalar_to_u64(SmallGroup::decode_scalar(
                  SmallGroup::encode_scalar(SmallGroup::scalar_from_u64(22)))),
              22u);
    Bytes over(32, 0);
    over[0] = 23;
    EXPECT_THROW(SmallGroup::decode_scalar(over), DecodeError);
}

TEST(SmallGroup, HashToGroupLandsInSubgroup) {
    const auto a = SmallGroup::hash_to_group(to_bytes("input one"));
    const auto b = SmallGroup::hash_to_group(to_bytes("input one"));
    EXPECT_EQ(a, b);
    EXPECT_FALSE(SmallGroup::is_identity(a));
    EXPECT_NO_THROW(SmallGroup::decode(SmallGroup::encode(a)));
}

using R255 = Ristretto255Group;

TEST(Ristretto255, ExponentLawsHold) {
    Rng rng(101);
    for (int i = 0; i < 16; ++i) {
        const auto a = R255::random_scalar(rng);
        const auto b = R255::random_scalar(rng);
        const auto g = R255::generator();
        // g^a * g^b == g^(a+b)
        EXPECT_EQ(R255::mul(R255::exp(g, a), R255::exp(g, b)),
                  R255::exp(g, R255::scalar_add(a, b)));
        // (g^a)^b == g^(a*b)
        EXPECT_EQ(R255::exp(R255::exp(g, a), b),
                  R255::exp(g, R255::scalar_mul(a, b)));
    }
}

TEST(Ristretto255, InverseAndIdentity) {
    Rng rng(102);
    const auto a = R255::random_scalar(rng);
    const auto e = R255::exp(R255::generator(), a);
    EXPECT_TRUE(R255::is_identity(R255::mul(e, R255::inv(e))));
    EXPECT_TRUE(R255::is_identity(R255::exp(e, R255::Scalar{})));
    EXPECT_TRUE(R255::is_identity(R255::exp(R255::identity(), a)));
    EXPECT_EQ(R255::mul(e, R255::identity()), e);
}

TEST(Ristretto255, ScalarInvertUnblinds) {
    Rng rng(103);
    const auto x = R255::random_scalar(rng);
    const auto e = R255::hash_to_group(to_bytes("blind me"));
    const auto blinded = R255::exp(e, x);
    EXPECT_EQ(R255::exp(blinded, R255::scalar_invert(x)), e);
}

TEST(Ristretto255, EncodeDecodeRoundTrip) {
    Rng rng(104);
    const auto e = R255::exp(R255::generator(), R255::random_scalar(rng));
    EXPECT_EQ(R255::decode(R255::encode(e)), e);
    EXPECT_EQ(R255::encode(e).size(), R255::kElementBytes);
    EXPECT_THROW(R255::decode(Bytes(16)), DecodeError);
    EXPECT_THROW(R255::decode(Bytes(32, 0xff)), DecodeError);
}

TEST(Ristretto255, ScalarDecodeEnforcesCanonicalRange) {
    // The group order itself is the smallest non-canonical value.
    const Bytes order = {0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58,
                         0xd6, 0x9c, 0xf7, 0xa2, 0xde, 0xf9, 0xde, 0x14,
                         0,    0,    0,    0,    0,    0,    0,    0,
                         0,    0,    0,    0,    0,    0,    0,    0x10};
    EXPECT_THROW(R255::decode_scalar(order), DecodeError);
    Bytes below = order;
    below[0] = 0xec;
    EXPECT_NO_THROW(R255::decode_scalar(below));
    EXPECT_THROW(R255::decode_scalar(Bytes(31)), DecodeError);
}

TEST(Ristretto255, HashToGroupIsDeterministicAndValid) {
    const auto a = R255::hash_to_group(to_bytes("user@example"));
    const auto b = R255::hash_to_group(to_bytes("user@example"));
    const auto c = R255::hash_to_group(to_bytes("other@example"));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_FALSE(R255::is_identity(a));
    EXPECT_NO_THROW(R255::decode(R255::encode(a)));
}

TEST(Ristretto255, RandomScalarDeterministicPerSeed) {
    Rng a(55), b(55), c(56);
    EXPECT_EQ(R255::random_scalar(a), R255::random_scalar(b));
    EXPECT_NE(R255::random_scalar(a), R255::random_scalar(c));
}

} // namespace
} // namespace privauth
