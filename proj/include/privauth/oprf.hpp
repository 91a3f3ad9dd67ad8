#ifndef PRIVAUTH_OPRF_HPP
#define PRIVAUTH_OPRF_HPP

#include <string_view>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/group.hpp"
#include "privauth/rng.hpp"

namespace privauth::oprf {

// m = H(U || P) lifted into the group.
template <PrimeOrderGroup G>
struct CredentialDigest {
    typename G::Element element;
};

// Client-side blinding record for one OPRF round. Single use: the factor b
// never leaves the client and the state is discarded after unblind.
template <PrimeOrderGroup G>
struct BlindingState {
    typename G::Scalar factor;
    typename G::Element blinded;
};

template <PrimeOrderGroup G>
struct OprfOutput {
    typename G::Element element;
};

// Digest of the credential pair. The 0x00 separator keeps boundary-shifted
// pairs such as ("ab","c") and ("a","bc") distinct.
template <PrimeOrderGroup G>
CredentialDigest<G> derive_digest(std::string_view username,
                                  std::string_view password) {
    if (username.empty() || password.empty()) {
        throw ParameterError("oprf: username and password must be nonempty");
    }
    Bytes input = to_bytes(username);
    input.push_back(0x00);
    append(input, to_bytes(password));
    return {G::hash_to_group(input)};
}

// Blind with a caller-chosen factor. Exposed so tests can force degenerate
// factors; protocol code uses blind() below.
template <PrimeOrderGroup G>
BlindingState<G> blind_with(const CredentialDigest<G>& digest,
                            const typename G::Scalar& factor) {
    return {factor, G::mul(digest.element, G::exp(G::generator(), factor))};
}

// m' = m * g^b for fresh random b. The server sees m' only, which is uniform
// in the group regardless of m.
template <PrimeOrderGroup G>
BlindingState<G> blind(const CredentialDigest<G>& digest, Rng& rng) {
    return blind_with(digest, G::random_scalar(rng));
}

// Server side: F_x(m') = (m')^x.
template <PrimeOrderGroup G>
typename G::Element evaluate(const typename G::Element& blinded,
                             const typename G::Scalar& server_key) {
    if (G::is_identity(blinded)) {
        throw ParameterError("oprf: blinded input must not be the identity");
    }
    return G::exp(blinded, server_key);
}

// Client side: F_x(m) = F_x(m') / (g^x)^b, using the published y = g^x.
template <PrimeOrderGroup G>
OprfOutput<G> unblind(const typename G::Element& evaluated,
                      const typename G::Element& server_pub,
                      const BlindingState<G>& state) {
    const auto k = G::exp(server_pub, state.factor);
    return {G::mul(evaluated, G::inv(k))};
}

} // namespace privauth::oprf

#endif // PRIVAUTH_OPRF_HPP
