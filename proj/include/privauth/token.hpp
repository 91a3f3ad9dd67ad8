#ifndef PRIVAUTH_TOKEN_HPP
#define PRIVAUTH_TOKEN_HPP

#include <cstddef>
#include <deque>
#include <unordered_set>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/group.hpp"
#include "privauth/oprf.hpp"
#include "privauth/rng.hpp"

namespace privauth::token {

// What the server sees at Step 1: (F_x(H)^t, H^t, SessionID * g^b').
template <PrimeOrderGroup G>
struct SessionRequest {
    typename G::Element blinded_eval;
    typename G::Element blinded_hash;
    typename G::Element blinded_session;
};

// Client-held randomness for one session. blinded_hash is kept so the final
// token can be packaged without re-deriving the credential.
template <PrimeOrderGroup G>
struct SessionSecrets {
    typename G::Scalar t;
    typename G::Scalar b_prime;
    typename G::Element session_id;
    typename G::Element blinded_hash;
};

// Presented at Step 3: T together with the values the server verifies it
// against. session_id is revealed only here.
template <PrimeOrderGroup G>
struct SessionToken {
    typename G::Element token;
    typename G::Element blinded_hash;
    typename G::Element session_id;
};

namespace detail {

template <PrimeOrderGroup G>
std::pair<SessionRequest<G>, SessionSecrets<G>>
new_session_with(const oprf::OprfOutput<G>& oprf_out,
                 const oprf::CredentialDigest<G>& digest,
                 const typename G::Scalar& t, const typename G::Scalar& b_prime,
                 const typename G::Element& session_id) {
    SessionSecrets<G> secrets{t, b_prime, session_id,
                              G::exp(digest.element, t)};
    SessionRequest<G> request{
        G::exp(oprf_out.element, t),
        secrets.blinded_hash,
        G::mul(session_id, G::exp(G::generator(), b_prime)),
    };
    return {request, secrets};
}

} // namespace detail

// Step 1: pick t and b', mint a fresh SessionID, and blind everything the
// server is about to see.
template <PrimeOrderGroup G>
std::pair<SessionRequest<G>, SessionSecrets<G>>
new_session(const oprf::OprfOutput<G>& oprf_out,
            const oprf::CredentialDigest<G>& digest, Rng& rng) {
    const auto t = G::random_scalar(rng);
    const auto b_prime = G::random_scalar(rng);
    const auto session_id = G::hash_to_group(rng.bytes(32));
    return detail::new_session_with(oprf_out, digest, t, b_prime, session_id);
}

// Step 2, server side: check (H^t)^x == F_x(H)^t, then issue the blind token
// T' = F_x(H)^t * (SessionID')^x.
template <PrimeOrderGroup G>
typename G::Element issue(const SessionRequest<G>& request,
                          const typename G::Scalar& server_key) {
    if (G::is_identity(request.blinded_eval) ||
        G::is_identity(request.blinded_hash) ||
        G::is_identity(request.blinded_session)) {
        throw ParameterError("token: request contains identity elements");
    }
    if (G::exp(request.blinded_hash, server_key) != request.blinded_eval) {
        throw AuthRejectedError("token: credential check failed");
    }
    return G::mul(request.blinded_eval,
                  G::exp(request.blinded_session, server_key));
}

// Step 2, client side: T = T' / (g^x)^b'.
template <PrimeOrderGroup G>
SessionToken<G> unblind_token(const typename G::Element& t_prime,
                              const typename G::Element& server_pub,
                              const SessionSecrets<G>& secrets) {
    const auto k = G::exp(server_pub, secrets.b_prime);
    return {G::mul(t_prime, G::inv(k)), secrets.blinded_hash,
            secrets.session_id};
}

// Step 3: T == (H^t)^x * SessionID^x. Reject is a value, not an error.
template <PrimeOrderGroup G>
bool verify(const SessionToken<G>& tok, const typename G::Scalar& server_key) {
    const auto expected = G::mul(G::exp(tok.blinded_hash, server_key),
                                 G::exp(tok.session_id, server_key));
    return tok.token == expected;
}

// Bounded FIFO set of session-id encodings. A session id presented twice
// within the window is a replay.
class ReplayGuard {
public:
    explicit ReplayGuard(std::size_t capacity = 1u << 16)
        : capacity_(capacity) {
        if (capacity_ == 0) {
            throw ParameterError("replay guard: capacity must be positive");
        }
    }

    // Records the id; returns false if it was already present.
    bool admit(const Bytes& session_id) {
        const std::string key(session_id.begin(), session_id.end());
        if (seen_.contains(key)) {
            return false;
        }
        if (order_.size() == capacity_) {
            seen_.erase(order_.front());
            order_.pop_front();
        }
        order_.push_back(key);
        seen_.insert(key);
        return true;
    }

    std::size_t size() const { return order_.size(); }

private:
    std::size_t capacity_;
    std::deque<std::string> order_;
    std::unordered_set<std::string> seen_;
};

} // namespace privauth::token

#endif // PRIVAUTH_TOKEN_HPP
