#ifndef PRIVAUTH_ACTORS_HPP
#define PRIVAUTH_ACTORS_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/group.hpp"
#include "privauth/metrics.hpp"
#include "privauth/oprf.hpp"
#include "privauth/privacy.hpp"
#include "privauth/risk.hpp"
#include "privauth/rng.hpp"
#include "privauth/token.hpp"
#include "privauth/transport.hpp"
#include "privauth/vault.hpp"
#include "privauth/wire.hpp"

namespace privauth {

// Server-side protocol endpoint. One instance serves many connections; the
// private key, policy, and feature schema are fixed at construction, and the
// replay set is the only mutable cross-connection state.
template <PrimeOrderGroup G>
class Server {
public:
    struct Config {
        RiskPolicy policy;
        std::vector<FeatureBounds> bounds;
        std::size_t replay_capacity = 1u << 16;

        void validate() const {
            policy.validate();
            if (bounds.size() != policy.weights.size()) {
                throw ParameterError("server: bounds/policy length mismatch");
            }
            for (const auto& b : bounds) {
                if (!(b.lo < b.hi)) {
                    throw ParameterError("server: bounds must satisfy lo < hi");
                }
            }
        }
    };

    struct AuditRecord {
        std::uint64_t seq;
        Bytes session_id;
        double risk;
        AuthRequirement decision;
    };
    using AuditSink = std::function<void(const AuditRecord&)>;

    enum class ConnState { Idle, TokenIssued, TokenVerified, Closed };

    // Per-connection protocol position; confined to one connection.
    struct Connection {
        ConnState state = ConnState::Idle;
        Bytes session_id;
    };

    Server(Config config, Rng& rng)
        : config_(std::move(config)), replay_(config_.replay_capacity) {
        config_.validate();
        setup_.ecdh_keygens += 1;
        key_ = G::random_scalar(rng);
        pub_ = G::exp(G::generator(), key_);
    }

    Connection connect() { return {}; }

    const typename G::Element& public_key() const { return pub_; }

    // Test hook: protocol checks need the key to verify exp relations. The
    // key still never appears in any serialized state.
    const typename G::Scalar& private_key() const { return key_; }

    const Config& config() const { return config_; }
    std::size_t feature_count() const { return config_.bounds.size(); }

    const OpCounters& counters(Phase phase) const {
        return phase == Phase::Setup ? setup_ : auth_;
    }

    void set_audit_sink(AuditSink sink) { audit_ = std::move(sink); }

    // Dispatches one framed message and returns zero or more reply frames.
    std::vector<Bytes> handle(Connection& conn, const Bytes& frame) {
        wire::Message msg;
        try {
            msg = wire::decode(frame);
        } catch (const WireError&) {
            return reject(wire::RejectReason::Protocol);
        }
        try {
            switch (msg.kind) {
                case wire::MessageKind::BlindedOprfInput:
                    return handle_oprf_input(conn, msg);
                case wire::MessageKind::SessionRequest:
                    return handle_session_request(conn, msg);
                case wire::MessageKind::TokenPresentation:
                    return handle_presentation(conn, msg);
                case wire::MessageKind::PrivateFeatures:
                    return handle_features(conn, msg);
                default:
                    // Client-bound kinds have no business arriving here.
                    return reject(wire::RejectReason::Protocol);
            }
        } catch (const DecodeError&) {
            conn.state = ConnState::Closed;
            return reject(wire::RejectReason::Malformed);
        } catch (const ParameterError&) {
            conn.state = ConnState::Closed;
            return reject(wire::RejectReason::Malformed);
        }
    }

private:
    std::vector<Bytes> reject(wire::RejectReason reason) {
        return {wire::encode(wire::make_reject(reason))};
    }

    std::vector<Bytes> handle_oprf_input(Connection& conn,
                                         const wire::Message& msg) {
        if (conn.state != ConnState::Idle) {
            return reject(wire::RejectReason::Protocol);
        }
        const auto blinded = G::decode(msg.payload);
        setup_.prf_evals += 1;
        const auto evaluated = oprf::evaluate<G>(blinded, key_);
        return {wire::encode({wire::MessageKind::ServerPubKey, G::encode(pub_)}),
                wire::encode({wire::MessageKind::OprfEvaluation,
                              G::encode(evaluated)})};
    }

    std::vector<Bytes> handle_session_request(Connection& conn,
                                              const wire::Message& msg) {
        if (conn.state != ConnState::Idle) {
            return reject(wire::RejectReason::Protocol);
        }
        const auto parts = wire::split_three_elements(msg);
        token::SessionRequest<G> request{G::decode(parts[0]),
                                         G::decode(parts[1]),
                                         G::decode(parts[2])};
        auth_.prf_evals += 1;
        typename G::Element blind_token;
        try {
            blind_token = token::issue(request, key_);
        } catch (const AuthRejectedError&) {
            conn.state = ConnState::Closed;
            return reject(wire::RejectReason::CredentialCheckFailed);
        }
        conn.state = ConnState::TokenIssued;
        return {wire::encode({wire::MessageKind::BlindTokenReply,
                              G::encode(blind_token)})};
    }

    std::vector<Bytes> handle_presentation(Connection& conn,
                                           const wire::Message& msg) {
        if (conn.state != ConnState::TokenIssued) {
            return reject(wire::RejectReason::Protocol);
        }
        const auto parts = wire::split_three_elements(msg);
        token::SessionToken<G> tok{G::decode(parts[0]), G::decode(parts[1]),
                                   G::decode(parts[2])};
        auth_.verifications += 1;
        if (!token::verify(tok, key_)) {
            conn.state = ConnState::Closed;
            return reject(wire::RejectReason::TokenInvalid);
        }
        if (!replay_.admit(G::encode(tok.session_id))) {
            conn.state = ConnState::Closed;
            return reject(wire::RejectReason::Replay);
        }
        conn.session_id = G::encode(tok.session_id);
        conn.state = ConnState::TokenVerified;
        // Acceptance is signaled by proceeding; the client pipelines its
        // features without waiting for an ack.
        return {};
    }

    std::vector<Bytes> handle_features(Connection& conn,
                                       const wire::Message& msg) {
        if (conn.state != ConnState::TokenVerified) {
            return reject(wire::RejectReason::Protocol);
        }
        const std::size_t n_f = config_.bounds.size();
        if (msg.payload.size() != 2 * 32 * n_f) {
            conn.state = ConnState::Closed;
            return reject(wire::RejectReason::Malformed);
        }
        const auto [profile_values, live_values] =
            wire::split_private_features(msg);
        const FeatureVector profile{profile_values, config_.bounds};
        const FeatureVector live{live_values, config_.bounds};
        auth_.aggregations += n_f;
        auth_.risk_scores += 1;
        const double risk = score(profile, live, config_.policy);
        auth_.decisions += 1;
        const AuthRequirement level = decide(risk, config_.policy);
        if (audit_) {
            audit_({audit_seq_++, conn.session_id, risk, level});
        }
        conn.state = ConnState::Closed;
        return {wire::encode(wire::make_risk_reply({risk, level}))};
    }

    Config config_;
    typename G::Scalar key_;
    typename G::Element pub_;
    token::ReplayGuard replay_;
    OpCounters setup_;
    OpCounters auth_;
    AuditSink audit_;
    std::uint64_t audit_seq_ = 0;
};

enum class ClientPhase { Setup, Registered, SessionPending, Authenticated };

// Client-side protocol endpoint for one user on one device.
template <PrimeOrderGroup G>
class Client {
public:
    struct AuthResult {
        AuthRequirement requirement;
        double risk_score;
    };

    // Everything a device must persist to authenticate later. The password
    // is deliberately absent: it is re-entered per session, and a wrong
    // entry surfaces as a server-side credential rejection.
    struct Snapshot {
        vault::SymmetricKey sym_key;
        typename G::Scalar signing_secret;
        oprf::OprfOutput<G> oprf_output;
        vault::ProfileCiphertext encrypted_profile;
        typename G::Element server_pub;
        std::vector<FeatureBounds> bounds;
    };

    Client(std::string username, std::string password, Rng rng)
        : username_(std::move(username)), password_(std::move(password)),
          rng_(std::move(rng)) {
        if (username_.empty() || password_.empty()) {
            throw ParameterError("client: credentials must be nonempty");
        }
    }

    Client(std::string username, std::string password, Rng rng,
           const Snapshot& state)
        : Client(std::move(username), std::move(password), std::move(rng)) {
        sym_key_ = state.sym_key;
        signing_key_ = {state.signing_secret,
                        G::exp(G::generator(), state.signing_secret)};
        oprf_output_ = state.oprf_output;
        encrypted_profile_ = state.encrypted_profile;
        server_pub_ = state.server_pub;
        bounds_ = state.bounds;
        phase_ = ClientPhase::Registered;
    }

    Snapshot snapshot() const {
        if (phase_ == ClientPhase::Setup) {
            throw ProtocolError("client: nothing to persist before registration");
        }
        return {sym_key_,  signing_key_.secret, oprf_output_,
                encrypted_profile_, server_pub_, bounds_};
    }

    // Re-registration on a device that already holds a signing identity:
    // keeping the keypair keeps the registry counter advancing for one owner.
    void adopt_identity(const typename G::Scalar& signing_secret) {
        if (phase_ != ClientPhase::Setup) {
            throw ProtocolError("client: identity is fixed after registration");
        }
        signing_key_ = {signing_secret,
                        G::exp(G::generator(), signing_secret)};
        adopted_identity_ = true;
    }

    ClientPhase phase() const { return phase_; }
    const OpCounters& counters(Phase phase) const {
        return phase == Phase::Setup ? setup_ : auth_;
    }
    const typename G::Element& owner_pub() const { return signing_key_.pub; }
    const vault::SymmetricKey& sym_key() const { return sym_key_; }
    const oprf::OprfOutput<G>& oprf_output() const { return oprf_output_; }
    const typename G::Element& server_pub() const { return server_pub_; }
    const vault::ProfileCiphertext& encrypted_profile() const {
        return encrypted_profile_;
    }

    // Setup phase: key generation, blinded OPRF round, profile encryption,
    // backup, and registry binding.
    void register_user(const FeatureVector& profile, Transport& transport,
                       vault::ContentStore& store,
                       vault::Registry<G>& registry) {
        if (phase_ != ClientPhase::Setup) {
            throw ProtocolError("client: already registered");
        }
        profile.validate();
        setup_.sym_keygens += 1;
        sym_key_ = vault::generate_key(rng_);
        if (!adopted_identity_) {
            setup_.sig_keygens += 1;
            signing_key_ = vault::signing_keygen<G>(rng_);
        }
        setup_.feature_extractions += profile.size();

        setup_.hashes += 1;
        const auto digest = oprf::derive_digest<G>(username_, password_);
        const auto blinding = oprf::blind(digest, rng_);
        transport.send(wire::encode({wire::MessageKind::BlindedOprfInput,
                                     G::encode(blinding.blinded)}));
        server_pub_ = G::decode(
            expect(transport, wire::MessageKind::ServerPubKey).payload);
        const auto evaluated = G::decode(
            expect(transport, wire::MessageKind::OprfEvaluation).payload);
        setup_.prf_evals += 1;
        oprf_output_ = oprf::unblind<G>(evaluated, server_pub_, blinding);

        setup_.sym_encryptions += 1;
        encrypted_profile_ = vault::encrypt_profile(sym_key_, profile, rng_);
        const auto cid = store.put(encrypted_profile_);
        setup_.signatures += 1;
        registry.update(signing_key_, cid);

        bounds_ = profile.bounds;
        phase_ = ClientPhase::Registered;
    }

    // Authentication phase: anonymous token round, then privatized feature
    // transmission and the server's adaptive decision.
    AuthResult authenticate(const FeatureVector& live,
                            const PrivacyBudget& budget, Transport& transport) {
        if (phase_ != ClientPhase::Registered &&
            phase_ != ClientPhase::Authenticated) {
            throw ProtocolError("client: must register before authenticating");
        }
        live.validate();
        if (!bounds_match(live.bounds)) {
            throw ParameterError("client: live bounds differ from profile schema");
        }
        const ClientPhase resume = phase_;
        phase_ = ClientPhase::SessionPending;
        try {
            const AuthResult result = run_session(live, budget, transport);
            phase_ = ClientPhase::Authenticated;
            return result;
        } catch (...) {
            phase_ = resume;
            throw;
        }
    }

private:
    AuthResult run_session(const FeatureVector& live,
                           const PrivacyBudget& budget, Transport& transport) {
        auth_.hashes += 1;
        const auto digest = oprf::derive_digest<G>(username_, password_);
        auth_.prf_evals += 1;
        auto [request, secrets] = token::new_session(oprf_output_, digest, rng_);
        transport.send(wire::encode(wire::make_three_element_message(
            wire::MessageKind::SessionRequest, G::encode(request.blinded_eval),
            G::encode(request.blinded_hash),
            G::encode(request.blinded_session))));
        const auto t_prime = G::decode(
            expect(transport, wire::MessageKind::BlindTokenReply).payload);
        const auto tok = token::unblind_token(t_prime, server_pub_, secrets);
        transport.send(wire::encode(wire::make_three_element_message(
            wire::MessageKind::TokenPresentation, G::encode(tok.token),
            G::encode(tok.blinded_hash), G::encode(tok.session_id))));

        auth_.sym_decryptions += 1;
        const FeatureVector profile =
            vault::decrypt_profile(sym_key_, encrypted_profile_);
        const FeatureVector noised_profile = privatize(profile, budget, rng_);
        auth_.noise_additions += profile.size();
        const FeatureVector noised_live = privatize(live, budget, rng_);
        auth_.noise_additions += live.size();
        transport.send(wire::encode(wire::make_private_features(
            noised_profile.values, noised_live.values)));

        const auto reply =
            wire::parse_risk_reply(expect(transport, wire::MessageKind::RiskReply));
        return {reply.adjustment, reply.score};
    }

    bool bounds_match(const std::vector<FeatureBounds>& other) const {
        if (other.size() != bounds_.size()) return false;
        for (std::size_t i = 0; i < other.size(); ++i) {
            if (other[i].lo != bounds_[i].lo || other[i].hi != bounds_[i].hi) {
                return false;
            }
        }
        return true;
    }

    // Receives the next frame, surfacing rejections as typed errors.
    wire::Message expect(Transport& transport, wire::MessageKind kind) {
        const wire::Message msg = wire::decode(transport.receive());
        if (msg.kind == wire::MessageKind::Reject) {
            switch (wire::parse_reject(msg)) {
                case wire::RejectReason::CredentialCheckFailed:
                    throw AuthRejectedError("server rejected credentials");
                case wire::RejectReason::TokenInvalid:
                    throw AuthRejectedError("server rejected session token");
                case wire::RejectReason::Replay:
                    throw ReplayError("server rejected replayed session");
                case wire::RejectReason::Malformed:
                case wire::RejectReason::Protocol:
                    throw ProtocolError("server rejected message");
            }
        }
        if (msg.kind != kind) {
            throw ProtocolError("client: unexpected reply kind");
        }
        return msg;
    }

    std::string username_;
    std::string password_;
    Rng rng_;
    ClientPhase phase_ = ClientPhase::Setup;
    bool adopted_identity_ = false;
    vault::SymmetricKey sym_key_{};
    vault::SigningKey<G> signing_key_{};
    oprf::OprfOutput<G> oprf_output_{};
    vault::ProfileCiphertext encrypted_profile_;
    typename G::Element server_pub_{};
    std::vector<FeatureBounds> bounds_;
    OpCounters setup_;
    OpCounters auth_;
};

} // namespace privauth

#endif // PRIVAUTH_ACTORS_HPP
