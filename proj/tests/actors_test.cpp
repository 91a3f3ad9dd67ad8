#include <gtest/gtest.h>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "privauth/privauth.hpp"

namespace privauth {
namespace {

using R255 = Ristretto255Group;
using ServerT = Server<R255>;
using ClientT = Client<R255>;
using Loopback = LoopbackTransport<ServerT>;

ServerT::Config make_config(std::size_t n_f) {
    ServerT::Config cfg;
    cfg.policy = RiskPolicy::uniform(n_f);
    cfg.bounds.assign(n_f, {0.0, 100.0});
    return cfg;
}

FeatureVector make_profile(std::size_t n_f, double value) {
    FeatureVector out;
    out.values.assign(n_f, value);
    out.bounds.assign(n_f, {0.0, 100.0});
    return out;
}

PrivacyBudget quiet_budget(const ServerT& server) {
    // Epsilon so large the Laplace noise is far below decision resolution.
    return {1e6, derive_sensitivity(server.config().policy,
                                    server.config().bounds)};
}

std::vector<wire::MessageKind> kinds_of(const std::deque<Bytes>& frames) {
    std::vector<wire::MessageKind> kinds;
    for (const auto& frame : frames) {
        kinds.push_back(wire::decode(frame).kind);
    }
    return kinds;
}

TEST(Actors, RegisterEstablishesProtocolState) {
    Rng server_rng(1, "server");
    ServerT server(make_config(3), server_rng);
    ClientT client("alice", "correct horse", Rng(2, "client"));
    Loopback link(server);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;

    const auto profile = make_profile(3, 42.0);
    client.register_user(profile, link, store, registry);

    EXPECT_EQ(client.phase(), ClientPhase::Registered);
    EXPECT_EQ(client.server_pub(), server.public_key());

    // The held PRF output obeys the exp relation against the test-known key.
    const auto digest = oprf::derive_digest<R255>("alice", "correct horse");
    EXPECT_EQ(client.oprf_output().element,
              R255::exp(digest.element, server.private_key()));

    // The backup landed in the store under the registry's latest cid.
    const auto entry = registry.latest(client.owner_pub());
    ASSERT_TRUE(entry.has_value());
    EXPECT_EQ(entry->cid, vault::content_id(client.encrypted_profile()));
    const auto recovered =
        vault::recover(registry, store, client.owner_pub(), client.sym_key());
    EXPECT_EQ(recovered.values, profile.values);

    EXPECT_THROW(
        client.register_user(profile, link, store, registry), ProtocolError);
}

TEST(Actors, RepeatRegistrationGivesFreshBlindsSameOutput) {
    Rng server_rng(3, "server");
    ServerT server(make_config(2), server_rng);
    const auto profile = make_profile(2, 10.0);

    ClientT first("bob", "hunter2", Rng(4, "client"));
    ClientT second("bob", "hunter2", Rng(5, "client"));
    Loopback link1(server), link2(server);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    first.register_user(profile, link1, store, registry);
    second.register_user(profile, link2, store, registry);

    EXPECT_NE(link1.frames_to_server().front(), link2.frames_to_server().front());
    EXPECT_EQ(first.oprf_output().element, second.oprf_output().element);
}

TEST(Actors, RegistrationOverLossyLinkMatchesLossless) {
    Rng server_rng(6, "server");
    ServerT server(make_config(2), server_rng);
    const auto profile = make_profile(2, 25.0);

    simnet::NetConfig net;
    net.base_loss = 0.10;
    net.base_chunk = 2;
    simnet::SimTransport<ServerT> lossy(server, net, Rng(7, "net"));
    ClientT client("carol", "pw", Rng(8, "client"));
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    client.register_user(profile, lossy, store, registry);

    EXPECT_GT(lossy.totals().retransmissions, 0u);
    const auto digest = oprf::derive_digest<R255>("carol", "pw");
    EXPECT_EQ(client.oprf_output().element,
              R255::exp(digest.element, server.private_key()));
    EXPECT_EQ(client.phase(), ClientPhase::Registered);
}

TEST(Actors, ZeroDeviationAuthenticatesAsStandard) {
    Rng server_rng(9, "server");
    ServerT server(make_config(4), server_rng);
    ClientT client("dave", "pw", Rng(10, "client"));
    Loopback link(server);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    const auto profile = make_profile(4, 50.0);
    client.register_user(profile, link, store, registry);

    const auto result = client.authenticate(profile, quiet_budget(server), link);
    EXPECT_EQ(result.requirement, AuthRequirement::Standard);
    EXPECT_LT(result.risk_score, 0.05);
    EXPECT_EQ(client.phase(), ClientPhase::Authenticated);
}

TEST(Actors, FullDeviationAuthenticatesAsAdvanced) {
    Rng server_rng(11, "server");
    ServerT server(make_config(4), server_rng);
    ClientT client("erin", "pw", Rng(12, "client"));
    Loopback link(server);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    client.register_user(make_profile(4, 0.0), link, store, registry);

    const auto result =
        client.authenticate(make_profile(4, 100.0), quiet_budget(server), link);
    EXPECT_EQ(result.requirement, AuthRequirement::Advanced);
    EXPECT_GT(result.risk_score, 0.95);
}

TEST(Actors, WrongPasswordRejectedBeforeFeaturesLeave) {
    Rng server_rng(13, "server");
    ServerT server(make_config(3), server_rng);
    ClientT owner("frank", "correct", Rng(14, "client"));
    Loopback setup_link(server);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    const auto profile = make_profile(3, 30.0);
    owner.register_user(profile, setup_link, store, registry);
    const auto state = owner.snapshot();

    ClientT intruder("frank", "incorrect", Rng(15, "client"), state);
    Loopback attack_link(server);
    EXPECT_THROW(
        intruder.authenticate(profile, quiet_budget(server), attack_link),
        AuthRejectedError);
    EXPECT_EQ(intruder.phase(), ClientPhase::Registered);
    for (const auto kind : kinds_of(attack_link.frames_to_server())) {
        EXPECT_NE(kind, wire::MessageKind::PrivateFeatures);
    }

    // The same persisted state with the right password still works.
    ClientT returning("frank", "correct", Rng(16, "client"), state);
    Loopback retry_link(server);
    const auto result =
        returning.authenticate(profile, quiet_budget(server), retry_link);
    EXPECT_EQ(result.requirement, AuthRequirement::Standard);
}

TEST(Actors, ReplayedPresentationRejected) {
    Rng server_rng(17, "server");
    ServerT server(make_config(2), server_rng);
    ClientT client("grace", "pw", Rng(18, "client"));
    Loopback link(server);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    const auto profile = make_profile(2, 60.0);
    client.register_user(profile, link, store, registry);
    client.authenticate(profile, quiet_budget(server), link);

    // Lift the session frames out of the transcript and replay them verbatim
    // on a fresh connection.
    Bytes session_frame, presentation_frame;
    for (const auto& frame : link.frames_to_server()) {
        const auto kind = wire::decode(frame).kind;
        if (kind == wire::MessageKind::SessionRequest) session_frame = frame;
        if (kind == wire::MessageKind::TokenPresentation) {
            presentation_frame = frame;
        }
    }
    ASSERT_FALSE(session_frame.empty());
    ASSERT_FALSE(presentation_frame.empty());

    auto conn = server.connect();
    const auto issue_replies = server.handle(conn, session_frame);
    ASSERT_EQ(issue_replies.size(), 1u);
    EXPECT_EQ(wire::decode(issue_replies[0]).kind,
              wire::MessageKind::BlindTokenReply);

    const auto replay_replies = server.handle(conn, presentation_frame);
    ASSERT_EQ(replay_replies.size(), 1u);
    const auto reject = wire::decode(replay_replies[0]);
    ASSERT_EQ(reject.kind, wire::MessageKind::Reject);
    EXPECT_EQ(wire::parse_reject(reject), wire::RejectReason::Replay);
}

TEST(Actors, OutOfOrderAndForeignFramesRejected) {
    Rng server_rng(19, "server");
    ServerT server(make_config(2), server_rng);

    const auto expect_reject = [&](ServerT::Connection& conn, const Bytes& frame,
                                   wire::RejectReason reason) {
        const auto replies = server.handle(conn, frame);
        ASSERT_EQ(replies.size(), 1u);
        const auto msg = wire::decode(replies[0]);
        ASSERT_EQ(msg.kind, wire::MessageKind::Reject);
        EXPECT_EQ(wire::parse_reject(msg), reason);
    };

    // Features before any token exchange.
    auto conn = server.connect();
    const Bytes features = wire::encode(
        wire::make_private_features({1.0, 2.0}, {1.0, 2.0}));
    expect_reject(conn, features, wire::RejectReason::Protocol);

    // Client-bound kind arriving at the server.
    const Bytes risk_reply =
        wire::encode(wire::make_risk_reply({0.5, AuthRequirement::StepUp}));
    expect_reject(conn, risk_reply, wire::RejectReason::Protocol);

    // Unframeable bytes.
    expect_reject(conn, Bytes{0xde, 0xad}, wire::RejectReason::Protocol);

    // Well-framed element message whose payload is not a group element.
    Bytes bogus(32, 0xff);
    const Bytes bad_element = wire::encode(
        {wire::MessageKind::BlindedOprfInput, bogus});
    expect_reject(conn, bad_element, wire::RejectReason::Malformed);

    // The malformed frame closed the connection.
    const Bytes valid_input = wire::encode(
        {wire::MessageKind::BlindedOprfInput,
         R255::encode(R255::hash_to_group(to_bytes("x")))});
    expect_reject(conn, valid_input, wire::RejectReason::Protocol);
}

TEST(Actors, OpCountersMatchTaxonomy) {
    for (const std::size_t n_f : {std::size_t{1}, std::size_t{5}, std::size_t{30}}) {
        Rng server_rng(20, "server/" + std::to_string(n_f));
        ServerT server(make_config(n_f), server_rng);
        ClientT client("heidi", "pw", Rng(21, "client/" + std::to_string(n_f)));
        Loopback link(server);
        vault::MemoryContentStore store;
        vault::Registry<R255> registry;
        const auto profile = make_profile(n_f, 40.0);
        client.register_user(profile, link, store, registry);
        client.authenticate(profile, quiet_budget(server), link);

        OpCounters client_setup;
        client_setup.sym_keygens = 1;
        client_setup.sig_keygens = 1;
        client_setup.feature_extractions = n_f;
        client_setup.hashes = 1;
        client_setup.prf_evals = 1;
        client_setup.sym_encryptions = 1;
        client_setup.signatures = 1;
        EXPECT_EQ(client.counters(Phase::Setup), client_setup) << "n_f=" << n_f;

        OpCounters client_auth;
        client_auth.hashes = 1;
        client_auth.prf_evals = 1;
        client_auth.sym_decryptions = 1;
        client_auth.noise_additions = 2 * n_f;
        EXPECT_EQ(client.counters(Phase::Auth), client_auth) << "n_f=" << n_f;

        OpCounters server_setup;
        server_setup.ecdh_keygens = 1;
        server_setup.prf_evals = 1;
        EXPECT_EQ(server.counters(Phase::Setup), server_setup) << "n_f=" << n_f;

        OpCounters server_auth;
        server_auth.prf_evals = 1;
        server_auth.verifications = 1;
        server_auth.aggregations = n_f;
        server_auth.risk_scores = 1;
        server_auth.decisions = 1;
        EXPECT_EQ(server.counters(Phase::Auth), server_auth) << "n_f=" << n_f;
    }
}

TEST(Actors, TranscriptNeverLeaksSecrets) {
    Rng meta(22, "meta");
    for (int run = 0; run < 20; ++run) {
        const std::string username = "user-" + std::to_string(meta.next_u64());
        const std::string password = "pw-" + std::to_string(meta.next_u64());
        const std::size_t n_f = 1 + meta.uniform(6);

        Rng server_rng(meta.next_u64(), "server");
        ServerT server(make_config(n_f), server_rng);
        ClientT client(username, password, Rng(meta.next_u64(), "client"));
        Loopback link(server);
        vault::MemoryContentStore store;
        vault::Registry<R255> registry;

        FeatureVector profile = make_profile(n_f, 0.0);
        FeatureVector live = make_profile(n_f, 0.0);
        for (std::size_t i = 0; i < n_f; ++i) {
            profile.values[i] = meta.uniform_double() * 100.0;
            live.values[i] = meta.uniform_double() * 100.0;
        }
        client.register_user(profile, link, store, registry);
        client.authenticate(
            live, {1.0, derive_sensitivity(server.config().policy,
                                           server.config().bounds)},
            link);

        const Bytes& transcript = link.transcript();
        EXPECT_FALSE(contains_subsequence(transcript, to_bytes(password)));
        const auto digest = oprf::derive_digest<R255>(username, password);
        EXPECT_FALSE(
            contains_subsequence(transcript, R255::encode(digest.element)));
        EXPECT_FALSE(contains_subsequence(
            transcript, Bytes(client.sym_key().begin(), client.sym_key().end())));
        for (std::size_t i = 0; i < n_f; ++i) {
            const auto raw_profile = fixed_point::encode(profile.values[i]);
            const auto raw_live = fixed_point::encode(live.values[i]);
            EXPECT_FALSE(contains_subsequence(transcript, raw_profile));
            EXPECT_FALSE(contains_subsequence(transcript, raw_live));
        }
    }
}

TEST(Actors, TranscriptDeterministicAcrossRuns) {
    const auto run_flow = [] {
        Rng server_rng(23, "server");
        ServerT server(make_config(3), server_rng);
        ClientT client("ivan", "pw", Rng(24, "client"));
        Loopback link(server);
        vault::MemoryContentStore store;
        vault::Registry<R255> registry;
        client.register_user(make_profile(3, 20.0), link, store, registry);
        client.authenticate(
            make_profile(3, 35.0),
            {1.0, derive_sensitivity(server.config().policy,
                                     server.config().bounds)},
            link);
        return link.transcript();
    };
    EXPECT_EQ(run_flow(), run_flow());
}

TEST(Actors, DecisionMatchesOfflineRecomputation) {
    Rng server_rng(25, "server");
    ServerT server(make_config(5), server_rng);
    ClientT client("judy", "pw", Rng(26, "client"));
    Loopback link(server);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    const auto profile = make_profile(5, 45.0);
    client.register_user(profile, link, store, registry);
    const auto result = client.authenticate(
        make_profile(5, 70.0),
        {2.0, derive_sensitivity(server.config().policy,
                                 server.config().bounds)},
        link);

    Bytes features_frame;
    for (const auto& frame : link.frames_to_server()) {
        if (wire::decode(frame).kind == wire::MessageKind::PrivateFeatures) {
            features_frame = frame;
        }
    }
    ASSERT_FALSE(features_frame.empty());
    const auto [noised_profile, noised_live] =
        wire::split_private_features(wire::decode(features_frame));
    const FeatureVector p{noised_profile, server.config().bounds};
    const FeatureVector l{noised_live, server.config().bounds};
    const double offline = score(p, l, server.config().policy);
    EXPECT_EQ(result.requirement, decide(offline, server.config().policy));
    EXPECT_NEAR(result.risk_score, offline, 1e-9);
}

TEST(Actors, AuditSinkObservesDecisions) {
    Rng server_rng(27, "server");
    ServerT server(make_config(2), server_rng);
    std::vector<ServerT::AuditRecord> records;
    server.set_audit_sink([&](const ServerT::AuditRecord& r) {
        records.push_back(r);
    });

    ClientT client("kate", "pw", Rng(28, "client"));
    Loopback link(server);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    const auto profile = make_profile(2, 15.0);
    client.register_user(profile, link, store, registry);
    const auto r1 = client.authenticate(profile, quiet_budget(server), link);
    // Each authentication is one connection; open a fresh link for the next.
    Loopback second_link(server);
    const auto r2 =
        client.authenticate(profile, quiet_budget(server), second_link);

    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].seq, 0u);
    EXPECT_EQ(records[1].seq, 1u);
    EXPECT_EQ(records[0].decision, r1.requirement);
    EXPECT_EQ(records[1].decision, r2.requirement);
    for (const auto& record : records) {
        EXPECT_EQ(record.session_id.size(), R255::kElementBytes);
        EXPECT_GE(record.risk, 0.0);
        EXPECT_LE(record.risk, 1.0);
    }
    EXPECT_NE(records[0].session_id, records[1].session_id);
}

TEST(Actors, LifecycleGuards) {
    EXPECT_THROW(ClientT("", "pw", Rng(29)), ParameterError);
    EXPECT_THROW(ClientT("user", "", Rng(29)), ParameterError);

    Rng server_rng(30, "server");
    ServerT server(make_config(2), server_rng);
    ClientT client("leo", "pw", Rng(31, "client"));
    Loopback link(server);
    EXPECT_THROW(client.snapshot(), ProtocolError);
    EXPECT_THROW(
        client.authenticate(make_profile(2, 1.0), quiet_budget(server), link),
        ProtocolError);

    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    client.register_user(make_profile(2, 1.0), link, store, registry);

    // Live vector with a schema that differs from the registered profile.
    FeatureVector skewed = make_profile(2, 1.0);
    skewed.bounds[1] = {0.0, 50.0};
    EXPECT_THROW(client.authenticate(skewed, quiet_budget(server), link),
                 ParameterError);
    FeatureVector short_vec = make_profile(1, 1.0);
    EXPECT_THROW(client.authenticate(short_vec, quiet_budget(server), link),
                 ParameterError);
}

TEST(Actors, AdoptedIdentityKeepsOneRegistryOwner) {
    Rng server_rng(33, "server");
    ServerT server(make_config(2), server_rng);
    vault::MemoryContentStore store;
    vault::Registry<R255> registry;
    const auto profile = make_profile(2, 5.0);

    ClientT first("mia", "pw", Rng(34, "client"));
    Loopback link1(server);
    first.register_user(profile, link1, store, registry);
    const auto identity = first.snapshot().signing_secret;

    ClientT second("mia", "pw", Rng(35, "client"));
    second.adopt_identity(identity);
    Loopback link2(server);
    second.register_user(profile, link2, store, registry);

    EXPECT_EQ(second.owner_pub(), first.owner_pub());
    EXPECT_EQ(registry.owner_count(), 1u);
    EXPECT_EQ(registry.latest(first.owner_pub())->counter, 2u);
    // No keypair was generated for the adopted identity.
    EXPECT_EQ(second.counters(Phase::Setup).sig_keygens, 0u);
    EXPECT_EQ(first.counters(Phase::Setup).sig_keygens, 1u);

    EXPECT_THROW(second.adopt_identity(identity), ProtocolError);
}

TEST(Actors, ServerConfigValidation) {
    Rng rng(32);
    auto cfg = make_config(2);
    cfg.bounds.pop_back();
    EXPECT_THROW(ServerT(cfg, rng), ParameterError);

    auto inverted = make_config(2);
    inverted.bounds[0] = {5.0, 5.0};
    EXPECT_THROW(ServerT(inverted, rng), ParameterError);
}

} // namespace
} // namespace privauth
