#ifndef PRIVAUTH_SIMNET_HPP
#define PRIVAUTH_SIMNET_HPP

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "privauth/actors.hpp"
#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/group.hpp"
#include "privauth/metrics.hpp"
#include "privauth/rng.hpp"
#include "privauth/transport.hpp"

namespace privauth::simnet {

// Simulated link parameters. Congestion scales three things at once: lower
// factors shrink chunks, stretch delays, and raise the effective loss rate.
struct NetConfig {
    double delay_min_ms = 10.0;
    double delay_max_ms = 100.0;
    double congestion = 1.0;
    double base_loss = 0.10;
    std::size_t base_chunk = 1024;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(delay_min_ms > 0 && delay_min_ms < delay_max_ms)) {
            throw ParameterError("simnet: delay interval must satisfy 0 < min < max");
        }
        if (!(congestion >= 0.5 && congestion <= 2.0)) {
            throw ParameterError("simnet: congestion must lie in [0.5, 2.0]");
        }
        if (!(base_loss >= 0.0 && base_loss < 1.0)) {
            throw ParameterError("simnet: base loss must lie in [0, 1)");
        }
        if (base_chunk == 0) {
            throw ParameterError("simnet: base chunk must be positive");
        }
    }
};

struct TransmissionReport {
    double elapsed_ms = 0.0;
    std::uint64_t retransmissions = 0;
    std::uint64_t chunks = 0;
    std::uint64_t bytes_sent = 0;

    TransmissionReport& operator+=(const TransmissionReport& other) {
        elapsed_ms += other.elapsed_ms;
        retransmissions += other.retransmissions;
        chunks += other.chunks;
        bytes_sent += other.bytes_sent;
        return *this;
    }
};

// Sends one payload through the simulated link. Each chunk repeats until
// delivered: a dropped attempt costs an RTT-based timeout (twice the running
// mean one-way delay), a delivered one costs its drawn delay.
inline TransmissionReport transmit(const Bytes& payload, const NetConfig& cfg,
                                   Rng& rng) {
    cfg.validate();
    if (payload.empty()) {
        throw ParameterError("simnet: payload must be nonempty");
    }
    const auto chunk_size = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(cfg.base_chunk) *
                                    cfg.congestion));
    const double loss = std::min(0.95, cfg.base_loss / cfg.congestion);

    TransmissionReport report;
    double mean_delay = (cfg.delay_min_ms + cfg.delay_max_ms) / 2.0 /
                        cfg.congestion;
    std::uint64_t delivered = 0;
    for (std::size_t off = 0; off < payload.size(); off += chunk_size) {
        const std::size_t len = std::min(chunk_size, payload.size() - off);
        report.chunks += 1;
        for (;;) {
            report.bytes_sent += len;
            if (rng.uniform_double() < loss) {
                report.retransmissions += 1;
                report.elapsed_ms += 2.0 * mean_delay;
                continue;
            }
            const double delay =
                (cfg.delay_min_ms +
                 rng.uniform_double() * (cfg.delay_max_ms - cfg.delay_min_ms)) /
                cfg.congestion;
            report.elapsed_ms += delay;
            delivered += 1;
            mean_delay += (delay - mean_delay) / static_cast<double>(delivered);
            break;
        }
    }
    return report;
}

// In-process transport whose frames pay simulated network costs in both
// directions. Frame contents are delivered intact; only timing, chunking,
// and retransmission counts are affected.
template <typename ServerT>
class SimTransport final : public Transport {
public:
    SimTransport(ServerT& server, const NetConfig& cfg, Rng net_rng)
        : server_(server), connection_(server.connect()), cfg_(cfg),
          net_rng_(std::move(net_rng)) {
        cfg_.validate();
    }

    SimTransport(ServerT& server, const NetConfig& cfg)
        : SimTransport(server, cfg, Rng(cfg.seed, "simnet")) {}

    void send(const Bytes& frame) override {
        totals_ += transmit(frame, cfg_, net_rng_);
        transport_detail::record(transcript_, kToServer, frame);
        for (const Bytes& reply : server_.handle(connection_, frame)) {
            totals_ += transmit(reply, cfg_, net_rng_);
            transport_detail::record(transcript_, kToClient, reply);
            inbox_.push_back(reply);
        }
    }

    Bytes receive() override {
        if (inbox_.empty()) {
            throw TransportError("simnet: no pending reply");
        }
        Bytes frame = inbox_.front();
        inbox_.pop_front();
        return frame;
    }

    const TransmissionReport& totals() const { return totals_; }
    const Bytes& transcript() const { return transcript_; }

private:
    ServerT& server_;
    typename ServerT::Connection connection_;
    NetConfig cfg_;
    Rng net_rng_;
    TransmissionReport totals_;
    std::deque<Bytes> inbox_;
    Bytes transcript_;
};

// Nominal per-operation costs in milliseconds. Compute metrics are modeled
// from instrumented counters rather than wall-clocked, keeping benchmark
// output hardware-independent and reproducible.
struct CostModel {
    double sym_keygen_ms = 0.02;
    double sig_keygen_ms = 0.25;
    double ecdh_keygen_ms = 0.25;
    double feature_extraction_ms = 0.02;
    double sym_encryption_ms = 0.05;
    double sym_decryption_ms = 0.05;
    double hash_ms = 0.01;
    double prf_eval_ms = 0.35;
    double verification_ms = 0.40;
    double noise_addition_ms = 0.35;
    double aggregation_ms = 0.06;
    double risk_score_ms = 0.05;
    double decision_ms = 0.005;
    double signature_ms = 0.30;

    double compute_ms(const OpCounters& c) const {
        return static_cast<double>(c.sym_keygens) * sym_keygen_ms +
               static_cast<double>(c.sig_keygens) * sig_keygen_ms +
               static_cast<double>(c.ecdh_keygens) * ecdh_keygen_ms +
               static_cast<double>(c.feature_extractions) * feature_extraction_ms +
               static_cast<double>(c.sym_encryptions) * sym_encryption_ms +
               static_cast<double>(c.sym_decryptions) * sym_decryption_ms +
               static_cast<double>(c.hashes) * hash_ms +
               static_cast<double>(c.prf_evals) * prf_eval_ms +
               static_cast<double>(c.verifications) * verification_ms +
               static_cast<double>(c.noise_additions) * noise_addition_ms +
               static_cast<double>(c.aggregations) * aggregation_ms +
               static_cast<double>(c.risk_scores) * risk_score_ms +
               static_cast<double>(c.decisions) * decision_ms +
               static_cast<double>(c.signatures) * signature_ms;
    }
};

struct BenchRow {
    std::size_t n_f;
    std::string phase;
    std::string side;
    std::string metric;
    double mean;
    std::size_t trials;

    bool operator==(const BenchRow&) const = default;
};

inline const std::vector<std::size_t>& default_feature_counts() {
    static const std::vector<std::size_t> counts{1, 5, 10, 15, 20, 25, 30};
    return counts;
}

namespace detail {

struct PhaseAccumulator {
    double client_compute_ms = 0.0;
    double server_compute_ms = 0.0;
    double comm_ms = 0.0;
    std::uint64_t retransmissions = 0;
    std::uint64_t chunks = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t client_ops = 0;
    std::uint64_t server_ops = 0;
};

template <PrimeOrderGroup G>
void run_trials(std::size_t n_f, const NetConfig& cfg, std::size_t trials,
                const CostModel& costs, PhaseAccumulator& setup,
                PhaseAccumulator& auth) {
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::string tag =
            std::to_string(n_f) + "/" + std::to_string(trial);

        typename Server<G>::Config server_cfg;
        server_cfg.policy = RiskPolicy::uniform(n_f);
        server_cfg.bounds.assign(n_f, {0.0, 100.0});
        Rng server_rng(cfg.seed, "bench/server/" + tag);
        Server<G> server(server_cfg, server_rng);

        Rng feature_rng(cfg.seed, "bench/features/" + tag);
        FeatureVector profile;
        FeatureVector live;
        profile.bounds = server_cfg.bounds;
        live.bounds = server_cfg.bounds;
        for (std::size_t i = 0; i < n_f; ++i) {
            profile.values.push_back(feature_rng.uniform_double() * 100.0);
            live.values.push_back(
                std::clamp(profile.values[i] +
                               (feature_rng.uniform_double() - 0.5) * 20.0,
                           0.0, 100.0));
        }

        Client<G> client("bench-user-" + tag, "bench-password",
                         Rng(cfg.seed, "bench/client/" + tag));
        vault::MemoryContentStore store;
        vault::Registry<G> registry;
        SimTransport<Server<G>> link(server, cfg,
                                     Rng(cfg.seed, "bench/net/" + tag));

        client.register_user(profile, link, store, registry);
        const TransmissionReport after_setup = link.totals();
        setup.client_compute_ms += costs.compute_ms(client.counters(Phase::Setup));
        setup.server_compute_ms += costs.compute_ms(server.counters(Phase::Setup));
        setup.comm_ms += after_setup.elapsed_ms;
        setup.retransmissions += after_setup.retransmissions;
        setup.chunks += after_setup.chunks;
        setup.bytes_sent += after_setup.bytes_sent;
        setup.client_ops += client.counters(Phase::Setup).total();
        setup.server_ops += server.counters(Phase::Setup).total();

        const PrivacyBudget budget{
            1.0, derive_sensitivity(server_cfg.policy, server_cfg.bounds)};
        client.authenticate(live, budget, link);
        const TransmissionReport after_auth = link.totals();
        auth.client_compute_ms += costs.compute_ms(client.counters(Phase::Auth));
        auth.server_compute_ms += costs.compute_ms(server.counters(Phase::Auth));
        auth.comm_ms += after_auth.elapsed_ms - after_setup.elapsed_ms;
        auth.retransmissions +=
            after_auth.retransmissions - after_setup.retransmissions;
        auth.chunks += after_auth.chunks - after_setup.chunks;
        auth.bytes_sent += after_auth.bytes_sent - after_setup.bytes_sent;
        auth.client_ops += client.counters(Phase::Auth).total();
        auth.server_ops += server.counters(Phase::Auth).total();
    }
}

inline void emit_rows(std::vector<BenchRow>& rows, std::size_t n_f,
                      const std::string& phase, const PhaseAccumulator& acc,
                      std::size_t trials, bool detailed) {
    const auto t = static_cast<double>(trials);
    rows.push_back({n_f, phase, "client", "compute_ms",
                    acc.client_compute_ms / t, trials});
    rows.push_back({n_f, phase, "server", "compute_ms",
                    acc.server_compute_ms / t, trials});
    rows.push_back({n_f, phase, "comm", "time_ms", acc.comm_ms / t, trials});
    if (!detailed) {
        return;
    }
    // Retransmissions are normalized per chunk, pooled across the cell's
    // trials, to stay comparable across payload sizes.
    rows.push_back({n_f, phase, "comm", "retransmissions",
                    static_cast<double>(acc.retransmissions) /
                        static_cast<double>(acc.chunks),
                    trials});
    rows.push_back({n_f, phase, "comm", "bytes",
                    static_cast<double>(acc.bytes_sent) / t, trials});
    rows.push_back({n_f, phase, "client", "op_count",
                    static_cast<double>(acc.client_ops) / t, trials});
    rows.push_back({n_f, phase, "server", "op_count",
                    static_cast<double>(acc.server_ops) / t, trials});
}

template <PrimeOrderGroup G>
std::vector<BenchRow> run(const std::vector<std::size_t>& feature_counts,
                          const NetConfig& cfg, std::size_t trials,
                          const CostModel& costs, bool detailed) {
    if (feature_counts.empty()) {
        throw ParameterError("bench: feature counts must be nonempty");
    }
    if (trials == 0) {
        throw ParameterError("bench: trials must be positive");
    }
    std::vector<BenchRow> rows;
    for (const std::size_t n_f : feature_counts) {
        PhaseAccumulator setup;
        PhaseAccumulator auth;
        run_trials<G>(n_f, cfg, trials, costs, setup, auth);
        emit_rows(rows, n_f, "setup", setup, trials, detailed);
        emit_rows(rows, n_f, "auth", auth, trials, detailed);
    }
    return rows;
}

} // namespace detail

// Full setup+authentication sweep over the simulated link. Emits client and
// server compute rows plus a communication-time row per (n_f, phase) cell.
template <PrimeOrderGroup G = Ristretto255Group>
std::vector<BenchRow> run_benchmark(
    const std::vector<std::size_t>& feature_counts, const NetConfig& cfg,
    std::size_t trials = 10, const CostModel& costs = {}) {
    return detail::run<G>(feature_counts, cfg, trials, costs, false);
}

// Adds per-cell retransmission, byte, and operation-count rows.
template <PrimeOrderGroup G = Ristretto255Group>
std::vector<BenchRow> run_benchmark_detailed(
    const std::vector<std::size_t>& feature_counts, const NetConfig& cfg,
    std::size_t trials = 10, const CostModel& costs = {}) {
    return detail::run<G>(feature_counts, cfg, trials, costs, true);
}

inline std::string to_csv(const std::vector<BenchRow>& rows) {
    std::string out = "n_f,phase,side,metric,mean,trials\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", row.mean);
        out += std::to_string(row.n_f) + ',' + row.phase + ',' + row.side +
               ',' + row.metric + ',' + buf + ',' + std::to_string(row.trials) +
               '\n';
    }
    return out;
}

inline void export_csv(const std::vector<BenchRow>& rows,
                       const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    out << to_csv(rows);
    if (!out) {
        throw Error("bench: failed to write csv");
    }
}

inline std::vector<BenchRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "n_f,phase,side,metric,mean,trials") {
        throw DecodeError("bench: bad csv header");
    }
    std::vector<BenchRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 6> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i < 6; ++i) {
            const std::size_t comma = line.find(',', start);
            if ((comma == std::string::npos) != (i == 5)) {
                throw DecodeError("bench: bad csv row");
            }
            fields[i] = line.substr(start, comma - start);
            start = comma + 1;
        }
        BenchRow row;
        try {
            row.n_f = std::stoul(fields[0]);
            row.mean = std::stod(fields[4]);
            row.trials = std::stoul(fields[5]);
        } catch (const std::logic_error&) {
            throw DecodeError("bench: bad csv number");
        }
        row.phase = fields[1];
        row.side = fields[2];
        row.metric = fields[3];
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace privauth::simnet

#endif // PRIVAUTH_SIMNET_HPP
